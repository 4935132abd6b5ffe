"""Exact solvers for small instances.

``solve_exact_erlang`` maximizes the Erlang objective f by depth-first
branch and bound over session counts.  ``solve_mdkp_linear`` solves the
linear-reward multidimensional knapsack max sum_p w_p n_p by dynamic
programming over the capacity lattice.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce

import numpy as np

from .model import Instance, session_caps, weights
from .objective import GainEvaluator

# Bounds are summed in plain float while leaves use fsum; pruning keeps this
# much headroom so rounding never cuts an optimal branch.
_PRUNE_SLACK = 1e-13


class CapacityExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class ExactSolution:
    n: tuple[int, ...]
    objective: float
    nodes_explored: int
    proven_optimal: bool


class _BudgetExhausted(Exception):
    pass


class _ErlangSearch:
    def __init__(self, instance: Instance, budget_limit: int):
        self.inst = instance
        self.ev = GainEvaluator(instance)
        self.caps = session_caps(instance)
        self.demand = [sp.demand for sp in instance.sps]
        self.P = instance.P
        self.budget = budget_limit
        self.nodes = 0

    def _fit(self, p: int, resid: list[int]) -> int:
        return min(self.caps[p], min(k // z for k, z in zip(resid, self.demand[p])))

    def _bound_rest(self, p: int, resid: list[int]) -> float:
        # Remaining SPs each get at most what fits alone in the residual pool.
        return sum(self.ev.term(q, self._fit(q, resid)) for q in range(p, self.P))

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget:
            raise _BudgetExhausted

    def maximize(self, best: tuple[float, tuple[int, ...]]) -> tuple[float, tuple[int, ...]]:
        """Pass 1: best value, largest counts explored first."""
        self.best = best
        n = [0] * self.P
        self._dfs_max(0, list(self.inst.capacities), 0.0, n)
        return self.best

    def _dfs_max(self, p, resid, partial, n):
        self._tick()
        top = self._fit(p, resid)
        if p == self.P - 1:
            n[p] = top
            val = self.ev.value(n)
            if val > self.best[0]:
                self.best = (val, tuple(n))
            return
        z = self.demand[p]
        for k in range(top, -1, -1):
            child = [c - k * zr for c, zr in zip(resid, z)]
            here = partial + self.ev.term(p, k)
            if here + self._bound_rest(p + 1, child) < self.best[0] - _PRUNE_SLACK:
                continue
            n[p] = k
            self._dfs_max(p + 1, child, here, n)
        n[p] = 0

    def first_lex_at_least(self, target: float) -> tuple[int, ...] | None:
        """Pass 2: lexicographically smallest n with f(n) >= target."""
        n = [0] * self.P
        return self._dfs_lex(0, list(self.inst.capacities), 0.0, n, target)

    def _dfs_lex(self, p, resid, partial, n, target):
        self._tick()
        top = self._fit(p, resid)
        z = self.demand[p]
        if p == self.P - 1:
            for k in range(top + 1):
                n[p] = k
                if self.ev.value(n) >= target:
                    return tuple(n)
            n[p] = 0
            return None
        for k in range(top + 1):
            child = [c - k * zr for c, zr in zip(resid, z)]
            here = partial + self.ev.term(p, k)
            if here + self._bound_rest(p + 1, child) < target - _PRUNE_SLACK:
                continue
            n[p] = k
            found = self._dfs_lex(p + 1, child, here, n, target)
            if found is not None:
                return found
        n[p] = 0
        return None


def solve_exact_erlang(instance: Instance, budget_limit: int = 10_000_000) -> ExactSolution:
    """Globally optimal session counts for f, ties to the lexicographic minimum.

    f is summed with ``math.fsum`` so allocations built from the same per-SP
    terms tie exactly, whatever the SP order.

    If the node budget runs out the best incumbent is returned with
    ``proven_optimal=False``.
    """
    search = _ErlangSearch(instance, budget_limit)
    zero = (0,) * instance.P
    best = (search.ev.value(zero), zero)
    try:
        best = search.maximize(best)
    except _BudgetExhausted:
        best = search.best
        return ExactSolution(best[1], best[0], search.nodes, False)
    try:
        n = search.first_lex_at_least(best[0])
    except _BudgetExhausted:
        return ExactSolution(best[1], best[0], search.nodes, False)
    assert n is not None
    return ExactSolution(n, search.ev.value(n), search.nodes, True)


# -- linear multidimensional knapsack -----------------------------------

def _linear_value(w, n) -> float:
    return math.fsum(wp * np_ for wp, np_ in zip(w, n))


def _mdkp_enumerate(instance: Instance, w, limit: int) -> ExactSolution:
    caps = session_caps(instance)
    size = math.prod(c + 1 for c in caps)
    if size > limit:
        raise CapacityExceeded(f"session lattice has {size} points (limit {limit})")
    best_val, best_n, nodes = -1.0, None, 0
    for n in itertools.product(*(range(c + 1) for c in caps)):
        nodes += 1
        if all(
            sum(n_p * sp.demand[r] for n_p, sp in zip(n, instance.sps)) <= k
            for r, k in enumerate(instance.capacities)
        ):
            val = _linear_value(w, n)
            if val > best_val:
                best_val, best_n = val, n
    return ExactSolution(tuple(best_n), best_val, nodes, True)


def solve_mdkp_linear(
    instance: Instance,
    rewards=None,
    max_cells: int = 100_000_000,
    enum_limit: int = 10_000_000,
) -> ExactSolution:
    """max sum_p w_p n_p  s.t.  sum_p z_p^r n_p <= K^r, n_p integer >= 0.

    Capacities and demands are first divided by the per-resource gcd of the
    demands, which leaves the feasible set unchanged.  Falls back to
    enumerating session vectors when the capacity table would exceed
    ``max_cells``.
    """
    w = tuple(rewards) if rewards is not None else weights(instance)
    caps = session_caps(instance)
    gcds = [reduce(math.gcd, (sp.demand[r] for sp in instance.sps)) for r in range(instance.d)]
    K = tuple(k // g for k, g in zip(instance.capacities, gcds))
    Z = [tuple(sp.demand[r] // gcds[r] for r in range(instance.d)) for sp in instance.sps]
    shape = tuple(k + 1 for k in K)
    cells = math.prod(shape)
    if cells > max_cells:
        try:
            return _mdkp_enumerate(instance, w, enum_limit)
        except CapacityExceeded:
            raise CapacityExceeded(
                f"capacity lattice has {cells} cells (limit {max_cells}) and the "
                f"session lattice exceeds {enum_limit} points"
            ) from None

    stages = [np.zeros(shape)]
    for p, z in enumerate(Z):
        prev = stages[-1]
        cur = prev.copy()
        for k in range(1, caps[p] + 1):
            dst = tuple(slice(k * zr, None) for zr in z)
            src = tuple(slice(0, s - k * zr) for s, zr in zip(shape, z))
            np.maximum(cur[dst], prev[src] + k * w[p], out=cur[dst])
        stages.append(cur)

    # Walk back from the full pool, taking the smallest count that explains
    # each stage's value.
    c = list(K)
    n = [0] * instance.P
    for p in range(instance.P - 1, -1, -1):
        target = stages[p + 1][tuple(c)]
        prev = stages[p]
        z = Z[p]
        for k in range(caps[p] + 1):
            if any(ci - k * zr < 0 for ci, zr in zip(c, z)):
                break
            if prev[tuple(ci - k * zr for ci, zr in zip(c, z))] + k * w[p] == target:
                n[p] = k
                c = [ci - k * zr for ci, zr in zip(c, z)]
                break
    return ExactSolution(tuple(n), _linear_value(w, n), cells * instance.P, True)
