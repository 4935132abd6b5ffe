"""Reference allocations: arrival-rate-proportional shares and the
effective-capacity greedy heuristic for the linear knapsack."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import ExactSolution
from .model import Allocation, Instance, max_sessions, session_caps, weights


@dataclass(frozen=True)
class HeuristicParams:
    alpha: float = 1.0
    # Per-copy rewards; None means the SP weights w_p.
    xi: tuple[float, ...] | None = None

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")


def proportional_allocation(instance: Instance) -> Allocation:
    """Split every resource in proportion to arrival rates.

    Shares are floored to base units; leftover units go one each to the
    largest fractional remainders (ties to the smaller SP index).
    """
    lams = [Fraction(sp.lam) for sp in instance.sps]
    total = sum(lams)
    theta = [[0] * instance.d for _ in instance.sps]
    for r, cap in enumerate(instance.capacities):
        exact = [lam * cap / total for lam in lams]
        floors = [math.floor(x) for x in exact]
        leftover = cap - sum(floors)
        order = sorted(range(instance.P), key=lambda p: (-(exact[p] - floors[p]), p))
        for p in order[:leftover]:
            floors[p] += 1
        for p in range(instance.P):
            theta[p][r] = floors[p]
    n = tuple(max_sessions(theta[p], sp.demand) for p, sp in enumerate(instance.sps))
    return Allocation(n, tuple(tuple(row) for row in theta), instance.capacities)


def effective_capacity(remaining: Sequence[int], demand_p: Sequence[int]) -> int:
    """Copies of one SP's session that fit in ``remaining`` on their own."""
    return min(int(k) // int(z) for k, z in zip(remaining, demand_p))


def greedy_heuristic(instance: Instance, params: HeuristicParams = HeuristicParams()) -> ExactSolution:
    """Primal heuristic for max sum_p xi_p n_p under the capacity constraints.

    Each round picks the eligible SP with the largest reward over its
    effective capacity and commits a fraction alpha of that capacity.
    """
    xi = params.xi if params.xi is not None else weights(instance)
    if len(xi) != instance.P:
        raise ValueError(f"expected {instance.P} rewards, got {len(xi)}")
    resid = list(instance.capacities)
    left = list(session_caps(instance))
    n = [0] * instance.P
    eligible = set(range(instance.P))
    rounds = 0
    while eligible:
        eff = {p: min(left[p], effective_capacity(resid, instance.sps[p].demand)) for p in eligible}
        if all(c == 0 for c in eff.values()):
            break
        best = max(sorted(eligible), key=lambda p: (xi[p] * eff[p], eff[p] > 0, -p))
        if eff[best] == 0:
            break
        take = min(left[best], max(1, math.floor(params.alpha * eff[best])))
        n[best] += take
        left[best] -= take
        resid = [k - take * z for k, z in zip(resid, instance.sps[best].demand)]
        rounds += 1
        if left[best] == 0 or params.alpha == 1:
            eligible.discard(best)
    value = math.fsum(x * k for x, k in zip(xi, n))
    return ExactSolution(tuple(n), value, rounds, False)
