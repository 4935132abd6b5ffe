"""Single-pass threshold streaming for monotone submodular maximization
under d knapsack constraints.

Each candidate session is an item.  A geometric grid of guesses v for the
optimum is maintained lazily; every guess owns a partial solution S_v and
accepts an item when it fits and its marginal gain per normalized unit of
every resource reaches 2v/(1+2d).  The best S_v wins.

Costs are compared in normalized form z_p^r / K^r (every budget becomes 1).
The grid bounds are taken in integer base units: with integral costs the
running maximum singleton density m satisfies m <= OPT <= K_max * m, so
[m/base, 2 K_max m] always brackets the optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import Instance, session_caps
from .objective import GainEvaluator, ObjectiveValue, eval_f


@dataclass(frozen=True)
class ItemOrder:
    kind: str = "round-robin"
    seed: int | None = None

    KINDS = ("round-robin", "sequential", "seeded")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown item order {self.kind!r}")
        if self.kind == "seeded" and self.seed is None:
            raise ValueError("seeded order needs a seed")

    @classmethod
    def parse(cls, text: str) -> "ItemOrder":
        if text.startswith("seeded:"):
            seed = int(text.split(":", 1)[1])
            if not 0 <= seed < 2**64:
                raise ValueError("seed must be an unsigned 64-bit integer")
            return cls("seeded", seed)
        return cls(text)

    def __str__(self):
        return f"seeded:{self.seed}" if self.kind == "seeded" else self.kind


ROUND_ROBIN = ItemOrder("round-robin")
SEQUENTIAL = ItemOrder("sequential")


def item_stream(instance: Instance, order: ItemOrder = ROUND_ROBIN) -> list[tuple[int, int]]:
    """Every candidate session (sp, index) exactly once, in the given order."""
    caps = session_caps(instance)
    sequential = [(p, j) for p, cap in enumerate(caps) for j in range(cap)]
    if order.kind == "sequential":
        return sequential
    if order.kind == "round-robin":
        return [(p, j) for j in range(max(caps)) for p, cap in enumerate(caps) if j < cap]
    perm = np.random.default_rng(order.seed).permutation(len(sequential))
    return [sequential[i] for i in perm]


@dataclass(frozen=True)
class ThresholdGrid:
    base: float
    levels: tuple[float, ...]


@dataclass(frozen=True)
class StreamSolution:
    n: tuple[int, ...]
    f: ObjectiveValue
    threshold_used: float
    items_scanned: int
    # (v, n, f) for every grid level alive at the end of the pass
    candidates: tuple[tuple[float, tuple[int, ...], float], ...] = ()

    @property
    def grid(self) -> ThresholdGrid:
        levels = tuple(v for v, _, _ in self.candidates)
        base = levels[1] / levels[0] if len(levels) > 1 else float("nan")
        return ThresholdGrid(base, levels)


def solve_stream(instance: Instance, order: ItemOrder = ROUND_ROBIN) -> StreamSolution:
    d, P = instance.d, instance.P
    K = np.array(instance.capacities, dtype=np.int64)
    k_max = int(K.max())
    base = 1.0 + (1 + 2 * d) * instance.epsilon
    log_base = math.log(base)
    ev = GainEvaluator(instance)
    caps = session_caps(instance)

    demand = np.array([sp.demand for sp in instance.sps], dtype=np.int64)
    # largest normalized consumption of one session, per SP
    z_norm_max = (demand / K).max(axis=1)
    # marginal gain tables: gains[p][k] = f increase from k to k+1 sessions
    gains = [
        np.array([ev.gain(p, k) for k in range(caps[p] + 1)]) for p in range(P)
    ]
    single = np.array([g[0] for g in gains])
    big = z_norm_max >= 0.5
    single_density = single / z_norm_max
    # singleton density in integral base units, drives the grid bounds
    raw_density = single / demand.min(axis=1)

    m = 0.0
    lo = hi = 0
    # one row per live grid level l = lo..hi
    n = np.zeros((0, P), dtype=np.int64)
    used = np.zeros((0, d), dtype=np.int64)
    tau = np.zeros(0)
    scanned = 0
    for p, _j in item_stream(instance, order):
        scanned += 1
        if raw_density[p] > m:
            m = float(raw_density[p])
            new_lo = math.ceil(math.log(m / base) / log_base - 1e-9)
            new_hi = math.floor(math.log(2 * k_max * m) / log_base + 1e-9)
            keep = slice(max(new_lo - lo, 0), None) if len(n) else slice(0, 0)
            fresh = new_hi + 1 - max(new_lo, hi + 1 if len(n) else new_lo)
            n = np.vstack([n[keep], np.zeros((fresh, P), dtype=np.int64)])
            used = np.vstack([used[keep], np.zeros((fresh, d), dtype=np.int64)])
            lo, hi = new_lo, new_hi
            tau = 2.0 * base ** np.arange(lo, hi + 1, dtype=float) / (1 + 2 * d)

        if big[p]:
            swap = single_density[p] >= tau
            if swap.any():
                n[swap] = 0
                n[swap, p] = 1
                used[swap] = demand[p]
        else:
            swap = np.zeros(len(tau), dtype=bool)
        fits = np.all(used + demand[p] <= K, axis=1)
        g = gains[p][np.minimum(n[:, p], caps[p])]
        # density against every resource reduces to the largest cost
        take = fits & ~swap & (g >= tau * z_norm_max[p])
        n[take, p] += 1
        used[take] += demand[p]

    if len(n) == 0:
        zero = (0,) * P
        return StreamSolution(zero, eval_f(instance, zero, ev), 0.0, scanned)
    values = [ev.value(row) for row in n.tolist()]
    # largest f, then smallest threshold
    best = max(range(len(values)), key=lambda i: (values[i], -i))
    sol = tuple(int(x) for x in n[best])
    candidates = tuple(
        (base ** (lo + i), tuple(row), values[i]) for i, row in enumerate(n.tolist())
    )
    return StreamSolution(sol, eval_f(instance, sol, ev), base ** (lo + best), scanned, candidates)
