"""Edge-service probability f over session-count vectors.

All candidate sessions of one SP are interchangeable, so a session set is
represented by its per-SP counts ``n``.  f(n) = sum_p w_p (1 - B(n_p, A_p)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .erlang import BlockingRecurrence
from .model import Instance, session_caps, weights


class SaturationError(ValueError):
    """SP already holds every candidate session it could ever get."""


@dataclass(frozen=True)
class ObjectiveValue:
    f: float
    per_sp: tuple[float, ...]


class GainEvaluator:
    """Per-SP blocking tables extended lazily by the Erlang recurrence.

    Holds mutable state; create one per solver run and do not share it
    between threads.
    """

    def __init__(self, instance: Instance):
        self.instance = instance
        self.w = weights(instance)
        self.caps = session_caps(instance)
        self._rec = [BlockingRecurrence(a) for a in instance.loads]
        self._tables = [[r.value] for r in self._rec]

    def blocking(self, p: int, n_p: int) -> float:
        table = self._tables[p]
        while len(table) <= n_p:
            table.append(self._rec[p].step())
        return table[n_p]

    def term(self, p: int, n_p: int) -> float:
        """f_p contribution at n_p sessions."""
        return self.w[p] * (1.0 - self.blocking(p, n_p))

    def gain(self, p: int, n_p: int) -> float:
        """Increase of f when SP p goes from n_p to n_p + 1 sessions."""
        return self.w[p] * (self.blocking(p, n_p) - self.blocking(p, n_p + 1))

    def value(self, n: Sequence[int]) -> float:
        return math.fsum(self.term(p, n_p) for p, n_p in enumerate(n))


def _check_bounds(instance: Instance, n: Sequence[int], caps: Sequence[int]) -> None:
    if len(n) != instance.P:
        raise ValueError(f"expected {instance.P} session counts, got {len(n)}")
    for p, (n_p, cap) in enumerate(zip(n, caps)):
        if int(n_p) != n_p or not 0 <= n_p <= cap:
            raise ValueError(f"n[{p}]={n_p} outside [0, {cap}]")


def eval_f(instance: Instance, n: Sequence[int], evaluator: GainEvaluator | None = None) -> ObjectiveValue:
    ev = evaluator or GainEvaluator(instance)
    _check_bounds(instance, n, ev.caps)
    per_sp = tuple(ev.term(p, int(n_p)) for p, n_p in enumerate(n))
    return ObjectiveValue(math.fsum(per_sp), per_sp)


def marginal_gain(instance: Instance, n: Sequence[int], p: int, evaluator: GainEvaluator | None = None) -> float:
    ev = evaluator or GainEvaluator(instance)
    _check_bounds(instance, n, ev.caps)
    if n[p] >= ev.caps[p]:
        raise SaturationError(f"SP {p} already at its full-pool cap N_p={ev.caps[p]}")
    return ev.gain(p, int(n[p]))


def expected_utility(instance: Instance, n: Sequence[int]) -> float:
    """Mean utility of an arriving user: edge users get u_edge, the rest u_cloud."""
    f = eval_f(instance, n).f
    return (instance.u_edge - instance.u_cloud) * f + instance.u_cloud
