"""Erlang-B blocking probability for an n-server loss system."""
from __future__ import annotations

import math


def _check_load(a: float) -> None:
    if not math.isfinite(a) or a < 0:
        raise ValueError(f"offered load must be finite and non-negative, got {a!r}")


class BlockingRecurrence:
    """Running state of B(i) = a B(i-1) / (i + a B(i-1)), B(0) = 1.

    The value is kept as ``mant * 2**exp`` so that blocking probabilities far
    below the smallest normal double keep full relative precision until the
    final conversion.
    """

    __slots__ = ("a", "i", "_mant", "_exp")

    def __init__(self, a: float):
        _check_load(a)
        self.a = float(a)
        self.i = 0
        self._mant = 0.5
        self._exp = 1

    @property
    def value(self) -> float:
        return math.ldexp(self._mant, self._exp)

    def step(self) -> float:
        self.i += 1
        if self.a == 0.0:
            self._mant, self._exp = 0.0, 0
            return 0.0
        num = self.a * self._mant
        mant = num / (self.i + math.ldexp(num, self._exp))
        mant, shift = math.frexp(mant)
        self._mant = mant
        self._exp += shift
        return self.value


def blocking_table(a: float, n_max: int) -> list[float]:
    """[B(0, a), ..., B(n_max, a)]."""
    if n_max < 0:
        raise ValueError("n_max must be >= 0")
    rec = BlockingRecurrence(a)
    out = [rec.value]
    for _ in range(n_max):
        out.append(rec.step())
    return out


def erlang_b(a: float, n: int) -> float:
    """B(n, a) by the scaled recurrence, without building a table."""
    _check_load(a)
    if n < 0:
        raise ValueError("server count must be >= 0")
    if n == 0:
        return 1.0
    if a == 0.0:
        return 0.0
    a = float(a)
    mant, exp = 0.5, 1
    frexp, ldexp = math.frexp, math.ldexp
    for i in range(1, n + 1):
        num = a * mant
        mant, shift = frexp(num / (i + ldexp(num, exp)))
        exp += shift
    return ldexp(mant, exp)


def erlang_b_direct(a: float, n: int) -> float:
    """Literal ratio (a^n/n!) / sum_i a^i/i!, summed in log space.

    Slow (O(n) exp calls); kept as an independent cross-check of
    :func:`erlang_b`.
    """
    _check_load(a)
    if n < 0:
        raise ValueError("server count must be >= 0")
    if n == 0:
        return 1.0
    if a == 0.0:
        return 0.0
    log_a = math.log(a)
    logs = [i * log_a - math.lgamma(i + 1) for i in range(n + 1)]
    top = max(logs)
    total = math.fsum(math.exp(t - top) for t in logs)
    return math.exp(logs[n] - top - math.log(total))


def served_prob(a: float, n: int) -> float:
    """Probability that an arriving user finds a free session slot."""
    return 1.0 - erlang_b(a, n)
