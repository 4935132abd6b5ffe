"""Monte Carlo check of the per-SP loss systems.

Each SP is an independent n_p-server loss system with Poisson arrivals and
i.i.d. holding times; an arrival that finds every server busy is blocked.
Random streams come from PCG64 generators spawned from one master seed,
one per (replication, SP), so results do not depend on how work is spread
over threads.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numba
import numpy as np

from .model import Instance, check_feasible, weights
from .parallel import worker_count

_CHUNK = 1 << 17
_Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    warmup: float = 0.0
    seed: int = 0
    replications: int = 1
    batches: int = 20
    holding: str = "exponential"

    def __post_init__(self):
        if not self.horizon > self.warmup >= 0:
            raise ValueError("need horizon > warmup >= 0")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.batches < 2:
            raise ValueError("need at least 2 batches")
        if self.holding not in ("exponential", "deterministic"):
            raise ValueError(f"unknown holding-time law {self.holding!r}")


@dataclass(frozen=True)
class SpStats:
    arrivals: int
    blocked: int
    blocking: float
    halfwidth: float


@dataclass(frozen=True)
class SimReport:
    per_sp: tuple[SpStats, ...]
    empirical_f: float
    # per_replication[r][p]
    per_replication: tuple[tuple[SpStats, ...], ...]

    def to_dict(self, instance: Instance | None = None) -> dict:
        names = [sp.name for sp in instance.sps] if instance else [str(i) for i in range(len(self.per_sp))]
        return {
            "empirical_f": self.empirical_f,
            "per_sp": [
                {"name": nm, "arrivals": s.arrivals, "blocked": s.blocked,
                 "empirical_B": s.blocking, "confidence_halfwidth": s.halfwidth}
                for nm, s in zip(names, self.per_sp)
            ],
            "replications": [
                [{"arrivals": s.arrivals, "blocked": s.blocked, "empirical_B": s.blocking,
                  "confidence_halfwidth": s.halfwidth} for s in rep]
                for rep in self.per_replication
            ],
        }


@numba.njit(cache=True, nogil=True)
def _loss_chunk(t0, gaps, holds, busy_until, warmup, horizon, batch_len, arr_b, blk_b):
    # Advances one loss system over a chunk of arrivals; returns the time of
    # the last arrival processed, or -1.0 once the horizon is passed.
    t = t0
    servers = busy_until.shape[0]
    nb = arr_b.shape[0]
    for k in range(gaps.shape[0]):
        t += gaps[k]
        if t >= horizon:
            return -1.0
        accepted = False
        if servers > 0:
            j = 0
            for s in range(1, servers):
                if busy_until[s] < busy_until[j]:
                    j = s
            if busy_until[j] <= t:
                busy_until[j] = t + holds[k]
                accepted = True
        if t >= warmup:
            b = int((t - warmup) / batch_len)
            if b >= nb:
                b = nb - 1
            arr_b[b] += 1
            if not accepted:
                blk_b[b] += 1
    return t


def _run_one(lam: float, mu: float, servers: int, cfg: SimConfig, seed_seq: np.random.SeedSequence) -> SpStats:
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    busy = np.zeros(servers)
    arr_b = np.zeros(cfg.batches, dtype=np.int64)
    blk_b = np.zeros(cfg.batches, dtype=np.int64)
    batch_len = (cfg.horizon - cfg.warmup) / cfg.batches
    t = 0.0
    while t >= 0.0:
        gaps = rng.exponential(1.0 / lam, _CHUNK)
        if cfg.holding == "exponential":
            holds = rng.exponential(1.0 / mu, _CHUNK)
        else:
            holds = np.full(_CHUNK, 1.0 / mu)
        t = _loss_chunk(t, gaps, holds, busy, cfg.warmup, cfg.horizon, batch_len, arr_b, blk_b)
    arrivals = int(arr_b.sum())
    blocked = int(blk_b.sum())
    est = blocked / arrivals if arrivals else 1.0
    # batch means for the interval; blocking events are serially correlated
    ok = arr_b > 0
    if ok.sum() >= 2:
        means = blk_b[ok] / arr_b[ok]
        half = _Z95 * float(np.std(means, ddof=1)) / math.sqrt(int(ok.sum()))
    else:
        half = float("inf")
    return SpStats(arrivals, blocked, est, half)


def _aggregate(reps: list[tuple[SpStats, ...]], p: int) -> SpStats:
    col = [rep[p] for rep in reps]
    arrivals = sum(s.arrivals for s in col)
    blocked = sum(s.blocked for s in col)
    if len(col) == 1:
        return col[0]
    vals = [s.blocking for s in col]
    mean = math.fsum(vals) / len(vals)
    var = math.fsum((v - mean) ** 2 for v in vals) / (len(vals) - 1)
    return SpStats(arrivals, blocked, mean, _Z95 * math.sqrt(var / len(vals)))


def simulate(instance: Instance, n: Sequence[int], cfg: SimConfig, threads: int | None = None) -> SimReport:
    check_feasible(instance, n)
    master = np.random.SeedSequence(cfg.seed)
    rep_seqs = master.spawn(cfg.replications)
    jobs = []
    for r, rs in enumerate(rep_seqs):
        for p, ss in enumerate(rs.spawn(instance.P)):
            jobs.append((r, p, ss))

    def work(job):
        r, p, ss = job
        sp = instance.sps[p]
        if n[p] == 0:
            # nothing can be admitted; still count the arrivals
            cnt = int(np.random.Generator(np.random.PCG64(ss)).poisson(sp.lam * (cfg.horizon - cfg.warmup)))
            return SpStats(cnt, cnt, 1.0, 0.0)
        return _run_one(sp.lam, sp.mu, int(n[p]), cfg, ss)

    workers = threads if threads is not None else worker_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(work, jobs))
    else:
        results = [work(j) for j in jobs]

    reps = [tuple(results[r * instance.P + p] for p in range(instance.P)) for r in range(cfg.replications)]
    per_sp = tuple(_aggregate(reps, p) for p in range(instance.P))
    w = weights(instance)
    f = math.fsum(wp * (1.0 - s.blocking) for wp, s in zip(w, per_sp))
    return SimReport(per_sp, f, tuple(reps))
