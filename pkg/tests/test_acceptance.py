"""Acceptance criteria, one check per criterion at its stated tolerance.

Each ``criterion_*`` function returns (passed, detail).  Under pytest the
outcome is asserted and a summary line per criterion is printed at the end
of the run; ``python3 tests/test_acceptance.py`` prints the same lines.
"""
from __future__ import annotations

import functools
import math
import os
import random
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from conftest import REFERENCE_CONFIG, make_instance, random_instance  # noqa: E402
from oracles import brute_mdkp, enumerate_erlang  # noqa: E402

from edge_slicer.baselines import HeuristicParams, greedy_heuristic, proportional_allocation  # noqa: E402
from edge_slicer.erlang import erlang_b, erlang_b_direct  # noqa: E402
from edge_slicer.exact import solve_exact_erlang, solve_mdkp_linear  # noqa: E402
from edge_slicer.goldens import CASES, ROOT, compare_csv, render  # noqa: E402
from edge_slicer.model import instance_from_dict, is_feasible, read_config, session_caps, utilization, weights  # noqa: E402
from edge_slicer.objective import GainEvaluator, eval_f, marginal_gain  # noqa: E402
from edge_slicer.parallel import ENV_VAR  # noqa: E402
from edge_slicer.simulate import SimConfig, simulate  # noqa: E402
from edge_slicer.streaming import ROUND_ROBIN, SEQUENTIAL, ItemOrder, solve_stream  # noqa: E402
from edge_slicer.sweep import set_path  # noqa: E402

ORDERS = (ROUND_ROBIN, SEQUENTIAL, ItemOrder("seeded", 2024))


def criterion_1():
    t0 = time.perf_counter()
    worst = 0.0
    for a in (0.5, 2.0, 16.0, 20.0, 100.0):
        for n in range(501):
            rec, direct = erlang_b(a, n), erlang_b_direct(a, n)
            if rec != direct:
                worst = max(worst, abs(rec - direct) / max(abs(direct), 1e-300))
    b22 = erlang_b(2.0, 2)
    secs = time.perf_counter() - t0
    ok = worst <= 1e-10 and abs(b22 - 0.4) <= 1e-12 and secs < 1.0
    return ok, f"max rel err {worst:.2e}, B(2,2)={b22!r}, {secs:.2f}s"


def _random_erlang_instance(rng: random.Random):
    P = rng.randint(1, 4)
    d = rng.randint(1, 3)
    caps = [rng.randint(1, 150) for _ in range(d)]
    demands = [[rng.randint(1, k) for k in caps] for _ in range(P)]
    lams = [rng.uniform(0.1, 10.0) for _ in range(P)]
    loads = [rng.uniform(0.1, 50.0) for _ in range(P)]
    return make_instance(caps, demands, lams, [lam / a for lam, a in zip(lams, loads)])


def criterion_2():
    t0 = time.perf_counter()
    rng = random.Random(2)
    worst_gain, worst_increase, checked = 0.0, 0.0, 0
    for _ in range(200):
        inst = _random_erlang_instance(rng)
        ev = GainEvaluator(inst)
        caps = session_caps(inst)
        for p in range(inst.P):
            prev = math.inf
            for k in range(caps[p]):
                n = [rng.randint(0, c) for c in caps]
                n[p] = k
                g = marginal_gain(inst, n, p, ev)
                worst_gain = min(worst_gain, g)
                worst_increase = max(worst_increase, g - prev)
                prev = g
                checked += 1
    secs = time.perf_counter() - t0
    ok = worst_gain >= -1e-12 and worst_increase <= 1e-12 and secs < 5.0
    return ok, f"{checked} gains, min gain {worst_gain:.2e}, max increase {worst_increase:.2e}, {secs:.2f}s"


def criterion_3():
    t0 = time.perf_counter()
    rng = random.Random(3)
    violations, runs, tightest = 0, 0, math.inf
    for _ in range(100):
        inst = random_instance(rng, max_p=3, max_d=2, max_items=20, max_k=20)
        _, opt, _ = enumerate_erlang(inst.loads, [sp.lam for sp in inst.sps], inst.capacities,
                                     [sp.demand for sp in inst.sps])
        bound = (1 / (1 + 2 * inst.d) - inst.epsilon) * opt
        for order in ORDERS:
            sol = solve_stream(inst, order)
            runs += 1
            if not is_feasible(inst, sol.n) or sol.f.f < bound:
                violations += 1
            if opt > 0:
                tightest = min(tightest, sol.f.f / opt)
    secs = time.perf_counter() - t0
    ok = violations == 0 and secs < 30.0
    return ok, f"{violations} violations in {runs} runs, worst f/OPT {tightest:.4f}, {secs:.2f}s"


@functools.lru_cache(maxsize=None)
def _lambda_sweep():
    t0 = time.perf_counter()
    base = read_config(REFERENCE_CONFIG)
    rows = []
    for lam in range(1, 41):
        cfg = dict(base, sps=[dict(sp, demand=list(sp["demand"])) for sp in base["sps"]])
        set_path(cfg, "sps[0].lambda", lam)
        inst = instance_from_dict(cfg)
        ev = GainEvaluator(inst)
        stream = solve_stream(inst)
        prop = proportional_allocation(inst)
        rows.append({
            "lambda1": lam,
            "f_stream": eval_f(inst, stream.n, ev).f,
            "f_prop": eval_f(inst, prop.n, ev).f,
            "n_stream": stream.n,
            "util": utilization(inst, stream.n),
            "B1": ev.blocking(0, stream.n[0]),
        })
    return rows, time.perf_counter() - t0


def criterion_4a():
    rows, secs = _lambda_sweep()
    losing = [r["lambda1"] for r in rows if r["f_stream"] < r["f_prop"]]
    worst = max((r["f_prop"] - r["f_stream"] for r in rows), default=0.0)
    ok = not losing and secs < 10.0
    return ok, f"f_stream < f_prop at lambda1 in {losing or 'none'} (largest gap {worst:.3e}), {secs:.2f}s"


def criterion_4b():
    rows, secs = _lambda_sweep()
    r = next(r for r in rows if r["lambda1"] == 20)
    cpu, ram = r["util"]
    ok = cpu >= 0.99 and ram < 0.20 and secs < 10.0
    return ok, f"lambda1=20: n={r['n_stream']}, cpu {cpu:.4f} (need >= 0.99), ram {ram:.4f} (need < 0.20)"


def criterion_4c():
    rows, secs = _lambda_sweep()
    drops = [(a["lambda1"], b["lambda1"]) for a, b in zip(rows, rows[1:]) if b["B1"] < a["B1"]]
    ok = not drops and secs < 10.0
    shown = drops[:5] + (["..."] if len(drops) > 5 else [])
    return ok, f"B_1 decreases on {len(drops)} of 39 steps {shown}"


def _lattice_instance(rng: random.Random):
    # aim each SP's session cap so the lattice spans 10..10^5 points
    P, d = rng.randint(1, 4), rng.randint(1, 3)
    per_sp = 10 ** (rng.uniform(1, 5) / P)
    caps = [rng.randint(50, 5000) for _ in range(d)]
    demands = [[max(1, int(k / (per_sp * rng.uniform(0.8, 2.5)))) for k in caps] for _ in range(P)]
    lams = [rng.uniform(0.1, 10.0) for _ in range(P)]
    loads = [rng.uniform(0.1, 50.0) for _ in range(P)]
    return make_instance(caps, demands, lams, [lam / a for lam, a in zip(lams, loads)])


def criterion_5():
    t0 = time.perf_counter()
    rng = random.Random(5)
    mismatches, cases, largest = 0, 0, 0
    while cases < 100:
        inst = _lattice_instance(rng)
        lattice = math.prod(c + 1 for c in session_caps(inst))
        if lattice > 10**5:
            continue
        cases += 1
        largest = max(largest, lattice)
        sol = solve_exact_erlang(inst)
        ref_n, ref_f, _ = enumerate_erlang(inst.loads, [sp.lam for sp in inst.sps], inst.capacities,
                                           [sp.demand for sp in inst.sps])
        if not sol.proven_optimal or sol.n != ref_n or sol.objective != ref_f:
            mismatches += 1
    secs = time.perf_counter() - t0
    ok = mismatches == 0 and secs < 60.0
    return ok, f"{mismatches} mismatches in {cases} cases (largest lattice {largest}), {secs:.2f}s"


def criterion_6():
    t0 = time.perf_counter()
    rng = random.Random(6)
    dp_bad, greedy_bad = 0, 0
    for _ in range(100):
        P, d = rng.randint(1, 3), rng.randint(1, 2)
        caps = [rng.randint(4, 12) for _ in range(d)]
        demands = [[rng.randint(1, 4) for _ in range(d)] for _ in range(P)]
        lams = [rng.uniform(0.1, 10.0) for _ in range(P)]
        inst = make_instance(caps, demands, lams)
        w = weights(inst)
        dp = solve_mdkp_linear(inst)
        best, _ = brute_mdkp(caps, demands, w)
        if not is_feasible(inst, dp.n) or abs(dp.objective - best) > 1e-12:
            dp_bad += 1
        for alpha in (1.0, 0.5, 0.1):
            g = greedy_heuristic(inst, HeuristicParams(alpha))
            if not is_feasible(inst, g.n) or g.objective > dp.objective + 1e-12:
                greedy_bad += 1
    secs = time.perf_counter() - t0
    ok = dp_bad == 0 and greedy_bad == 0 and secs < 30.0
    return ok, f"DP mismatches {dp_bad}/100, greedy above DP {greedy_bad}/300, {secs:.2f}s"


def criterion_7():
    t0 = time.perf_counter()
    inst = make_instance([10], [[1]], [2.0], [1.0])
    cfg = SimConfig(1e6, seed=7, replications=10)
    one = simulate(inst, (2,), cfg, threads=1)
    eight = simulate(inst, (2,), cfg, threads=8)
    hits = sum(abs(rep[0].blocking - 0.4) <= 0.005 for rep in one.per_replication)
    worst = max(abs(rep[0].blocking - 0.4) for rep in one.per_replication)
    same = one == eight
    secs = time.perf_counter() - t0
    ok = hits >= 9 and same and secs < 60.0
    return ok, f"{hits}/10 replications within 0.005 (worst {worst:.4f}), threads 1 vs 8 identical: {same}, {secs:.2f}s"


def _render_all(threads_env: str) -> dict[str, str]:
    old = os.environ.get(ENV_VAR)
    os.environ[ENV_VAR] = threads_env
    try:
        return {c.name: render(c) for c in CASES}
    finally:
        if old is None:
            os.environ.pop(ENV_VAR, None)
        else:
            os.environ[ENV_VAR] = old


def criterion_8():
    golden = {c.name: (ROOT / "goldens" / c.output).read_text() for c in CASES}
    runs = {"threads=1": _render_all("1"), "threads=8": _render_all("8"), "threads=8 again": _render_all("8")}
    problems = []
    for label, outputs in runs.items():
        for name, text in outputs.items():
            problems += [f"{label} {name} {p}" for p in compare_csv(golden[name], text)]
    identical = runs["threads=8"] == runs["threads=8 again"] == runs["threads=1"]
    ok = not problems and identical
    detail = "all goldens match" if not problems else "; ".join(problems[:4])
    return ok, f"{detail}; consecutive and cross-thread runs byte-identical: {identical}"


CRITERIA = {
    "1 erlang cross-check": criterion_1,
    "2 monotone and submodular gains": criterion_2,
    "3 streaming approximation bound": criterion_3,
    "4a stream >= prop for lambda1 in 1..40": criterion_4a,
    "4b lambda1=20 cpu >= 0.99 and ram < 0.20": criterion_4b,
    "4c B_1 non-decreasing in lambda1": criterion_4c,
    "5 branch and bound equals enumeration": criterion_5,
    "6 MDKP DP equals brute force, greedy <= DP": criterion_6,
    "7 simulation matches Erlang-B": criterion_7,
    "8 golden determinism": criterion_8,
}


def _line(name: str, ok: bool, detail: str) -> str:
    return f"[{'PASS' if ok else 'FAIL'}] criterion {name}: {detail}"


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, acceptance_log):
    ok, detail = CRITERIA[name]()
    line = _line(name, ok, detail)
    acceptance_log.append(line)
    print(line)
    assert ok, line


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA.items():
        ok, detail = fn()
        failed += not ok
        print(_line(name, ok, detail), flush=True)
    sys.exit(1 if failed else 0)
