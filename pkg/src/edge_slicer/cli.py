"""Command-line entry point: ``edge-slicer {solve,sweep,simulate,verify,erlang}``.

Exit codes: 0 success, 1 verification failed, 2 config error,
3 infeasible input or exhausted oracle budget.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from typing import Sequence

from .erlang import erlang_b
from .exact import CapacityExceeded, solve_exact_erlang
from .model import (
    ConfigError,
    InfeasibleError,
    Instance,
    ResourcePool,
    read_config,
    instance_from_dict,
    theta_from_n,
    utilization,
)
from .objective import GainEvaluator, eval_f
from .simulate import SimConfig, simulate
from .streaming import ItemOrder, solve_stream
from .sweep import (
    ALGORITHMS,
    OracleBudgetError,
    SweepSpec,
    parse_values,
    result_row,
    row_columns,
    run_sweep,
    solve,
    to_csv,
)

EXIT_FAIL, EXIT_CONFIG, EXIT_INFEASIBLE = 1, 2, 3


def _round12(obj):
    if isinstance(obj, float):
        return float(format(obj, ".12g"))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _dump_json(payload) -> str:
    return json.dumps(_round12(payload), indent=2) + "\n"


def solution_payload(instance: Instance, algo: str, n, extras: dict) -> dict:
    ev = GainEvaluator(instance)
    alloc = theta_from_n(instance, n)
    val = eval_f(instance, n, ev)
    payload = {
        "algo": algo,
        "n": list(n),
        "theta": [list(row) for row in alloc.theta],
        "f": val.f,
        "per_sp_f": list(val.per_sp),
        "per_sp_blocking": [ev.blocking(p, k) for p, k in enumerate(n)],
        "utilization": list(utilization(instance, n)),
        "slack": list(alloc.slack),
        "expected_utility": (instance.u_edge - instance.u_cloud) * val.f + instance.u_cloud,
    }
    if algo == "stream":
        payload["threshold_used"] = extras.get("threshold_used")
    payload.update({k: v for k, v in extras.items() if k not in payload})
    return payload


def _cmd_solve(args) -> int:
    inst = instance_from_dict(read_config(args.config))
    res = solve(inst, args.algo, ItemOrder.parse(args.order), args.alpha, args.budget)
    if args.format == "csv":
        _emit(to_csv(row_columns(inst), [result_row(inst, res)]), args.out)
    else:
        _emit(_dump_json(solution_payload(inst, res.algo, res.n, res.extras)), args.out)
    return 0


def _cmd_sweep(args) -> int:
    cfg = read_config(args.config)
    algos = tuple(a for a in args.algos.split(",") if a.strip()) if args.algos else ()
    spec = SweepSpec(
        args.param,
        tuple(parse_values(args.values)),
        args.param2,
        tuple(parse_values(args.values2)) if args.param2 else (),
        algos,
    )
    header, rows = run_sweep(cfg, spec, ItemOrder.parse(args.order), args.alpha, timing=not args.no_timing)
    if args.format == "csv":
        _emit(to_csv(header, rows), args.out)
    else:
        _emit(_dump_json([dict(zip(header, r)) for r in rows]), args.out)
    return 0


def _cmd_simulate(args) -> int:
    inst = instance_from_dict(read_config(args.config))
    try:
        n = tuple(int(x) for x in args.n.split(","))
    except ValueError:
        raise ConfigError("expected comma-separated integers", "--n") from None
    cfg = SimConfig(args.horizon, args.warmup, args.seed, args.replications, args.batches, args.holding)
    report = simulate(inst, n, cfg)
    payload = report.to_dict(inst)
    payload["n"] = list(n)
    payload["analytic_B"] = [GainEvaluator(inst).blocking(p, k) for p, k in enumerate(n)]
    _emit(_dump_json(payload), args.out)
    return 0


def scaled_instance(instance: Instance, scale: int) -> Instance:
    caps = tuple(k // scale for k in instance.capacities)
    return dataclasses.replace(instance, pool=ResourcePool(caps))


def verify(instance: Instance, scale: int = 1, order: ItemOrder = ItemOrder(), budget: int = 10_000_000) -> dict:
    """Stream vs exact optimum on a capacity-scaled replica."""
    if scale < 1:
        raise ConfigError("scale must be >= 1", "--scale")
    small = scaled_instance(instance, scale)
    exact = solve_exact_erlang(small, budget)
    if not exact.proven_optimal:
        raise OracleBudgetError(f"exact oracle exhausted its budget of {budget} nodes")
    stream = solve_stream(small, order)
    ratio = 1 / (1 + 2 * small.d) - small.epsilon
    bound = ratio * exact.objective
    return {
        "scale": scale,
        "capacities": list(small.capacities),
        "OPT": exact.objective,
        "n_opt": list(exact.n),
        "f_stream": stream.f.f,
        "n_stream": list(stream.n),
        "bound": bound,
        "pass": stream.f.f >= bound,
    }


def _cmd_verify(args) -> int:
    inst = instance_from_dict(read_config(args.config))
    report = verify(inst, args.scale, ItemOrder.parse(args.order), args.budget)
    if args.format == "json":
        _emit(_dump_json(report), args.out)
    else:
        lines = [f"OPT={report['OPT']:.12g}", f"f_stream={report['f_stream']:.12g}",
                 f"bound={report['bound']:.12g}", "PASS" if report["pass"] else "FAIL"]
        _emit("\n".join(lines) + "\n", args.out)
    return 0 if report["pass"] else EXIT_FAIL


def _cmd_erlang(args) -> int:
    if args.n < 0:
        raise ConfigError("server count must be >= 0", "--n")
    if args.a < 0:
        raise ConfigError("offered load must be >= 0", "--a")
    _emit(format(erlang_b(args.a, args.n), ".12g") + "\n", args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="edge-slicer", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--config", required=True, help="instance JSON config")
        p.add_argument("--out", default="-", help="output path, '-' for stdout")
        p.add_argument("--format", choices=("csv", "json"), default=fmt_default)
        p.add_argument("--order", default="round-robin",
                       help="round-robin | sequential | seeded:<u64>")

    p = sub.add_parser("solve", help="solve one instance")
    common(p)
    p.add_argument("--algo", choices=ALGORITHMS, default="stream")
    p.add_argument("--alpha", type=float, default=1.0, help="greedy coefficient in (0, 1]")
    p.add_argument("--budget", type=int, default=10_000_000, help="exact search node budget")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("sweep", help="1-D or 2-D parameter sweep")
    common(p, "csv")
    p.add_argument("--param", required=True, help="config path, e.g. sps[0].lambda")
    p.add_argument("--values", required=True, help="list 'a,b,c' or range 'start:stop:step'")
    p.add_argument("--param2")
    p.add_argument("--values2")
    p.add_argument("--algos", "--algo", default="stream,prop", help="comma-separated subset of " + ",".join(ALGORITHMS))
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--no-timing", action="store_true", help="write 0 in wall_time_ms for byte-stable output")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("simulate", help="Monte Carlo loss-system simulation")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--n", required=True, help="sessions per SP, e.g. 76,4")
    p.add_argument("--horizon", type=float, default=1e5)
    p.add_argument("--warmup", type=float, default=0.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--replications", type=int, default=1)
    p.add_argument("--batches", type=int, default=20)
    p.add_argument("--holding", choices=("exponential", "deterministic"), default="exponential")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="check the streaming guarantee against the exact optimum")
    common(p, "csv")
    p.add_argument("--scale", type=int, default=4, help="divide capacities by this factor")
    p.add_argument("--budget", type=int, default=10_000_000)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("erlang", help="print the Erlang-B blocking probability")
    p.add_argument("--a", type=float, required=True, help="offered load (erlangs)")
    p.add_argument("--n", type=int, required=True, help="servers")
    p.add_argument("--out", default="-")
    p.set_defaults(func=_cmd_erlang)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (InfeasibleError, CapacityExceeded, OracleBudgetError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
