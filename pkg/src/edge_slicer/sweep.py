"""Parameter sweeps over a JSON config, emitted as long-format CSV rows."""
from __future__ import annotations

import copy
import csv
import io
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Any, Sequence

from .baselines import HeuristicParams, greedy_heuristic, proportional_allocation
from .exact import solve_exact_erlang, solve_mdkp_linear
from .model import ConfigError, Instance, instance_from_dict, utilization
from .objective import GainEvaluator, eval_f
from .parallel import worker_count
from .streaming import ROUND_ROBIN, ItemOrder, solve_stream

ALGORITHMS = ("stream", "exact", "mdkp", "prop", "greedy")


class OracleBudgetError(RuntimeError):
    pass


def fmt(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".12g")
    if isinstance(x, Decimal):
        return format(x.normalize(), "f")
    return str(x)


# -- config paths ---------------------------------------------------------

_SEGMENT = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)((?:\[[^\]]+\])*)$")


def _index(container: list, key: str, cfg: dict, field: str, shown: str) -> int:
    if key.lstrip("-").isdigit():
        i = int(key)
        if 0 <= i < len(container):
            return i
        raise ConfigError("index out of range", shown)
    if field in ("demand", "capacities"):
        labels = [r.get("label") for r in cfg.get("resources", [])]
        if key in labels:
            return labels.index(key)
    if field == "sps":
        names = [sp.get("name") for sp in container]
        if key in names:
            return names.index(key)
    raise ConfigError(f"cannot resolve [{key}]", shown)


def set_path(cfg: dict, path: str, value: Any) -> None:
    """Assign ``value`` at a dotted path such as ``sps[0].demand[cpu]``."""
    node: Any = cfg
    segments = path.split(".")
    for pos, seg in enumerate(segments):
        m = _SEGMENT.match(seg)
        if not m:
            raise ConfigError("malformed path segment", seg)
        name, idx_part = m.group(1), m.group(2)
        keys = re.findall(r"\[([^\]]+)\]", idx_part)
        last = pos == len(segments) - 1
        if not isinstance(node, dict) or name not in node:
            raise ConfigError("unknown field", seg)
        if not keys:
            if last:
                node[name] = value
                return
            node = node[name]
            continue
        container = node[name]
        for k_pos, key in enumerate(keys):
            if not isinstance(container, list):
                raise ConfigError("not a list", seg)
            i = _index(container, key.strip(), cfg, name, seg)
            if last and k_pos == len(keys) - 1:
                container[i] = value
                return
            if k_pos == len(keys) - 1:
                node = container[i]
            else:
                container = container[i]
    raise ConfigError("path does not end at a value", path)


def parse_values(text: str) -> list[Decimal]:
    """``"5,10,20"`` or ``"start:stop:step"`` (stop excluded)."""
    try:
        if ":" in text:
            parts = [Decimal(s) for s in text.split(":")]
            if len(parts) != 3 or parts[2] <= 0:
                raise ConfigError("range must be start:stop:step with step > 0", text)
            start, stop, step = parts
            out, i = [], 0
            while start + i * step < stop:
                out.append(start + i * step)
                i += 1
        else:
            out = [Decimal(s) for s in text.split(",") if s.strip()]
    except InvalidOperation:
        raise ConfigError("not a number list or range", text) from None
    if not out:
        raise ConfigError("empty value set", text)
    return out


@dataclass(frozen=True)
class SweepSpec:
    param: str
    values: tuple[Decimal, ...]
    param2: str | None = None
    values2: tuple[Decimal, ...] = ()
    algorithms: tuple[str, ...] = ("stream", "prop")

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("no algorithms selected", "algorithms")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}", "algorithms")
        if not self.values or (self.param2 and not self.values2):
            raise ConfigError("empty value set", "values")

    def grid(self) -> list[tuple[Decimal, Decimal | None]]:
        if self.param2 is None:
            return [(v, None) for v in self.values]
        return [(v1, v2) for v1 in self.values for v2 in self.values2]


# -- solving ----------------------------------------------------------------

@dataclass(frozen=True)
class SolveResult:
    algo: str
    n: tuple[int, ...]
    extras: dict


def solve(
    instance: Instance,
    algo: str,
    order: ItemOrder = ROUND_ROBIN,
    alpha: float = 1.0,
    budget: int = 10_000_000,
) -> SolveResult:
    if algo == "stream":
        s = solve_stream(instance, order)
        return SolveResult(algo, s.n, {"threshold_used": s.threshold_used, "order": str(order),
                                       "items_scanned": s.items_scanned})
    if algo == "exact":
        s = solve_exact_erlang(instance, budget)
        if not s.proven_optimal:
            raise OracleBudgetError(f"exact search budget of {budget} nodes exhausted")
        return SolveResult(algo, s.n, {"proven_optimal": True, "nodes_explored": s.nodes_explored})
    if algo == "mdkp":
        s = solve_mdkp_linear(instance)
        return SolveResult(algo, s.n, {"proven_optimal": s.proven_optimal, "linear_objective": s.objective})
    if algo == "prop":
        a = proportional_allocation(instance)
        return SolveResult(algo, a.n, {"theta": [list(row) for row in a.theta]})
    if algo == "greedy":
        s = greedy_heuristic(instance, HeuristicParams(alpha))
        return SolveResult(algo, s.n, {"proven_optimal": False, "alpha": alpha,
                                       "linear_objective": s.objective, "xi": "w_p (arrival-rate weights)"})
    raise ConfigError(f"unknown algorithm {algo!r}", "algo")


def row_columns(instance: Instance) -> list[str]:
    names = [sp.name for sp in instance.sps]
    labels = [k.label for k in instance.kinds]
    return (
        ["param1", "param2", "algo", "f"]
        + [f"f_{nm}" for nm in names]
        + [f"B_{nm}" for nm in names]
        + [f"util_{lb}" for lb in labels]
        + [f"n_{nm}" for nm in names]
        + ["wall_time_ms"]
    )


def result_row(instance: Instance, res: SolveResult, p1="", p2="", wall_ms: float = 0.0) -> list[str]:
    ev = GainEvaluator(instance)
    val = eval_f(instance, res.n, ev)
    blocking = [ev.blocking(p, n_p) for p, n_p in enumerate(res.n)]
    return (
        [fmt(p1), fmt(p2) if p2 is not None else "", res.algo, fmt(val.f)]
        + [fmt(x) for x in val.per_sp]
        + [fmt(b) for b in blocking]
        + [fmt(u) for u in utilization(instance, res.n)]
        + [str(x) for x in res.n]
        + [fmt(round(wall_ms, 3))]
    )


def run_sweep(
    cfg: dict,
    spec: SweepSpec,
    order: ItemOrder = ROUND_ROBIN,
    alpha: float = 1.0,
    timing: bool = True,
    threads: int | None = None,
) -> tuple[list[str], list[list[str]]]:
    """Evaluate every grid point x algorithm; rows come back in grid order."""
    base_inst = instance_from_dict(cfg)
    header = row_columns(base_inst)
    # resolve paths once up front so a bad path fails before any work
    probe = copy.deepcopy(cfg)
    set_path(probe, spec.param, spec.values[0])
    if spec.param2:
        set_path(probe, spec.param2, spec.values2[0])

    def point(p1, p2):
        local = copy.deepcopy(cfg)
        set_path(local, spec.param, p1)
        if spec.param2:
            set_path(local, spec.param2, p2)
        inst = instance_from_dict(local)
        rows = []
        for algo in spec.algorithms:
            t0 = time.perf_counter()
            res = solve(inst, algo, order, alpha)
            ms = (time.perf_counter() - t0) * 1000.0 if timing else 0.0
            rows.append(result_row(inst, res, p1, p2, ms))
        return rows

    grid = spec.grid()
    workers = threads if threads is not None else worker_count()
    if workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(lambda g: point(*g), grid))
    else:
        chunks = [point(*g) for g in grid]
    return header, [row for chunk in chunks for row in chunk]


def to_csv(header: Sequence[str], rows: Sequence[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()

