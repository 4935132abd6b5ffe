"""Golden sweep outputs for regression checks.

    python -m edge_slicer.goldens check        # compare against goldens/
    python -m edge_slicer.goldens regenerate   # rewrite goldens/ (clean tree only)
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import subprocess
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .model import read_config
from .sweep import SweepSpec, parse_values, run_sweep, to_csv

ROOT = Path(__file__).resolve().parents[2]
GOLDEN_DIR = ROOT / "goldens"
CONFIG = "configs/g4dn_two_sp.json"
NUMERIC_TOL = 1e-9
VOLATILE = {"wall_time_ms"}


@dataclass(frozen=True)
class GoldenCase:
    name: str
    config: str
    args: tuple[str, ...]
    output: str
    digest: str = ""
    tolerance: str = f"numeric columns abs {NUMERIC_TOL:g}; wall_time_ms ignored; others exact"

    @property
    def command(self) -> str:
        return " ".join(["edge-slicer", "sweep", "--config", self.config, *self.args, "--no-timing"])


CASES = (
    GoldenCase("lambda1", CONFIG,
               ("--param", "sps[0].lambda", "--values", "1:41:1", "--algos", "stream,prop,exact"),
               "lambda1.csv"),
    GoldenCase("lambda_heat", CONFIG,
               ("--param", "sps[0].lambda", "--values", "5:45:5",
                "--param2", "sps[1].lambda", "--values2", "5:45:5", "--algos", "stream"),
               "lambda_heat.csv"),
    GoldenCase("z1_cpu", CONFIG,
               ("--param", "sps[0].demand[cpu]", "--values", "1:9:1", "--algos", "stream,prop"),
               "z1_cpu.csv"),
    GoldenCase("zcpu_heat", CONFIG,
               ("--param", "sps[0].demand[cpu]", "--values", "1:9:1",
                "--param2", "sps[1].demand[cpu]", "--values2", "1:9:1", "--algos", "stream"),
               "zcpu_heat.csv"),
)


def _arg(args: tuple[str, ...], flag: str) -> str | None:
    return args[args.index(flag) + 1] if flag in args else None


def render(case: GoldenCase, root: Path = ROOT, threads: int | None = None) -> str:
    cfg = read_config(root / case.config)
    a = case.args
    spec = SweepSpec(
        _arg(a, "--param"),
        tuple(parse_values(_arg(a, "--values"))),
        _arg(a, "--param2"),
        tuple(parse_values(_arg(a, "--values2"))) if _arg(a, "--param2") else (),
        tuple(_arg(a, "--algos").split(",")),
    )
    header, rows = run_sweep(cfg, spec, timing=False, threads=threads)
    return to_csv(header, rows)


def compare_csv(expected: str, actual: str, tol: float = NUMERIC_TOL) -> list[str]:
    """Per-column drift report; empty when the tables agree."""
    exp = list(csv.reader(io.StringIO(expected)))
    act = list(csv.reader(io.StringIO(actual)))
    if not exp or not act or exp[0] != act[0]:
        return ["header mismatch"]
    if len(exp) != len(act):
        return [f"row count {len(act) - 1} != {len(exp) - 1}"]
    header = exp[0]
    drift: dict[str, float] = {}
    for e_row, a_row in zip(exp[1:], act[1:]):
        for col, e, a in zip(header, e_row, a_row):
            if col in VOLATILE or e == a:
                continue
            try:
                diff = abs(float(e) - float(a))
            except ValueError:
                drift[col] = float("inf")
                continue
            if diff > tol:
                drift[col] = max(drift.get(col, 0.0), diff)
    return [f"{col}: max drift {d:.3g}" for col, d in drift.items()]


def check(root: Path = ROOT, threads: int | None = None) -> dict[str, list[str]]:
    return {
        case.name: compare_csv((root / "goldens" / case.output).read_text(), render(case, root, threads))
        for case in CASES
    }


def _tree_dirty(path: Path) -> bool:
    try:
        out = subprocess.run(["git", "status", "--porcelain", "--", str(path)],
                             cwd=path.parent, capture_output=True, text=True, check=True)
    except (OSError, subprocess.CalledProcessError):
        return False
    return bool(out.stdout.strip())


def regenerate_goldens(root: Path = ROOT, allow_dirty: bool = False) -> list[GoldenCase]:
    out_dir = root / "goldens"
    if not allow_dirty and out_dir.exists() and _tree_dirty(out_dir):
        raise RuntimeError("goldens/ has uncommitted changes; pass --allow-dirty to overwrite")
    out_dir.mkdir(exist_ok=True)
    written = []
    for case in CASES:
        text = render(case, root)
        (out_dir / case.output).write_text(text)
        digest = hashlib.sha256(text.encode()).hexdigest()
        written.append(GoldenCase(case.name, case.config, case.args, case.output, digest))
    manifest = [dict(asdict(c), args=list(c.args), command=c.command) for c in written]
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="python -m edge_slicer.goldens")
    parser.add_argument("action", choices=("check", "regenerate"))
    parser.add_argument("--allow-dirty", action="store_true")
    args = parser.parse_args(argv)
    if args.action == "regenerate":
        try:
            cases = regenerate_goldens(allow_dirty=args.allow_dirty)
        except RuntimeError as exc:
            print(exc, file=sys.stderr)
            return 1
        for c in cases:
            print(f"{c.output}  {c.digest[:16]}")
        return 0
    report = check()
    bad = False
    for name, problems in report.items():
        print(f"{name}: {'ok' if not problems else 'DRIFT'}")
        for line in problems:
            print(f"  {line}")
        bad = bad or bool(problems)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
