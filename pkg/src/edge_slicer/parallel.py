"""Thread-count policy shared by the sweep runner and the simulator."""
from __future__ import annotations

import os

ENV_VAR = "EDGE_SLICER_THREADS"


def worker_count(default: int | None = None) -> int:
    raw = os.environ.get(ENV_VAR)
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"{ENV_VAR} must be a positive integer, got {raw!r}") from None
    return default if default is not None else min(8, os.cpu_count() or 1)
