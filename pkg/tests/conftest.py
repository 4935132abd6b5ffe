from __future__ import annotations

import random
from pathlib import Path

import pytest

from edge_slicer.model import Instance, ResourceKind, ResourcePool, SpProfile, load_instance

ROOT = Path(__file__).resolve().parents[1]
REFERENCE_CONFIG = ROOT / "configs" / "g4dn_two_sp.json"


def make_instance(capacities, demands, lams, mus=None, epsilon=None, labels=None):
    d = len(capacities)
    labels = labels or [f"r{i}" for i in range(d)]
    mus = mus or [1.0] * len(lams)
    if epsilon is None:
        epsilon = 0.5 / (1 + 2 * d)
    kinds = tuple(ResourceKind(i, labels[i]) for i in range(d))
    sps = tuple(SpProfile(f"sp{p + 1}", float(l), float(m), tuple(z)) for p, (l, m, z) in enumerate(zip(lams, mus, demands)))
    return Instance(kinds, ResourcePool(tuple(capacities)), sps, epsilon, 2.0, 1.0)


def random_instance(rng: random.Random, max_p=3, max_d=2, max_items=20, max_k=20, load_range=(0.1, 10.0)):
    P = rng.randint(1, max_p)
    d = rng.randint(1, max_d)
    caps, demands = [], [[0] * d for _ in range(P)]
    for r in range(d):
        k = rng.randint(1, max_k)
        caps.append(k)
        for p in range(P):
            # at least ceil(k / max_items) so no SP fits more than max_items copies
            lo = max(1, -(-k // max_items))
            demands[p][r] = rng.randint(lo, k)
    lams = [rng.uniform(0.1, 10.0) for _ in range(P)]
    loads = [rng.uniform(*load_range) for _ in range(P)]
    mus = [lam / a for lam, a in zip(lams, loads)]
    eps = rng.uniform(0.001, 0.99) / (1 + 2 * d)
    return make_instance(caps, demands, lams, mus, eps)


@pytest.fixture(scope="session")
def reference_instance() -> Instance:
    return load_instance(REFERENCE_CONFIG)


@pytest.fixture
def tiny_instance() -> Instance:
    # P=2, d=1, K=3, z=(1,1), A=(1,1), w=(0.5,0.5)
    return make_instance([3], [[1], [1]], [1.0, 1.0], [1.0, 1.0], epsilon=0.05)


_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log() -> list[str]:
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
