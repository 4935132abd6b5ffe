"""Domain types for partitioning an edge node among service providers.

All resource quantities are integers in per-resource base units (e.g.
millicores, MB).  A config file states capacities and demands in display
units; the loader multiplies by ``unit_scale`` and insists on integral
results.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path
from typing import Any, Sequence


class ConfigError(ValueError):
    """Invalid instance or config; ``path`` names the offending field."""

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class InfeasibleError(ValueError):
    """A session vector or allocation violates a capacity."""

    def __init__(self, message: str, resource: int | None = None):
        self.resource = resource
        super().__init__(message)


@dataclass(frozen=True)
class ResourceKind:
    id: int
    label: str
    unit_scale: int = 1

    def __post_init__(self):
        if self.id < 0:
            raise ConfigError("resource id must be non-negative", f"resources[{self.id}]")
        if int(self.unit_scale) != self.unit_scale or self.unit_scale < 1:
            raise ConfigError("unit_scale must be a positive integer", f"resources[{self.id}].unit_scale")


@dataclass(frozen=True)
class ResourcePool:
    capacities: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "capacities", tuple(int(c) for c in self.capacities))
        for r, c in enumerate(self.capacities):
            if c < 1:
                raise ConfigError("capacity must be >= 1 base unit", f"capacities[{r}]")

    @property
    def d(self) -> int:
        return len(self.capacities)


@dataclass(frozen=True)
class SpProfile:
    name: str
    lam: float
    mu: float
    demand: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "demand", tuple(int(z) for z in self.demand))
        if not (math.isfinite(self.lam) and self.lam > 0):
            raise ConfigError("lambda must be a positive finite rate", f"sps[{self.name}].lambda")
        if not (math.isfinite(self.mu) and self.mu > 0):
            raise ConfigError("mu must be a positive finite rate", f"sps[{self.name}].mu")
        for r, z in enumerate(self.demand):
            if z < 1:
                raise ConfigError("demand must be >= 1 base unit", f"sps[{self.name}].demand[{r}]")

    @property
    def load(self) -> float:
        """Offered load in erlangs."""
        return self.lam / self.mu


@dataclass(frozen=True)
class Instance:
    kinds: tuple[ResourceKind, ...]
    pool: ResourcePool
    sps: tuple[SpProfile, ...]
    epsilon: float = 0.01
    u_edge: float = 2.0
    u_cloud: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "kinds", tuple(self.kinds))
        object.__setattr__(self, "sps", tuple(self.sps))
        d = len(self.kinds)
        if [k.id for k in self.kinds] != list(range(d)):
            raise ConfigError("resource ids must be 0..d-1 without gaps", "resources")
        if self.pool.d != d:
            raise ConfigError(f"expected {d} capacities, got {self.pool.d}", "capacities")
        if not self.sps:
            raise ConfigError("at least one SP is required", "sps")
        for i, sp in enumerate(self.sps):
            if len(sp.demand) != d:
                raise ConfigError(f"expected {d} demands", f"sps[{i}].demand")
            for r, (z, k) in enumerate(zip(sp.demand, self.pool.capacities)):
                if z > k:
                    raise ConfigError("demand exceeds capacity", f"sps[{i}].demand[{r}]")
            if not math.isfinite(sp.load):
                raise ConfigError("offered load lambda/mu is not finite", f"sps[{i}]")
        if not 0 < self.epsilon < 1 / (1 + 2 * d):
            raise ConfigError(f"epsilon must lie in (0, {1 / (1 + 2 * d):.6g})", "epsilon")
        if not (self.u_edge > self.u_cloud > 0):
            raise ConfigError("need u_edge > u_cloud > 0", "u_edge")

    @property
    def d(self) -> int:
        return len(self.kinds)

    @property
    def P(self) -> int:
        return len(self.sps)

    @property
    def capacities(self) -> tuple[int, ...]:
        return self.pool.capacities

    @property
    def loads(self) -> tuple[float, ...]:
        return tuple(sp.load for sp in self.sps)

    def resource_index(self, key: str | int) -> int:
        if isinstance(key, int) or str(key).isdigit():
            idx = int(key)
            if idx < self.d:
                return idx
        for k in self.kinds:
            if k.label == key:
                return k.id
        raise KeyError(key)


@dataclass(frozen=True)
class Allocation:
    n: tuple[int, ...]
    theta: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...] = field(default=())

    @property
    def used(self) -> tuple[int, ...]:
        return tuple(sum(col) for col in zip(*self.theta)) if self.theta else ()

    @property
    def slack(self) -> tuple[int, ...]:
        """Capacity not assigned to any SP, per resource."""
        return tuple(k - u for k, u in zip(self.capacities, self.used))


def max_sessions(theta_p: Sequence[int], demand_p: Sequence[int]) -> int:
    """Largest session count whose demand fits inside ``theta_p``."""
    if any(z <= 0 for z in demand_p):
        raise ConfigError("demand components must be >= 1")
    return min(int(t) // int(z) for t, z in zip(theta_p, demand_p))


def full_pool_sessions(instance: Instance, p: int) -> int:
    if not 0 <= p < instance.P:
        raise IndexError(f"SP index {p} out of range 0..{instance.P - 1}")
    return max_sessions(instance.capacities, instance.sps[p].demand)


def session_caps(instance: Instance) -> tuple[int, ...]:
    return tuple(full_pool_sessions(instance, p) for p in range(instance.P))


def usage(instance: Instance, n: Sequence[int]) -> tuple[int, ...]:
    return tuple(
        sum(n_p * sp.demand[r] for n_p, sp in zip(n, instance.sps)) for r in range(instance.d)
    )


def check_feasible(instance: Instance, n: Sequence[int]) -> None:
    if len(n) != instance.P:
        raise ValueError(f"expected {instance.P} session counts, got {len(n)}")
    if any(int(x) != x or x < 0 for x in n):
        raise ValueError("session counts must be non-negative integers")
    for r, (u, k) in enumerate(zip(usage(instance, n), instance.capacities)):
        if u > k:
            label = instance.kinds[r].label
            raise InfeasibleError(f"resource {r} ({label}) over capacity: {u} > {k}", resource=r)


def is_feasible(instance: Instance, n: Sequence[int]) -> bool:
    return all(u <= k for u, k in zip(usage(instance, n), instance.capacities))


def theta_from_n(instance: Instance, n: Sequence[int]) -> Allocation:
    check_feasible(instance, n)
    theta = tuple(tuple(int(n_p) * z for z in sp.demand) for n_p, sp in zip(n, instance.sps))
    return Allocation(tuple(int(x) for x in n), theta, instance.capacities)


def weights(instance: Instance) -> tuple[float, ...]:
    """Probability that an arriving user belongs to each SP."""
    total = math.fsum(sp.lam for sp in instance.sps)
    return tuple(sp.lam / total for sp in instance.sps)


def utilization(instance: Instance, n: Sequence[int]) -> tuple[float, ...]:
    return tuple(u / k for u, k in zip(usage(instance, n), instance.capacities))


# -- config loading -------------------------------------------------------

def _to_base_units(value: Any, scale: int, path: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float, Decimal, str)):
        raise ConfigError("expected a number", path)
    scaled = Decimal(str(value)) * scale
    if scaled != scaled.to_integral_value():
        raise ConfigError(f"{value} x unit_scale {scale} is not an integral base-unit count", path)
    return int(scaled)


def _require(obj: dict, key: str, path: str) -> Any:
    if not isinstance(obj, dict) or key not in obj:
        raise ConfigError("missing field", f"{path}.{key}" if path else key)
    return obj[key]


def instance_from_dict(cfg: dict) -> Instance:
    """Build an Instance from the JSON config layout (display units)."""
    resources = _require(cfg, "resources", "")
    if not isinstance(resources, list) or not resources:
        raise ConfigError("expected a non-empty list", "resources")
    kinds = []
    for i, res in enumerate(resources):
        label = str(_require(res, "label", f"resources[{i}]"))
        scale = res.get("unit_scale", 1)
        if isinstance(scale, bool) or Decimal(str(scale)) != int(Decimal(str(scale))) or int(Decimal(str(scale))) < 1:
            raise ConfigError("unit_scale must be a positive integer", f"resources[{i}].unit_scale")
        kinds.append(ResourceKind(i, label, int(Decimal(str(scale)))))

    caps = _require(cfg, "capacities", "")
    if not isinstance(caps, list) or len(caps) != len(kinds):
        raise ConfigError(f"expected a list of {len(kinds)} capacities", "capacities")
    capacities = tuple(
        _to_base_units(c, k.unit_scale, f"capacities[{i}]") for i, (c, k) in enumerate(zip(caps, kinds))
    )
    for i, c in enumerate(capacities):
        if c < 1:
            raise ConfigError("zero-capacity resource", f"capacities[{i}]")

    raw_sps = _require(cfg, "sps", "")
    if not isinstance(raw_sps, list) or not raw_sps:
        raise ConfigError("expected a non-empty list", "sps")
    sps = []
    for i, sp in enumerate(raw_sps):
        base = f"sps[{i}]"
        dem = _require(sp, "demand", base)
        if not isinstance(dem, list) or len(dem) != len(kinds):
            raise ConfigError(f"expected a list of {len(kinds)} demands", f"{base}.demand")
        demand = tuple(
            _to_base_units(z, k.unit_scale, f"{base}.demand[{r}]") for r, (z, k) in enumerate(zip(dem, kinds))
        )
        for r, z in enumerate(demand):
            if z < 1:
                raise ConfigError("demand must be positive", f"{base}.demand[{r}]")
        try:
            lam = float(_require(sp, "lambda", base))
            mu = float(_require(sp, "mu", base))
        except (TypeError, ValueError):
            raise ConfigError("rates must be numbers", base) from None
        if not (math.isfinite(lam) and lam > 0):
            raise ConfigError("must be positive", f"{base}.lambda")
        if not (math.isfinite(mu) and mu > 0):
            raise ConfigError("must be positive", f"{base}.mu")
        sps.append(SpProfile(str(sp.get("name", f"sp{i + 1}")), lam, mu, demand))

    try:
        epsilon = float(_require(cfg, "epsilon", ""))
        u_edge = float(_require(cfg, "u_edge", ""))
        u_cloud = float(_require(cfg, "u_cloud", ""))
    except (TypeError, ValueError):
        raise ConfigError("epsilon/u_edge/u_cloud must be numbers") from None
    return Instance(tuple(kinds), ResourcePool(capacities), tuple(sps), epsilon, u_edge, u_cloud)


def read_config(path: str | Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            return json.load(fh, parse_float=Decimal)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", str(path)) from None


def load_instance(path: str | Path) -> Instance:
    return instance_from_dict(read_config(path))
