"""Seeded request-stream generation.

All randomness in a scenario is derived from one base seed through named
substreams (:func:`derive_seed` / :func:`substream`), so the arrival trace,
service choices, execution-time draws, and controller draws never perturb
each other: strategies can be A/B compared on bit-identical workloads.
"""
from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass
from typing import Sequence

from .errors import ConfigError
from .queueing import ServiceSpec

__all__ = [
    "JitterSpec",
    "RequestEvent",
    "derive_seed",
    "substream",
    "poisson_stream",
    "with_jitters",
    "sample_service",
    "exponential_exec_time",
    "make_catalog",
    "generate_requests",
]


def derive_seed(seed: int, *names: object) -> int:
    """Derive an independent child seed from a base seed and a name path."""
    material = "|".join([str(seed), *map(str, names)])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def substream(seed: int, *names: object) -> random.Random:
    """Named random substream, independent of all other names."""
    return random.Random(derive_seed(seed, *names))


@dataclass(frozen=True)
class JitterSpec:
    """A burst window: the arrival rate is multiplied inside [start, start+duration)."""

    start: float  # seconds
    duration: float  # seconds
    rate_multiplier: float

    def __post_init__(self) -> None:
        if self.duration <= 0:
            raise ConfigError("jitter duration must be > 0")
        if self.rate_multiplier < 0:
            raise ConfigError("jitter rate_multiplier must be >= 0")
        if self.start < 0:
            raise ConfigError("jitter start must be >= 0")

    @property
    def end(self) -> float:
        return self.start + self.duration


@dataclass(frozen=True)
class RequestEvent:
    emit_time: float  # seconds
    client: str
    service: str
    request_id: int


def poisson_stream(rate: float, horizon: float, seed: int) -> list[float]:
    """Strictly increasing Poisson arrival timestamps on (0, horizon]."""
    if rate < 0:
        raise ValueError("rate must be >= 0")
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    if rate == 0:
        return []
    rng = random.Random(seed)
    out: list[float] = []
    t = 0.0
    while True:
        gap = rng.expovariate(rate)
        while gap <= 0.0:  # astronomically rare; keeps the stream strict
            gap = rng.expovariate(rate)
        t += gap
        if t > horizon:
            return out
        out.append(t)


def with_jitters(
    base_rate: float,
    jitters: Sequence[JitterSpec],
    horizon: float,
    seed: int,
) -> list[float]:
    """Piecewise-constant-rate Poisson arrivals via thinning.

    One max-rate stream is thinned down to the local rate, so a single seed
    drives the whole trace and changing a multiplier never reshuffles the
    arrivals outside the affected windows' acceptance draws. With no jitters
    this reduces exactly to :func:`poisson_stream`.
    """
    if base_rate < 0:
        raise ValueError("base_rate must be >= 0")
    if horizon <= 0:
        raise ValueError("horizon must be > 0")
    windows = sorted(jitters, key=lambda j: j.start)
    for j in windows:
        if j.end > horizon:
            raise ConfigError(f"jitter window [{j.start}, {j.end}) exceeds horizon {horizon}")
    for a, b in zip(windows, windows[1:]):
        if b.start < a.end:
            raise ConfigError(f"jitter windows [{a.start}, {a.end}) and "
                              f"[{b.start}, {b.end}) overlap")
    if base_rate == 0:
        return []
    max_mult = max([1.0] + [j.rate_multiplier for j in windows])
    max_rate = base_rate * max_mult

    def local_rate(t: float) -> float:
        for j in windows:
            if j.start <= t < j.end:
                return base_rate * j.rate_multiplier
        return base_rate

    rng = random.Random(seed)
    out: list[float] = []
    t = 0.0
    while True:
        gap = rng.expovariate(max_rate)
        while gap <= 0.0:
            gap = rng.expovariate(max_rate)
        t += gap
        if t > horizon:
            return out
        accept = local_rate(t) / max_rate
        if accept >= 1.0 or rng.random() < accept:
            out.append(t)


def sample_service(catalog: Sequence[ServiceSpec], draw: float) -> str:
    """Inverse-CDF sample over normalized popularity weights."""
    if not catalog:
        raise ValueError("catalog must not be empty")
    if not 0.0 <= draw < 1.0:
        raise ValueError("draw must be in [0, 1)")
    total = math.fsum(svc.popularity_weight for svc in catalog)
    if total <= 0:
        raise ValueError("catalog popularity weights are all zero")
    acc = 0.0
    for svc in catalog:
        acc += svc.popularity_weight / total
        if draw < acc:
            return svc.id
    return catalog[-1].id  # guard against float underrun at draw ~ 1


def exponential_exec_time(mean: float, draw: float) -> float:
    """Invert a uniform draw into an exponential execution time: -mean*ln(draw)."""
    if mean <= 0:
        raise ValueError("mean must be > 0")
    if not 0.0 < draw < 1.0:
        raise ValueError("draw must be in (0, 1)")
    return -mean * math.log(draw)


def make_catalog(
    num_services: int,
    zipf_exponent: float,
    exec_time_range: tuple[float, float],  # seconds
    cpu_demand: float,
    mem_demand: float,
    seed: int,
) -> list[ServiceSpec]:
    """Catalog with Zipf popularity and per-service mean execution times
    drawn once, uniformly, from the configured range."""
    if num_services < 1:
        raise ConfigError("catalog needs at least one service")
    lo, hi = exec_time_range
    if lo <= 0 or hi < lo:
        raise ConfigError("exec_time_range must satisfy 0 < lo <= hi")
    rng = substream(seed, "catalog")
    width = len(str(num_services - 1))
    out = []
    for j in range(num_services):
        t_j = lo if hi == lo else rng.uniform(lo, hi)
        out.append(ServiceSpec(
            id=f"s{j:0{width}d}",
            popularity_weight=1.0 / (j + 1) ** zipf_exponent,
            mean_exec_time=t_j,
            cpu_demand=cpu_demand,
            mem_demand=mem_demand,
        ))
    return out


def generate_requests(
    clients: Sequence[str],
    base_rate: float,
    horizon: float,
    jitters: Sequence[JitterSpec],
    catalog: Sequence[ServiceSpec],
    seed: int,
) -> list[RequestEvent]:
    """Merged, id-stamped emission trace for all clients.

    The aggregate rate is split equally over clients; each client gets its
    own arrival substream, and services are sampled in merged order from a
    separate substream, so the trace is independent of the strategy that
    will consume it.
    """
    if not clients:
        raise ConfigError("at least one client is required")
    per_client = base_rate / len(clients)
    merged: list[tuple[float, str]] = []
    for client in sorted(clients):
        stamps = with_jitters(per_client, jitters, horizon,
                              derive_seed(seed, "arrivals", client))
        merged.extend((t, client) for t in stamps)
    merged.sort()
    picker = substream(seed, "services")
    return [
        RequestEvent(emit_time=t, client=client,
                     service=sample_service(catalog, picker.random()),
                     request_id=i)
        for i, (t, client) in enumerate(merged)
    ]
