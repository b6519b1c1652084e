"""Analytic workload model for a service-executing node.

A node sees many Poisson request streams, one per service. Their union is a
single birth-death process: birth rate is the sum of per-service arrival
rates, death rate is the sum of inverse mean execution times. Treating the
node as an M/M/1 queue gives the stationary number-in-system
l = rho / (1 - rho), and the induced resource load is l times the
popularity-weighted mean consumption. ``execution_probability`` inverts that
relation: it picks the largest admission probability q that keeps the load
of the first bottleneck resource (CPU or memory) within capacity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

from .errors import UnstableSystemError

__all__ = [
    "ServiceSpec",
    "WorkloadEstimate",
    "aggregate_rates",
    "utilization",
    "expected_queue_length",
    "mean_consumption",
    "mean_exec_time",
    "with_arrival_rates",
    "execution_probability",
]


@dataclass(frozen=True)
class ServiceSpec:
    """Demand profile of one service.

    ``popularity_weight`` is an unnormalized weight; popularities are
    normalized over a catalog wherever they are consumed. ``arrival_rate``
    may be left unset and derived later from an aggregate rate via
    :func:`with_arrival_rates`.
    """

    id: str
    popularity_weight: float
    mean_exec_time: float  # seconds
    cpu_demand: float
    mem_demand: float
    arrival_rate: float | None = None  # requests/second

    def __post_init__(self) -> None:
        if self.mean_exec_time <= 0:
            raise ValueError(f"service {self.id}: mean_exec_time must be > 0")
        if self.popularity_weight < 0:
            raise ValueError(f"service {self.id}: popularity_weight must be >= 0")
        if self.cpu_demand < 0 or self.mem_demand < 0:
            raise ValueError(f"service {self.id}: resource demands must be >= 0")
        if self.arrival_rate is not None and self.arrival_rate < 0:
            raise ValueError(f"service {self.id}: arrival_rate must be >= 0")


@dataclass(frozen=True)
class WorkloadEstimate:
    """Point estimate of a node's workload and capacity.

    Rates are per second; resource units are arbitrary but must be consistent
    between the capacity and the mean-consumption fields.
    """

    arrival_rate: float
    service_rate: float
    cpu_capacity: float
    cpu_mean: float
    mem_capacity: float
    mem_mean: float


def aggregate_rates(catalog: Sequence[ServiceSpec]) -> tuple[float, float]:
    """Aggregate birth and death rates of a catalog.

    Returns ``(sum of arrival rates, sum of inverse mean execution times)``.
    Every service must carry an ``arrival_rate``.
    """
    if not catalog:
        raise ValueError("catalog must not be empty")
    birth = 0.0
    death = 0.0
    for svc in catalog:
        if svc.arrival_rate is None:
            raise ValueError(f"service {svc.id}: arrival_rate unset; "
                             "derive it with with_arrival_rates() first")
        birth += svc.arrival_rate
        death += 1.0 / svc.mean_exec_time
    return birth, death


def utilization(arrival_rate: float, service_rate: float) -> float:
    """Offered load rho = arrival rate / service rate."""
    if service_rate <= 0:
        raise ValueError("service_rate must be > 0")
    if arrival_rate < 0:
        raise ValueError("arrival_rate must be >= 0")
    return arrival_rate / service_rate


def expected_queue_length(rho: float) -> float:
    """Stationary mean number-in-system of an M/M/1 queue: rho / (1 - rho)."""
    if rho < 0:
        raise ValueError("rho must be >= 0")
    if rho >= 1:
        raise UnstableSystemError(f"rho={rho} >= 1: queue grows without bound")
    return rho / (1.0 - rho)


def _normalized_weights(catalog: Sequence[ServiceSpec]) -> list[float]:
    total = math.fsum(svc.popularity_weight for svc in catalog)
    if total <= 0:
        raise ValueError("catalog popularity weights are all zero")
    return [svc.popularity_weight / total for svc in catalog]


def mean_consumption(catalog: Sequence[ServiceSpec]) -> tuple[float, float]:
    """Popularity-weighted mean CPU and memory consumption of a catalog."""
    if not catalog:
        raise ValueError("catalog must not be empty")
    weights = _normalized_weights(catalog)
    cpu = math.fsum(p * svc.cpu_demand for p, svc in zip(weights, catalog))
    mem = math.fsum(p * svc.mem_demand for p, svc in zip(weights, catalog))
    return cpu, mem


def mean_exec_time(catalog: Sequence[ServiceSpec]) -> float:
    """Popularity-weighted mean execution time of a catalog, in seconds."""
    if not catalog:
        raise ValueError("catalog must not be empty")
    weights = _normalized_weights(catalog)
    return math.fsum(p * svc.mean_exec_time for p, svc in zip(weights, catalog))


def with_arrival_rates(catalog: Sequence[ServiceSpec], total_rate: float) -> list[ServiceSpec]:
    """Split an aggregate arrival rate over a catalog by normalized popularity."""
    if total_rate < 0:
        raise ValueError("total_rate must be >= 0")
    weights = _normalized_weights(catalog)
    return [replace(svc, arrival_rate=p * total_rate) for p, svc in zip(weights, catalog)]


def execution_probability(est: WorkloadEstimate) -> float:
    """Admission probability q that keeps the first bottleneck within capacity.

    q = min( min(c'/(c'+c''), m'/(m'+m'')) * mu/lambda, 1 ). Thinning a
    Poisson stream by q yields utilization q*rho, and at the returned bound
    the induced load of the binding resource sits exactly at its capacity.
    A zero arrival rate yields q = 1: an idle node accepts everything.
    """
    if est.cpu_capacity <= 0 or est.mem_capacity <= 0:
        raise ValueError("capacities must be > 0")
    if est.cpu_mean < 0 or est.mem_mean < 0:
        raise ValueError("mean consumptions must be >= 0")
    if est.service_rate <= 0:
        raise ValueError("service_rate must be > 0")
    if est.arrival_rate < 0:
        raise ValueError("arrival_rate must be >= 0")
    if est.arrival_rate == 0:
        return 1.0
    cpu_ratio = est.cpu_capacity / (est.cpu_capacity + est.cpu_mean)
    mem_ratio = est.mem_capacity / (est.mem_capacity + est.mem_mean)
    q = min(cpu_ratio, mem_ratio) * est.service_rate / est.arrival_rate
    return min(q, 1.0)
