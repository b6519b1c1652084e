"""Shared builders for scenario configs used across the test modules."""
from __future__ import annotations

from c3po.scenario import (
    CatalogConfig,
    ControllerConfig,
    OutputConfig,
    ScenarioConfig,
    TopologyConfig,
    WorkloadConfig,
)
from c3po.workload import JitterSpec


def line_config(
    routers: int = 1,
    *,
    base_rate: float = 500.0,
    horizon_s: float = 2.0,
    exec_ms: float = 1.0,
    cpu_capacity: float = 10.0,
    strategy: str = "proactive",
    buffer_size: int = 64,
    pinned_q: float | None = None,
    seed: int = 1,
    bin_ms: float = 10.0,
    jitters: tuple[JitterSpec, ...] = (),
    exchange_period_ms: float = 1.0,
) -> ScenarioConfig:
    return ScenarioConfig(
        topology=TopologyConfig(kind="line", routers=routers,
                                cpu_capacity=cpu_capacity, mem_capacity=1e9,
                                link_delay_ms=1.0),
        strategy=strategy,
        workload=WorkloadConfig(
            base_rate=base_rate, horizon_s=horizon_s, jitters=jitters,
            catalog=CatalogConfig(services=1, exec_time_range_ms=(exec_ms, exec_ms),
                                  cpu_demand=1.0, mem_demand=0.0)),
        controller=ControllerConfig(buffer_size=buffer_size, pinned_q=pinned_q,
                                    exchange_period_ms=exchange_period_ms),
        seed=seed,
        output=OutputConfig(bin_ms=bin_ms),
    )


def grid_config(
    rows: int = 4,
    cols: int = 4,
    *,
    base_rate: float = 1000.0,
    horizon_s: float = 1.0,
    exec_ms: float = 10.0,
    cpu_capacity: float = 10.0,
    strategy: str = "passive",
    seed: int = 3,
    exchange_period_ms: float = 1.0,
) -> ScenarioConfig:
    return ScenarioConfig(
        topology=TopologyConfig(kind="grid", rows=rows, cols=cols, client_at=(0, 0),
                                server_at=(rows - 1, cols - 1),
                                cpu_capacity=cpu_capacity, mem_capacity=1e9,
                                link_delay_ms=1.0),
        strategy=strategy,
        workload=WorkloadConfig(
            base_rate=base_rate, horizon_s=horizon_s,
            catalog=CatalogConfig(services=1, exec_time_range_ms=(exec_ms, exec_ms),
                                  cpu_demand=1.0, mem_demand=0.0)),
        controller=ControllerConfig(buffer_size=64,
                                    exchange_period_ms=exchange_period_ms),
        seed=seed,
        output=OutputConfig(bin_ms=10.0),
    )
