"""Computation congestion control for in-network services, at desk scale.

A library and discrete-event simulator for studying how routers that execute
services should shed computational load: the proactive C3PO admission
controller (probabilistic execution driven by M/M/1 workload estimates,
conservative mode on rising arrival rates, one-hop load gossip) next to
passive and no-control baselines.
"""
from .controller import Action, ArrivalDecision, CircularBuffer, Controller, ControllerInit
from .engine import Request, RequestJourney, Simulation, run, run_all, run_replicate
from .errors import ConfigError, UnstableSystemError
from .metrics import MetricsReport, emit, load_time_series, top_k_loads, window_avg_load
from .queueing import (
    ServiceSpec,
    WorkloadEstimate,
    aggregate_rates,
    execution_probability,
    expected_queue_length,
    mean_consumption,
    utilization,
)
from .scenario import ScenarioConfig, load_scenario
from .topology import CapacityProfile, Topology, grid, line, load_from_file, save_to_file
from .workload import (
    JitterSpec,
    RequestEvent,
    exponential_exec_time,
    poisson_stream,
    sample_service,
    with_jitters,
)

__version__ = "0.1.0"

__all__ = [
    "Action",
    "ArrivalDecision",
    "CapacityProfile",
    "CircularBuffer",
    "ConfigError",
    "Controller",
    "ControllerInit",
    "JitterSpec",
    "MetricsReport",
    "Request",
    "RequestEvent",
    "RequestJourney",
    "ScenarioConfig",
    "ServiceSpec",
    "Simulation",
    "Topology",
    "UnstableSystemError",
    "WorkloadEstimate",
    "aggregate_rates",
    "emit",
    "execution_probability",
    "expected_queue_length",
    "exponential_exec_time",
    "grid",
    "line",
    "load_from_file",
    "load_scenario",
    "load_time_series",
    "mean_consumption",
    "poisson_stream",
    "run",
    "run_all",
    "run_replicate",
    "sample_service",
    "save_to_file",
    "top_k_loads",
    "utilization",
    "window_avg_load",
    "with_jitters",
]
