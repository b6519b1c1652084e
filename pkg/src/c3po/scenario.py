"""Scenario configuration: a JSON file describing one experiment.

Times in the file are milliseconds where the experiments think in
milliseconds (jitters, link delays, bin width) and seconds for the horizon;
everything is converted to seconds at the boundary. Example::

    {
      "topology": {"kind": "line", "routers": 2, "cpu_capacity": 10.0,
                   "mem_capacity": 1e9, "link_delay_ms": 1.0},
      "strategy": "proactive",
      "workload": {
        "base_rate": 1000.0, "horizon_s": 0.2,
        "jitters": [{"start_ms": 40.0, "duration_ms": 10.0, "rate_multiplier": 6.0}],
        "catalog": {"services": 1, "zipf_exponent": 0.8,
                    "exec_time_range_ms": [1.0, 1.0],
                    "cpu_demand": 1.0, "mem_demand": 0.0}
      },
      "controller": {"buffer_size": 50, "exchange_period_ms": 1.0},
      "seed": 42, "replicates": 1,
      "output": {"bin_ms": 1.0, "series_nodes": ["r1", "r2"]}
    }
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field, replace, asdict

from . import topology, workload
from .errors import ConfigError
from .queueing import ServiceSpec
from .topology import CapacityProfile, Topology
from .workload import JitterSpec

__all__ = [
    "CatalogConfig",
    "ControllerConfig",
    "OutputConfig",
    "ScenarioConfig",
    "TopologyConfig",
    "WorkloadConfig",
    "load_scenario",
]

STRATEGIES = ("none", "passive", "proactive")

@dataclass(frozen=True)
class TopologyConfig:
    kind: str  # grid | line | file
    rows: int = 0
    cols: int = 0
    client_at: tuple[int, int] = (0, 0)
    server_at: tuple[int, int] | None = None
    routers: int = 0  # line only
    path: str = ""  # file only
    cpu_capacity: float = 1.0
    mem_capacity: float = 1.0
    link_delay_ms: float = 1.0

@dataclass(frozen=True)
class CatalogConfig:
    services: int = 100
    zipf_exponent: float = 0.8
    exec_time_range_ms: tuple[float, float] = (5.0, 15.0)
    cpu_demand: float = 1.0
    mem_demand: float = 0.0

@dataclass(frozen=True)
class WorkloadConfig:
    base_rate: float
    horizon_s: float
    jitters: tuple[JitterSpec, ...] = ()
    catalog: CatalogConfig = field(default_factory=CatalogConfig)

@dataclass(frozen=True)
class ControllerConfig:
    buffer_size: int = 64
    exchange_period_ms: float = 1.0
    pinned_q: float | None = None
    # Optional seed-estimate overrides; None means "derive from the catalog".
    init_service_rate: float | None = None
    init_cpu_mean: float | None = None
    init_mem_mean: float | None = None

@dataclass(frozen=True)
class OutputConfig:
    bin_ms: float = 1.0
    series_nodes: tuple[str, ...] = ()

@dataclass(frozen=True)
class ScenarioConfig:
    topology: TopologyConfig
    strategy: str
    workload: WorkloadConfig
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    seed: int = 0
    replicates: int = 1
    output: OutputConfig = field(default_factory=OutputConfig)
    base_dir: str = "."  # directory topology file paths are resolved against

    # -- construction ------------------------------------------------------

    @classmethod
    def from_dict(cls, data: dict, base_dir: str = ".") -> "ScenarioConfig":
        try:
            return cls._from_dict(data, base_dir)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"bad scenario config: {exc}") from exc

    @classmethod
    def _from_dict(cls, data: dict, base_dir: str) -> "ScenarioConfig":
        known = {"topology", "strategy", "workload", "controller", "seed",
                 "replicates", "output"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
        topo_d = dict(data["topology"])
        kind = topo_d.pop("kind")
        topo_kwargs = {}
        for key in ("rows", "cols", "routers"):
            if key in topo_d:
                topo_kwargs[key] = int(topo_d.pop(key))
        for key in ("cpu_capacity", "mem_capacity", "link_delay_ms"):
            if key in topo_d:
                topo_kwargs[key] = float(topo_d.pop(key))
        if "client_at" in topo_d:
            topo_kwargs["client_at"] = tuple(topo_d.pop("client_at"))
        if "server_at" in topo_d:
            sa = topo_d.pop("server_at")
            topo_kwargs["server_at"] = tuple(sa) if sa is not None else None
        if "path" in topo_d:
            topo_kwargs["path"] = str(topo_d.pop("path"))
        if topo_d:
            raise ConfigError(f"unknown topology keys: {sorted(topo_d)}")
        topo_cfg = TopologyConfig(kind=kind, **topo_kwargs)

        wl_d = dict(data["workload"])
        cat_d = dict(wl_d.pop("catalog", {}))
        cat_kwargs = {}
        if "services" in cat_d:
            cat_kwargs["services"] = int(cat_d.pop("services"))
        if "zipf_exponent" in cat_d:
            cat_kwargs["zipf_exponent"] = float(cat_d.pop("zipf_exponent"))
        if "exec_time_range_ms" in cat_d:
            lo, hi = cat_d.pop("exec_time_range_ms")
            cat_kwargs["exec_time_range_ms"] = (float(lo), float(hi))
        for key in ("cpu_demand", "mem_demand"):
            if key in cat_d:
                cat_kwargs[key] = float(cat_d.pop(key))
        if cat_d:
            raise ConfigError(f"unknown catalog keys: {sorted(cat_d)}")
        jitters = tuple(
            JitterSpec(start=float(j["start_ms"]) * 1e-3,
                       duration=float(j["duration_ms"]) * 1e-3,
                       rate_multiplier=float(j["rate_multiplier"]))
            for j in wl_d.pop("jitters", [])
        )
        wl_cfg = WorkloadConfig(
            base_rate=float(wl_d.pop("base_rate")),
            horizon_s=float(wl_d.pop("horizon_s")),
            jitters=jitters,
            catalog=CatalogConfig(**cat_kwargs),
        )
        if wl_d:
            raise ConfigError(f"unknown workload keys: {sorted(wl_d)}")

        ctl_d = dict(data.get("controller", {}))
        ctl_kwargs = {}
        if "buffer_size" in ctl_d:
            ctl_kwargs["buffer_size"] = int(ctl_d.pop("buffer_size"))
        if "exchange_period_ms" in ctl_d:
            ctl_kwargs["exchange_period_ms"] = float(ctl_d.pop("exchange_period_ms"))
        for key in ("pinned_q", "init_service_rate", "init_cpu_mean", "init_mem_mean"):
            if key in ctl_d:
                val = ctl_d.pop(key)
                ctl_kwargs[key] = None if val is None else float(val)
        if ctl_d:
            raise ConfigError(f"unknown controller keys: {sorted(ctl_d)}")

        out_d = dict(data.get("output", {}))
        out_kwargs = {}
        if "bin_ms" in out_d:
            out_kwargs["bin_ms"] = float(out_d.pop("bin_ms"))
        if "series_nodes" in out_d:
            out_kwargs["series_nodes"] = tuple(str(n) for n in out_d.pop("series_nodes"))
        if out_d:
            raise ConfigError(f"unknown output keys: {sorted(out_d)}")

        return cls(
            topology=topo_cfg,
            strategy=str(data["strategy"]),
            workload=wl_cfg,
            controller=ControllerConfig(**ctl_kwargs),
            seed=int(data.get("seed", 0)),
            replicates=int(data.get("replicates", 1)),
            output=OutputConfig(**out_kwargs),
            base_dir=base_dir,
        )

    def to_dict(self) -> dict:
        """Canonical plain-dict form (also the digest input)."""
        d = asdict(self)
        d.pop("base_dir")
        d["workload"]["jitters"] = [
            {"start_ms": j.start * 1e3, "duration_ms": j.duration * 1e3,
             "rate_multiplier": j.rate_multiplier}
            for j in self.workload.jitters
        ]
        return d

    def digest(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)

    # -- validation & builders ---------------------------------------------

    def validate(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"strategy must be one of {STRATEGIES}, "
                              f"got {self.strategy!r}")
        if self.workload.base_rate < 0:
            raise ConfigError("workload.base_rate must be >= 0")
        if self.workload.horizon_s <= 0:
            raise ConfigError("workload.horizon_s must be > 0")
        if self.controller.buffer_size < 2:
            raise ConfigError("controller.buffer_size must be >= 2")
        if self.controller.exchange_period_ms <= 0:
            raise ConfigError("controller.exchange_period_ms must be > 0")
        if self.controller.pinned_q is not None and not 0 <= self.controller.pinned_q <= 1:
            raise ConfigError("controller.pinned_q must be in [0, 1]")
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if self.output.bin_ms <= 0:
            raise ConfigError("output.bin_ms must be > 0")
        cat = self.workload.catalog
        if cat.services < 1:
            raise ConfigError("catalog.services must be >= 1")
        lo, hi = cat.exec_time_range_ms
        if lo <= 0 or hi < lo:
            raise ConfigError("catalog.exec_time_range_ms must satisfy 0 < lo <= hi")
        for j in self.workload.jitters:
            if j.end > self.workload.horizon_s:
                raise ConfigError(f"jitter window [{j.start}, {j.end}) s exceeds "
                                  f"the {self.workload.horizon_s} s horizon")
        topo = self.build_topology()  # raises ConfigError on bad graphs
        for node in self.output.series_nodes:
            if node not in topo.nodes:
                raise ConfigError(f"output.series_nodes: unknown node {node!r}")

    def build_topology(self) -> Topology:
        t = self.topology
        profile = CapacityProfile(cpu=t.cpu_capacity, mem=t.mem_capacity)
        if t.kind == "grid":
            return topology.grid(t.rows, t.cols, profile, client_at=t.client_at,
                                 server_at=t.server_at, link_delay_ms=t.link_delay_ms)
        if t.kind == "line":
            return topology.line(t.routers, profile, link_delay_ms=t.link_delay_ms)
        if t.kind == "file":
            path = t.path
            if not os.path.isabs(path):
                path = os.path.join(self.base_dir, path)
            if not os.path.exists(path):
                raise ConfigError(f"topology file not found: {path}")
            return topology.load_from_file(path)
        raise ConfigError(f"unknown topology kind {t.kind!r}")

    def build_catalog(self) -> list[ServiceSpec]:
        cat = self.workload.catalog
        lo, hi = cat.exec_time_range_ms
        return workload.make_catalog(
            num_services=cat.services,
            zipf_exponent=cat.zipf_exponent,
            exec_time_range=(lo * 1e-3, hi * 1e-3),
            cpu_demand=cat.cpu_demand,
            mem_demand=cat.mem_demand,
            seed=self.seed,
        )

def load_scenario(path) -> ScenarioConfig:
    """Read and parse a scenario JSON file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))
