"""Run metrics: per-node load profiles and the three headline aggregates.

* tau  -- network average load: mean over routers of the time-averaged
          normalized load (number-in-system x mean CPU demand / capacity).
* phi  -- average latency in milliseconds over successfully executed
          requests only (emission to result delivery, full sojourn).
* psi  -- ratio of dropped to emitted requests.

Load series are stored as per-bin time averages; node keys are strings so a
report survives a JSON round trip unchanged.
"""
from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import dataclass, asdict
from typing import Sequence

__all__ = [
    "MetricsReport",
    "top_k_loads",
    "load_time_series",
    "window_avg_load",
    "emit",
]

_FLOAT_FMT = "%.12g"  # fixed-width enough for stable files, exact to ~5e-13


def n_bins(horizon_s: float, bin_ms: float) -> int:
    """Number of series bins covering [0, horizon); the last may be partial."""
    return max(1, math.ceil(horizon_s / (bin_ms * 1e-3) - 1e-9))


@dataclass
class MetricsReport:
    seed: int
    scenario_digest: str
    replicate: int
    horizon_s: float
    bin_ms: float
    per_node_avg_load: dict[str, float]
    avg_load_tau: float
    avg_latency_phi_ms: float | None
    drop_ratio_psi: float
    load_series: dict[str, list[float]]  # per-bin average load, bin i starts at i*bin_ms
    journeys_summary: dict[str, int]  # emitted / executed / dropped

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "MetricsReport":
        return cls(**data)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "MetricsReport":
        return cls.from_dict(json.loads(text))


def top_k_loads(report: MetricsReport, k: int) -> list[tuple[str, float]]:
    """The k heaviest per-node average loads, descending, ties by node id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    ranked = sorted(report.per_node_avg_load.items(), key=lambda kv: (-kv[1], kv[0]))
    return ranked[:k]


def _bin_edges(report: MetricsReport) -> tuple[float, int]:
    return report.bin_ms * 1e-3, n_bins(report.horizon_s, report.bin_ms)


def _bin_width_s(report: MetricsReport, index: int) -> float:
    # The last bin may be cut short by the horizon.
    width_s, _ = _bin_edges(report)
    return min(width_s, report.horizon_s - index * width_s)


def load_time_series(report: MetricsReport, node: str, bin_ms: float | None = None
                     ) -> list[tuple[float, float]]:
    """(bin start in ms, average load) pairs for one node.

    ``bin_ms`` defaults to the report's native bin width; a coarser width
    must be an integer multiple of it (bins are merged time-weighted).
    """
    node = str(node)
    if node not in report.load_series:
        raise ValueError(f"node {node!r} has no load series in this report")
    series = report.load_series[node]
    if bin_ms is None or bin_ms == report.bin_ms:
        return [(i * report.bin_ms, v) for i, v in enumerate(series)]
    factor = bin_ms / report.bin_ms
    if factor < 1 or abs(factor - round(factor)) > 1e-9:
        raise ValueError(f"bin_ms={bin_ms} is not an integer multiple of the "
                         f"report bin width {report.bin_ms}")
    step = int(round(factor))
    out = []
    for start in range(0, len(series), step):
        chunk = range(start, min(start + step, len(series)))
        weights = [_bin_width_s(report, i) for i in chunk]
        total_w = math.fsum(weights)
        value = math.fsum(series[i] * w for i, w in zip(chunk, weights)) / total_w
        out.append((start * report.bin_ms, value))
    return out


def window_avg_load(report: MetricsReport, node: str, t0: float, t1: float) -> float:
    """Time-averaged load over the window [t0, t1), in seconds.

    Bins partially covered by the window contribute proportionally (the load
    is treated as uniform within a bin); windows aligned to bin edges are
    exact.
    """
    node = str(node)
    if node not in report.load_series:
        raise ValueError(f"node {node!r} has no load series in this report")
    if not (0.0 <= t0 < t1 <= report.horizon_s + 1e-12):
        raise ValueError(f"bad window [{t0}, {t1}) for horizon {report.horizon_s}")
    series = report.load_series[node]
    width_s, _ = _bin_edges(report)
    area = 0.0
    for i, value in enumerate(series):
        lo = i * width_s
        hi = lo + _bin_width_s(report, i)
        overlap = min(hi, t1) - max(lo, t0)
        if overlap > 0:
            area += value * overlap
    return area / (t1 - t0)


# -- file emission -----------------------------------------------------------

def _fmt(value: float | None) -> str:
    if value is None:
        return ""
    return _FLOAT_FMT % value


def _write_summary_csv(path: str, reports: Sequence[MetricsReport]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["replicate", "avg_load_tau", "avg_latency_phi_ms",
                    "drop_ratio_psi", "seed", "scenario_digest"])
        for rep in reports:
            w.writerow([rep.replicate, _fmt(rep.avg_load_tau),
                        _fmt(rep.avg_latency_phi_ms), _fmt(rep.drop_ratio_psi),
                        rep.seed, rep.scenario_digest])


def _write_node_loads_csv(path: str, report: MetricsReport) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["node_id", "avg_load"])
        for node in sorted(report.per_node_avg_load):
            w.writerow([node, _fmt(report.per_node_avg_load[node])])


def _write_series_csv(path: str, report: MetricsReport, node: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_ms", "load"])
        for t_ms, load in load_time_series(report, node):
            w.writerow([_fmt(t_ms), _fmt(load)])


def emit(
    reports: MetricsReport | Sequence[MetricsReport],
    format: str,
    out_dir: str,
    series_nodes: Sequence[str] = (),
) -> list[str]:
    """Write reports under ``out_dir``; returns the written paths.

    csv: ``summary.csv`` (one row per replicate), ``node_loads.csv`` and
    ``series_<node>.csv`` per requested node (in ``rep<i>/`` subdirectories
    when there is more than one replicate). json: ``summary.json`` holding
    the full reports; re-parsing it reproduces the in-memory reports.
    """
    if isinstance(reports, MetricsReport):
        reports = [reports]
    if format not in ("csv", "json"):
        raise ValueError(f"unknown format {format!r}")
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir!r}: {exc}") from exc
    written: list[str] = []

    def _path(*parts: str) -> str:
        return os.path.join(out_dir, *parts)

    if format == "json":
        path = _path("summary.json")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump([rep.to_dict() for rep in reports], fh, indent=2)
            fh.write("\n")
        return [path]

    path = _path("summary.csv")
    _write_summary_csv(path, reports)
    written.append(path)
    multi = len(reports) > 1
    for rep in reports:
        sub = _path(f"rep{rep.replicate:03d}") if multi else out_dir
        os.makedirs(sub, exist_ok=True)
        loads_path = os.path.join(sub, "node_loads.csv")
        _write_node_loads_csv(loads_path, rep)
        written.append(loads_path)
        for node in series_nodes:
            node = str(node)
            series_path = os.path.join(sub, f"series_{node}.csv")
            _write_series_csv(series_path, rep, node)
            written.append(series_path)
    return written
