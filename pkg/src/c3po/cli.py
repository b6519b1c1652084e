"""Command-line entry points.

    c3po run --scenario FILE [--seed N] [--replicates N] [--out DIR] [--format csv|json]
    c3po validate --scenario FILE
    c3po topo gen grid --rows R --cols C [...] --out FILE
    c3po topo gen line --routers N [...] --out FILE

Exit codes: 0 ok, 1 runtime error, 2 usage or validation error.
"""
from __future__ import annotations

import argparse
import sys
from typing import Sequence

from . import engine, metrics, topology
from .errors import ConfigError
from .scenario import load_scenario
from .topology import CapacityProfile


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c3po",
        description="Discrete-event simulator for computation congestion control "
                    "of in-network services.")
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run a scenario and emit reports")
    run_p.add_argument("--scenario", required=True, help="scenario JSON file")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument("--replicates", type=int, default=None,
                       help="override the scenario replicate count")
    run_p.add_argument("--out", default="results", help="output directory")
    run_p.add_argument("--format", choices=("csv", "json"), default="csv")

    val_p = sub.add_parser("validate", help="validate a scenario file")
    val_p.add_argument("--scenario", required=True, help="scenario JSON file")

    topo_p = sub.add_parser("topo", help="topology utilities")
    topo_sub = topo_p.add_subparsers(dest="topo_command", required=True)
    gen_p = topo_sub.add_parser("gen", help="generate a topology file")
    gen_sub = gen_p.add_subparsers(dest="shape", required=True)

    grid_p = gen_sub.add_parser("grid")
    grid_p.add_argument("--rows", type=int, required=True)
    grid_p.add_argument("--cols", type=int, required=True)
    grid_p.add_argument("--client", default="0,0", help="client coordinate r,c")
    grid_p.add_argument("--server", default=None, help="server coordinate r,c")
    line_p = gen_sub.add_parser("line")
    line_p.add_argument("--routers", type=int, required=True)
    for p in (grid_p, line_p):
        p.add_argument("--cpu", type=float, default=10.0, help="per-node CPU capacity")
        p.add_argument("--mem", type=float, default=10.0, help="per-node memory capacity")
        p.add_argument("--delay-ms", type=float, default=1.0, help="link delay (ms)")
        p.add_argument("--out", required=True, help="output topology file")
    return parser


def _parse_coord(text: str) -> tuple[int, int]:
    try:
        r, c = text.split(",")
        return int(r), int(c)
    except ValueError:
        raise ConfigError(f"bad coordinate {text!r}, expected r,c") from None


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if args.replicates is not None:
        cfg = cfg.with_overrides(replicates=args.replicates)
    cfg.validate()
    reports = engine.run_all(cfg)
    written = metrics.emit(reports, args.format, args.out,
                           series_nodes=cfg.output.series_nodes)
    for path in written:
        print(path)
    return 0


def _cmd_validate(args: argparse.Namespace) -> int:
    cfg = load_scenario(args.scenario)
    cfg.validate()
    print(f"{args.scenario}: ok (digest {cfg.digest()})")
    return 0


def _cmd_topo_gen(args: argparse.Namespace) -> int:
    profile = CapacityProfile(cpu=args.cpu, mem=args.mem)
    if args.shape == "grid":
        server_at = _parse_coord(args.server) if args.server else None
        topo = topology.grid(args.rows, args.cols, profile,
                             client_at=_parse_coord(args.client),
                             server_at=server_at, link_delay_ms=args.delay_ms)
    else:
        topo = topology.line(args.routers, profile, link_delay_ms=args.delay_ms)
    topology.save_to_file(topo, args.out)
    print(args.out)
    return 0


def cli_run(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "topo":
            return _cmd_topo_gen(args)
        return 2
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(cli_run())


if __name__ == "__main__":
    main()
