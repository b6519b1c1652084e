"""Network model: nodes with execution capacities, links with delays.

Nodes are either routers (they execute services) or dedicated client/server
attach endpoints (they only source requests or terminate the forwarding
path; the :func:`line` generator creates such endpoints). Generators cover
the two synthetic layouts used in the experiments, and arbitrary ISP-style
graphs are read from a line-oriented text format::

    # comment
    node <id> cpu=<float> mem=<float>
    edge <id> <id> delay_ms=<float>
    server <id>
    client <id>

File topologies treat every node as a router; ``server``/``client`` lines
mark attach routers. Routing is hop-count shortest path toward the server,
precomputed once, with ties broken by smallest node id.

Link delays are stored in milliseconds (the file unit); ``link_delay``
converts to seconds for the simulator.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import ConfigError

__all__ = [
    "ROLE_ROUTER",
    "ROLE_CLIENT_ATTACH",
    "ROLE_SERVER_ATTACH",
    "CapacityProfile",
    "NodeInfo",
    "Topology",
    "grid",
    "grid_node_id",
    "line",
    "load_from_file",
    "loads",
    "save_to_file",
    "dumps",
]

NodeId = str

ROLE_ROUTER = "router"
ROLE_CLIENT_ATTACH = "client-attach"
ROLE_SERVER_ATTACH = "server-attach"


@dataclass(frozen=True)
class NodeInfo:
    cpu_capacity: float
    mem_capacity: float
    role: str = ROLE_ROUTER


@dataclass(frozen=True)
class CapacityProfile:
    """Uniform per-node capacities with optional per-node overrides."""

    cpu: float
    mem: float
    overrides: Mapping[NodeId, tuple[float, float]] = field(default_factory=dict)

    def capacities(self, node: NodeId) -> tuple[float, float]:
        return self.overrides.get(node, (self.cpu, self.mem))


class Topology:
    """Undirected graph with per-node capacities and a single server."""

    def __init__(
        self,
        nodes: Mapping[NodeId, NodeInfo],
        edges: Iterable[tuple[NodeId, NodeId, float]],  # (u, v, delay_ms)
        server: NodeId,
        clients: Iterable[NodeId],
    ):
        self.nodes: dict[NodeId, NodeInfo] = dict(nodes)
        self.server = server
        self.clients: list[NodeId] = sorted(clients)
        self._delay_ms: dict[tuple[NodeId, NodeId], float] = {}
        adj: dict[NodeId, set[NodeId]] = {n: set() for n in self.nodes}

        if server not in self.nodes:
            raise ConfigError(f"server {server!r} is not a declared node")
        if not self.clients:
            raise ConfigError("at least one client attach point is required")
        for c in self.clients:
            if c not in self.nodes:
                raise ConfigError(f"client {c!r} is not a declared node")
        for n, info in self.nodes.items():
            if info.cpu_capacity <= 0 or info.mem_capacity <= 0:
                raise ConfigError(f"node {n!r}: capacities must be > 0")

        for u, v, delay_ms in edges:
            if u not in self.nodes or v not in self.nodes:
                raise ConfigError(f"edge {u!r}-{v!r} references an undeclared node")
            if u == v:
                raise ConfigError(f"self-loop on node {u!r}")
            if delay_ms <= 0:
                raise ConfigError(f"edge {u!r}-{v!r}: delay must be > 0")
            key = (u, v) if u <= v else (v, u)
            if key in self._delay_ms:
                raise ConfigError(f"duplicate edge {u!r}-{v!r}")
            self._delay_ms[key] = delay_ms
            adj[u].add(v)
            adj[v].add(u)

        self._adj: dict[NodeId, tuple[NodeId, ...]] = {
            n: tuple(sorted(nbrs)) for n, nbrs in adj.items()
        }
        self._dist, self._next_hop = self._route_to_server()

    def _route_to_server(self) -> tuple[dict[NodeId, int], dict[NodeId, NodeId]]:
        # BFS from the server; every node must be reachable.
        dist = {self.server: 0}
        frontier = [self.server]
        while frontier:
            nxt: list[NodeId] = []
            for u in frontier:
                for v in self._adj[u]:
                    if v not in dist:
                        dist[v] = dist[u] + 1
                        nxt.append(v)
            frontier = sorted(nxt)
        for n in sorted(self.nodes):
            if n not in dist:
                raise ConfigError(f"graph is disconnected: node {n!r} cannot reach "
                                  f"server {self.server!r}")
        next_hop = {}
        for n in self.nodes:
            if n == self.server:
                continue
            next_hop[n] = min(v for v in self._adj[n] if dist[v] == dist[n] - 1)
        return dist, next_hop

    # -- queries ---------------------------------------------------------

    def neighbors(self, node: NodeId) -> set[NodeId]:
        if node not in self.nodes:
            raise ConfigError(f"unknown node {node!r}")
        return set(self._adj[node])

    def sorted_neighbors(self, node: NodeId) -> tuple[NodeId, ...]:
        if node not in self.nodes:
            raise ConfigError(f"unknown node {node!r}")
        return self._adj[node]

    def next_hop_to_server(self, node: NodeId) -> NodeId:
        """Neighbor of ``node`` on a hop-count shortest path to the server."""
        if node not in self.nodes:
            raise ConfigError(f"unknown node {node!r}")
        if node == self.server:
            raise ConfigError("next_hop_to_server called on the server itself")
        return self._next_hop[node]

    def hops_to_server(self, node: NodeId) -> int:
        return self._dist[node]

    def link_delay_ms(self, u: NodeId, v: NodeId) -> float:
        key = (u, v) if u <= v else (v, u)
        try:
            return self._delay_ms[key]
        except KeyError:
            raise ConfigError(f"no edge {u!r}-{v!r}") from None

    def link_delay(self, u: NodeId, v: NodeId) -> float:
        """Link delay in seconds."""
        return self.link_delay_ms(u, v) * 1e-3

    def edges(self) -> list[tuple[NodeId, NodeId, float]]:
        """Sorted (u, v, delay_ms) triples with u < v."""
        return [(u, v, d) for (u, v), d in sorted(self._delay_ms.items())]

    def routers(self) -> list[NodeId]:
        return sorted(n for n, info in self.nodes.items() if info.role == ROLE_ROUTER)

    def role(self, node: NodeId) -> str:
        return self.nodes[node].role

    def is_router(self, node: NodeId) -> bool:
        return self.nodes[node].role == ROLE_ROUTER

    def node_count(self) -> int:
        return len(self.nodes)

    def edge_count(self) -> int:
        return len(self._delay_ms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Topology):
            return NotImplemented
        return (self.nodes == other.nodes
                and self._delay_ms == other._delay_ms
                and self.server == other.server
                and self.clients == other.clients)

    def __repr__(self) -> str:
        return (f"Topology({len(self.nodes)} nodes, {len(self._delay_ms)} edges, "
                f"server={self.server!r}, clients={self.clients!r})")


# -- generators ------------------------------------------------------------

def grid_node_id(rows: int, cols: int, r: int, c: int) -> NodeId:
    """Row-major node id for a grid coordinate, zero-padded so that id order
    equals row-major order for any grid size."""
    width = len(str(rows * cols - 1))
    return f"n{r * cols + c:0{width}d}"


def grid(
    rows: int,
    cols: int,
    profile: CapacityProfile,
    client_at: tuple[int, int] = (0, 0),
    server_at: tuple[int, int] | None = None,
    link_delay_ms: float = 1.0,
) -> Topology:
    """4-neighbor lattice of routers; client and server attach at routers."""
    if rows < 2 or cols < 2:
        raise ConfigError("grid needs rows >= 2 and cols >= 2")
    if server_at is None:
        server_at = (rows - 1, cols - 1)
    for name, (r, c) in (("client_at", client_at), ("server_at", server_at)):
        if not (0 <= r < rows and 0 <= c < cols):
            raise ConfigError(f"{name}={r, c} is outside the {rows}x{cols} grid")
    nodes = {}
    edges = []
    for r in range(rows):
        for c in range(cols):
            nid = grid_node_id(rows, cols, r, c)
            cpu, mem = profile.capacities(nid)
            nodes[nid] = NodeInfo(cpu, mem, ROLE_ROUTER)
            if c + 1 < cols:
                edges.append((nid, grid_node_id(rows, cols, r, c + 1), link_delay_ms))
            if r + 1 < rows:
                edges.append((nid, grid_node_id(rows, cols, r + 1, c), link_delay_ms))
    return Topology(
        nodes,
        edges,
        server=grid_node_id(rows, cols, *server_at),
        clients=[grid_node_id(rows, cols, *client_at)],
    )


def line(
    chain_length: int,
    profile: CapacityProfile,
    link_delay_ms: float = 1.0,
) -> Topology:
    """Chain client -- r1 -- ... -- rN -- server with dedicated endpoints."""
    if chain_length < 1:
        raise ConfigError("line needs at least one router")
    nodes: dict[NodeId, NodeInfo] = {}
    router_ids = [f"r{i}" for i in range(1, chain_length + 1)]
    for rid in router_ids:
        cpu, mem = profile.capacities(rid)
        nodes[rid] = NodeInfo(cpu, mem, ROLE_ROUTER)
    nodes["client"] = NodeInfo(1.0, 1.0, ROLE_CLIENT_ATTACH)
    nodes["server"] = NodeInfo(1.0, 1.0, ROLE_SERVER_ATTACH)
    chain = ["client"] + router_ids + ["server"]
    edges = [(chain[i], chain[i + 1], link_delay_ms) for i in range(len(chain) - 1)]
    return Topology(nodes, edges, server="server", clients=["client"])


# -- file format -------------------------------------------------------------

def loads(text: str, source: str = "<string>") -> Topology:
    """Parse the line-oriented topology format; errors carry line numbers."""
    nodes: dict[NodeId, NodeInfo] = {}
    edges: list[tuple[NodeId, NodeId, float]] = []
    seen_edges: set[tuple[NodeId, NodeId]] = set()
    server: NodeId | None = None
    clients: list[NodeId] = []

    def fail(lineno: int, msg: str) -> ConfigError:
        return ConfigError(f"{source}:{lineno}: {msg}")

    def parse_kv(lineno: int, token: str, expected: str) -> float:
        key, sep, value = token.partition("=")
        if not sep or key != expected:
            raise fail(lineno, f"expected {expected}=<float>, got {token!r}")
        try:
            return float(value)
        except ValueError:
            raise fail(lineno, f"bad float {value!r} for {expected}") from None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if not stripped:
            continue
        tokens = stripped.split()
        kind = tokens[0]
        if kind == "node":
            if len(tokens) != 4:
                raise fail(lineno, "node lines are: node <id> cpu=<float> mem=<float>")
            nid = tokens[1]
            if nid in nodes:
                raise fail(lineno, f"duplicate node {nid!r}")
            cpu = parse_kv(lineno, tokens[2], "cpu")
            mem = parse_kv(lineno, tokens[3], "mem")
            nodes[nid] = NodeInfo(cpu, mem, ROLE_ROUTER)
        elif kind == "edge":
            if len(tokens) != 4:
                raise fail(lineno, "edge lines are: edge <id> <id> delay_ms=<float>")
            u, v = tokens[1], tokens[2]
            delay_ms = parse_kv(lineno, tokens[3], "delay_ms")
            key = (u, v) if u <= v else (v, u)
            if key in seen_edges:
                warnings.warn(f"{source}:{lineno}: duplicate edge {u}-{v} ignored",
                              stacklevel=2)
                continue
            seen_edges.add(key)
            edges.append((u, v, delay_ms))
        elif kind == "server":
            if len(tokens) != 2:
                raise fail(lineno, "server lines are: server <id>")
            if server is not None:
                raise fail(lineno, "multiple server declarations")
            server = tokens[1]
        elif kind == "client":
            if len(tokens) != 2:
                raise fail(lineno, "client lines are: client <id>")
            clients.append(tokens[1])
        else:
            raise fail(lineno, f"unknown declaration {kind!r}")

    if server is None:
        raise ConfigError(f"{source}: missing server declaration")
    try:
        return Topology(nodes, edges, server=server, clients=clients)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_from_file(path) -> Topology:
    with open(path, "r", encoding="utf-8") as fh:
        return loads(fh.read(), source=str(path))


def dumps(topo: Topology) -> str:
    """Serialize a topology; ``loads`` is a left inverse for router-only
    topologies (dedicated attach-endpoint roles are not file-expressible)."""
    out = []
    for n in sorted(topo.nodes):
        info = topo.nodes[n]
        out.append(f"node {n} cpu={info.cpu_capacity!r} mem={info.mem_capacity!r}")
    for u, v, delay_ms in topo.edges():
        out.append(f"edge {u} {v} delay_ms={delay_ms!r}")
    out.append(f"server {topo.server}")
    for c in topo.clients:
        out.append(f"client {c}")
    return "\n".join(out) + "\n"


def save_to_file(topo: Topology, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(topo))
