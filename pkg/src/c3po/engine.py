"""Deterministic discrete-event simulation of the request lifecycle.

Each emitted request enters the network at its client's edge router and is
then handled according to the node strategy:

* ``none``     -- execute if the node's reservations fit, otherwise drop.
* ``passive``  -- execute if it fits, otherwise pass along the shortest path
                  toward the server; the last router before a non-executing
                  server endpoint drops it.
* ``proactive``-- ask the node's admission controller; executed requests are
                  admitted unconditionally (the queue absorbs bursts), the
                  rest go to the unvisited neighbor router with the lightest
                  reported load, falling back to local admission when every
                  neighbor has been visited. Nodes gossip their normalized
                  load to one-hop neighbors on a fixed period, paying one
                  link delay.

A node serves admitted requests FIFO through a single execution unit;
"concurrently running" services are all requests in the system (queued plus
in service), which is what the admission checks and the load metric count.
Completed results travel back along the reversed hop path, paying link
delays; latency is measured from emission to result delivery.

Events are processed in (time, insertion sequence) order and all randomness
comes from named substreams of the scenario seed, so a run is a pure
function of (scenario, seed): byte-identical reports every time. Client
emissions stop at the horizon, in-flight requests drain afterwards, and
load metrics cover exactly [0, horizon].
"""
from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass

from . import metrics, queueing, workload
from .controller import Action, Controller, ControllerInit
from .metrics import MetricsReport
from .queueing import ServiceSpec
from .scenario import ScenarioConfig
from .topology import Topology
from .workload import RequestEvent, derive_seed, substream

__all__ = ["Request", "RequestJourney", "Simulation", "run", "run_replicate", "run_all"]

_EMIT, _ARRIVAL, _COMPLETE, _DELIVER, _EXCH_TICK, _EXCH_APPLY = range(6)


class Request:
    """One in-flight request; the task size is pre-drawn at emission so all
    strategies see the identical workload."""

    __slots__ = ("request_id", "client", "service", "emit_time",
                 "exec_duration", "hops", "visited")

    def __init__(self, request_id: int, client: str, service: ServiceSpec,
                 emit_time: float, exec_duration: float):
        self.request_id = request_id
        self.client = client
        self.service = service
        self.emit_time = emit_time
        self.exec_duration = exec_duration
        self.hops: list[str] = []
        self.visited: set[str] = set()


@dataclass(frozen=True)
class RequestJourney:
    request_id: int
    hops_taken: tuple[str, ...]
    outcome: str  # "executed" | "dropped"
    at: str  # node where it was executed or dropped
    emit_time: float
    complete_time: float | None  # execution completion (executed only)
    latency: float | None  # emission to result delivery, seconds


class _NodeRuntime:
    __slots__ = ("node", "is_router", "cpu_capacity", "mem_capacity", "controller",
                 "queue", "in_service", "in_system", "cpu_reserved", "mem_reserved",
                 "neighbor_loads", "bins", "last_t")

    def __init__(self, node: str, is_router: bool, cpu_capacity: float,
                 mem_capacity: float, n_bins: int):
        self.node = node
        self.is_router = is_router
        self.cpu_capacity = cpu_capacity
        self.mem_capacity = mem_capacity
        self.controller: Controller | None = None
        self.queue: deque[Request] = deque()
        self.in_service: Request | None = None
        self.in_system = 0
        self.cpu_reserved = 0.0
        self.mem_reserved = 0.0
        self.neighbor_loads: dict[str, float] = {}
        self.bins = [0.0] * n_bins
        self.last_t = 0.0


class Simulation:
    """One run of one scenario replicate.

    The object keeps its journeys, emission trace, and per-node runtimes
    around after :meth:`run` so tests and tools can inspect them; the
    returned :class:`MetricsReport` carries only the reportable surface.
    """

    def __init__(self, config: ScenarioConfig, replicate: int = 0):
        config.validate()
        self.config = config
        self.replicate = replicate
        self.seed = derive_seed(config.seed, "replicate", replicate)
        self.topo: Topology = config.build_topology()
        self.catalog: list[ServiceSpec] = config.build_catalog()
        self.horizon = config.workload.horizon_s
        self.strategy = config.strategy

        self._catalog_by_id = {svc.id: svc for svc in self.catalog}
        self._cpu_mean, self._mem_mean = queueing.mean_consumption(self.catalog)
        self._tbar = queueing.mean_exec_time(self.catalog)

        self.bin_w = config.output.bin_ms * 1e-3
        self._n_bins = metrics.n_bins(self.horizon, config.output.bin_ms)

        self.nodes: dict[str, _NodeRuntime] = {}
        for node, info in self.topo.nodes.items():
            self.nodes[node] = _NodeRuntime(
                node, self.topo.is_router(node),
                info.cpu_capacity, info.mem_capacity, self._n_bins)

        ctl = config.controller
        if self.strategy == "proactive":
            init = ControllerInit(
                service_rate=(ctl.init_service_rate if ctl.init_service_rate is not None
                              else 1.0 / self._tbar),
                cpu_mean=(ctl.init_cpu_mean if ctl.init_cpu_mean is not None
                          else self._cpu_mean),
                mem_mean=(ctl.init_mem_mean if ctl.init_mem_mean is not None
                          else self._mem_mean),
            )
            for node in self.topo.routers():
                self.nodes[node].controller = Controller(
                    buffer_size=ctl.buffer_size,
                    cpu_capacity=self.nodes[node].cpu_capacity,
                    mem_capacity=self.nodes[node].mem_capacity,
                    init=init,
                    q_override=ctl.pinned_q,
                )
        self._ctrl_rng = substream(self.seed, "controller")

        # Pre-draw the whole workload: emission trace, service choice, task size.
        self.trace: list[RequestEvent] = workload.generate_requests(
            clients=self.topo.clients,
            base_rate=config.workload.base_rate,
            horizon=self.horizon,
            jitters=config.workload.jitters,
            catalog=self.catalog,
            seed=self.seed,
        )
        exec_rng = substream(self.seed, "exec")
        self.requests: list[Request] = []
        for ev in self.trace:
            svc = self._catalog_by_id[ev.service]
            u = exec_rng.random()
            while u <= 0.0:
                u = exec_rng.random()
            self.requests.append(Request(
                ev.request_id, ev.client, svc, ev.emit_time,
                workload.exponential_exec_time(svc.mean_exec_time, u)))

        self.journeys: list[RequestJourney] = []
        self._emitted = 0
        self._executed = 0
        self._dropped = 0

        self._events: list[tuple] = []
        self._seq = 0
        self.now = 0.0
        for req in self.requests:
            self._schedule(req.emit_time, _EMIT, req)
        self._edge_router: dict[str, str] = {}
        for client in self.topo.clients:
            if self.topo.is_router(client):
                self._edge_router[client] = client
            else:
                self._edge_router[client] = min(self.topo.sorted_neighbors(client))
        if self.strategy == "proactive":
            self._proactive_routers = self.topo.routers()
            self._exchange_period = ctl.exchange_period_ms * 1e-3
            self._schedule(0.0, _EXCH_TICK, None)

    # -- event machinery ----------------------------------------------------

    def _schedule(self, t: float, kind: int, payload) -> None:
        self._seq += 1
        heapq.heappush(self._events, (t, self._seq, kind, payload))

    def step(self) -> bool:
        """Process one event; returns False when the queue is empty."""
        if not self._events:
            return False
        t, _seq, kind, payload = heapq.heappop(self._events)
        self.now = t
        if kind == _EMIT:
            self._handle_emit(t, payload)
        elif kind == _ARRIVAL:
            node, req = payload
            self._handle_arrival(t, node, req)
        elif kind == _COMPLETE:
            self._handle_complete(t, payload)
        elif kind == _DELIVER:
            req, complete_t = payload
            self._handle_deliver(t, req, complete_t)
        elif kind == _EXCH_TICK:
            self._handle_exchange_tick(t)
        else:
            dst, src, load = payload
            self.nodes[dst].neighbor_loads[src] = load
        return True

    def run(self) -> MetricsReport:
        while self.step():
            pass
        return self._build_report()

    # -- handlers -------------------------------------------------------------

    def _handle_emit(self, t: float, req: Request) -> None:
        self._emitted += 1
        edge = self._edge_router[req.client]
        if edge == req.client:
            self._handle_arrival(t, edge, req)
        else:
            self._schedule(t + self.topo.link_delay(req.client, edge), _ARRIVAL,
                           (edge, req))

    def _handle_arrival(self, t: float, node: str, req: Request) -> None:
        nd = self.nodes[node]
        req.hops.append(node)
        req.visited.add(node)
        if self.strategy == "none":
            if self._fits(nd, req):
                self._admit(t, nd, req)
            else:
                self._drop(t, node, req)
        elif self.strategy == "passive":
            if self._fits(nd, req):
                self._admit(t, nd, req)
            elif node == self.topo.server:
                self._drop(t, node, req)
            else:
                nh = self.topo.next_hop_to_server(node)
                if nh == self.topo.server and not self.topo.is_router(nh):
                    self._drop(t, node, req)  # last hop before the server
                else:
                    self._forward(t, node, nh, req)
        else:  # proactive
            decision = nd.controller.on_arrival(t, self._ctrl_rng.random())
            if decision.action is Action.EXECUTE:
                self._admit(t, nd, req)
            else:
                cand = [nb for nb in self.topo.sorted_neighbors(node)
                        if self.topo.is_router(nb) and nb not in req.visited]
                if not cand:
                    self._admit(t, nd, req)  # nowhere left to go: absorb
                else:
                    loads = nd.neighbor_loads
                    target = min(cand, key=lambda nb: (loads.get(nb, 0.0), nb))
                    self._forward(t, node, target, req)

    def _fits(self, nd: _NodeRuntime, req: Request) -> bool:
        svc = req.service
        return (nd.cpu_reserved + svc.cpu_demand <= nd.cpu_capacity
                and nd.mem_reserved + svc.mem_demand <= nd.mem_capacity)

    def _admit(self, t: float, nd: _NodeRuntime, req: Request) -> None:
        self._accrue(nd, t)
        nd.in_system += 1
        nd.cpu_reserved += req.service.cpu_demand
        nd.mem_reserved += req.service.mem_demand
        if nd.in_service is None:
            nd.in_service = req
            self._schedule(t + req.exec_duration, _COMPLETE, nd.node)
        else:
            nd.queue.append(req)

    def _forward(self, t: float, node: str, target: str, req: Request) -> None:
        self._schedule(t + self.topo.link_delay(node, target), _ARRIVAL, (target, req))

    def _drop(self, t: float, node: str, req: Request) -> None:
        self._dropped += 1
        self.journeys.append(RequestJourney(
            request_id=req.request_id, hops_taken=tuple(req.hops), outcome="dropped",
            at=node, emit_time=req.emit_time, complete_time=None, latency=None))

    def _handle_complete(self, t: float, node: str) -> None:
        nd = self.nodes[node]
        req = nd.in_service
        self._accrue(nd, t)
        nd.in_system -= 1
        nd.cpu_reserved -= req.service.cpu_demand
        nd.mem_reserved -= req.service.mem_demand
        if nd.controller is not None:
            nd.controller.on_complete(req.exec_duration, req.service.cpu_demand,
                                      req.service.mem_demand)
        if nd.queue:
            nxt = nd.queue.popleft()
            nd.in_service = nxt
            self._schedule(t + nxt.exec_duration, _COMPLETE, node)
        else:
            nd.in_service = None
        self._schedule(t + self._return_delay(req), _DELIVER, (req, t))

    def _return_delay(self, req: Request) -> float:
        hops = req.hops
        delay = 0.0
        for i in range(len(hops) - 1, 0, -1):
            delay += self.topo.link_delay(hops[i], hops[i - 1])
        if hops[0] != req.client:  # dedicated client endpoint pays its link
            delay += self.topo.link_delay(hops[0], req.client)
        return delay

    def _handle_deliver(self, t: float, req: Request, complete_t: float) -> None:
        self._executed += 1
        self.journeys.append(RequestJourney(
            request_id=req.request_id, hops_taken=tuple(req.hops), outcome="executed",
            at=req.hops[-1], emit_time=req.emit_time, complete_time=complete_t,
            latency=t - req.emit_time))

    def _handle_exchange_tick(self, t: float) -> None:
        topo = self.topo
        for node in self._proactive_routers:
            nd = self.nodes[node]
            load = self.load_now(nd)
            for nb in topo.sorted_neighbors(node):
                if topo.is_router(nb):
                    self._schedule(t + topo.link_delay(node, nb), _EXCH_APPLY,
                                   (nb, node, load))
        nxt = t + self._exchange_period
        if nxt <= self.horizon + 1e-12:
            self._schedule(nxt, _EXCH_TICK, None)

    def load_now(self, nd: _NodeRuntime) -> float:
        """Instantaneous normalized load a node reports to its neighbors."""
        cpu_mean = (nd.controller.cpu_mean_est if nd.controller is not None
                    else self._cpu_mean)
        return nd.in_system * cpu_mean / nd.cpu_capacity

    # -- load accounting ------------------------------------------------------

    def _accrue(self, nd: _NodeRuntime, t: float) -> None:
        t0, n = nd.last_t, nd.in_system
        nd.last_t = t
        if n <= 0:
            return
        lo = t0
        hi = min(t, self.horizon)
        if hi <= lo:
            return
        w = self.bin_w
        bins = nd.bins
        b0 = int(lo / w)
        b1 = min(int(hi / w), len(bins) - 1)
        for b in range(b0, b1 + 1):
            seg = min((b + 1) * w, hi) - max(b * w, lo)
            if seg > 0:
                bins[b] += n * seg

    # -- report ---------------------------------------------------------------

    def _build_report(self) -> MetricsReport:
        per_node: dict[str, float] = {}
        series: dict[str, list[float]] = {}
        for node in self.topo.routers():
            nd = self.nodes[node]
            factor = self._cpu_mean / nd.cpu_capacity
            per_node[node] = math.fsum(nd.bins) / self.horizon * factor
            vals = []
            for b, area in enumerate(nd.bins):
                width = min(self.bin_w, self.horizon - b * self.bin_w)
                vals.append(area / width * factor)
            series[node] = vals
        tau = math.fsum(per_node.values()) / len(per_node) if per_node else 0.0
        latencies = [j.latency for j in self.journeys if j.outcome == "executed"]
        phi = (math.fsum(latencies) / len(latencies) * 1e3) if latencies else None
        psi = self._dropped / self._emitted if self._emitted else 0.0
        return MetricsReport(
            seed=self.seed,
            scenario_digest=self.config.digest(),
            replicate=self.replicate,
            horizon_s=self.horizon,
            bin_ms=self.config.output.bin_ms,
            per_node_avg_load=per_node,
            avg_load_tau=tau,
            avg_latency_phi_ms=phi,
            drop_ratio_psi=psi,
            load_series=series,
            journeys_summary={"emitted": self._emitted, "executed": self._executed,
                              "dropped": self._dropped},
        )


def run_replicate(config: ScenarioConfig, replicate: int = 0) -> MetricsReport:
    """Run one replicate of a scenario to completion."""
    return Simulation(config, replicate).run()


def run(config: ScenarioConfig) -> MetricsReport:
    """Run replicate 0 of a scenario."""
    return run_replicate(config, 0)


def run_all(config: ScenarioConfig) -> list[MetricsReport]:
    """Run every configured replicate with independently derived seeds."""
    return [run_replicate(config, i) for i in range(config.replicates)]
