#!/usr/bin/env python3
"""Generate the bundled ISP-style topology (data/isp100.topo).

Preferential attachment on 100 routers: a seeded triangle core, then each
new router attaches to 2 existing routers (degree-weighted) while building
the core, and to 1 for the later edge routers, which leaves a healthy crop
of degree-1 leaves. The result is scale-free-ish with a small diameter,
the shape that matters for the workload-scaling experiment: many edge
routers funneling into few hubs. Capacities are uniform; the server sits
on the highest-degree hub and every leaf router hosts a client.

Run from the repository root:  python scripts/make_isp_topo.py
"""
from __future__ import annotations

import random
import sys
from collections import Counter
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from c3po.topology import NodeInfo, Topology, save_to_file  # noqa: E402

N_NODES = 100
CORE_SIZE = 74  # nodes up to this index attach with two links; the rest are leaves
CPU_CAPACITY = 10.0
MEM_CAPACITY = 10.0
DELAY_MS = 1.0
SEED = 20240611


def main() -> None:
    rng = random.Random(SEED)
    ids = [f"n{i:02d}" for i in range(N_NODES)]
    edges: set[tuple[str, str]] = set()
    degree: Counter[str] = Counter()

    def add_edge(u: str, v: str) -> None:
        key = (u, v) if u < v else (v, u)
        if key not in edges:
            edges.add(key)
            degree[u] += 1
            degree[v] += 1

    add_edge(ids[0], ids[1])
    add_edge(ids[1], ids[2])
    add_edge(ids[0], ids[2])

    for i in range(3, N_NODES):
        new = ids[i]
        existing = ids[:i]
        weights = [degree[n] for n in existing]
        n_links = 2 if i < CORE_SIZE else 1
        targets: set[str] = set()
        while len(targets) < n_links:
            targets.add(rng.choices(existing, weights=weights)[0])
        for t in sorted(targets):
            add_edge(new, t)

    nodes = {n: NodeInfo(CPU_CAPACITY, MEM_CAPACITY) for n in ids}
    server = max(ids, key=lambda n: (degree[n], n))
    clients = sorted(n for n in ids if degree[n] == 1)
    topo = Topology(nodes, [(u, v, DELAY_MS) for u, v in sorted(edges)],
                    server=server, clients=clients)

    out = Path(__file__).resolve().parent.parent / "data" / "isp100.topo"
    out.parent.mkdir(exist_ok=True)
    save_to_file(topo, out)
    ecc = max(topo.hops_to_server(n) for n in ids)
    print(f"{out}: {len(ids)} routers, {len(edges)} edges, server {server} "
          f"(degree {degree[server]}), {len(clients)} leaf clients, "
          f"max hops to server {ecc}")


if __name__ == "__main__":
    main()
