"""Attack graph: measurements as edges of an (n+1)-node multigraph.

Internal node ``k`` is bus ``k + 1``; node ``n`` is the zero-angle
reference. A flow meter on line (i, j) is the edge {i, j}, an angle meter at
bus i is the edge {i, reference}. Protected meters and protected bus angles
are infinite-weight edges, which we realise by contracting their endpoints
into one supernode.
"""

from __future__ import annotations

from collections import defaultdict, deque
from dataclasses import dataclass

from scipy.cluster.hierarchy import DisjointSet

from .grid import FLOW, GridTopology, MeasurementSet


@dataclass(frozen=True)
class Edge:
    u: int
    v: int
    weight: int
    measurement_ids: tuple[int, ...]


@dataclass(frozen=True)
class AttackGraph:
    """Immutable snapshot of the (possibly contracted) attack graph.

    ``endpoints[j]`` holds the original nodes of measurement ``j`` (protected
    or not). ``supernode[k]`` is the representative of original node ``k``. The
    representative of the reference's class is always the reference itself;
    other classes are represented by their smallest node. Edges join
    representatives, carry ``u < v``, and are sorted by ``(u, v)``.
    """

    n_buses: int
    edges: tuple[Edge, ...]
    supernode: tuple[int, ...]
    endpoints: tuple[tuple[int, int], ...] = ()
    infeasible: bool = False

    @property
    def node_count(self) -> int:
        return self.n_buses + 1

    @property
    def reference(self) -> int:
        return self.n_buses

    @property
    def supernodes(self) -> list[int]:
        return sorted(set(self.supernode))

    def members(self, rep: int) -> list[int]:
        return [k for k, r in enumerate(self.supernode) if r == rep]

    def edge_of(self) -> dict[int, Edge]:
        """Measurement id -> the edge carrying it."""
        return {mid: e for e in self.edges for mid in e.measurement_ids}

    def adjacency(self) -> dict[int, list[tuple[int, int]]]:
        adj: dict[int, list[tuple[int, int]]] = defaultdict(list)
        for k, e in enumerate(self.edges):
            adj[e.u].append((e.v, k))
            adj[e.v].append((e.u, k))
        return adj

    def reachable(self, start: int, skip_edges=frozenset()) -> set[int]:
        """Supernodes reachable from ``start`` without using ``skip_edges`` (edge indices)."""
        adj = self.adjacency()
        seen = {start}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            for nxt, k in adj.get(node, ()):
                if k not in skip_edges and nxt not in seen:
                    seen.add(nxt)
                    queue.append(nxt)
        return seen

    def is_connected(self) -> bool:
        return self.reachable(self.reference) == set(self.supernodes)

    def to_dot(self, name: str = "attack_graph") -> str:
        def label(rep):
            parts = ["ref" if k == self.reference else str(k + 1) for k in self.members(rep)]
            return "{" + ",".join(parts) + "}"

        out = [f"graph {name} {{"]
        if self.infeasible:
            out.append("  // infeasible: every bus is contracted into the reference")
        for rep in self.supernodes:
            out.append(f'  n{rep} [label="{label(rep)}"];')
        for e in self.edges:
            ids = " ".join(str(i) for i in e.measurement_ids)
            out.append(f'  n{e.u} -- n{e.v} [label="{e.weight}", measurements="{ids}"];')
        out.append("}")
        return "\n".join(out) + "\n"


def _endpoints(topo: GridTopology, meas) -> tuple[int, int]:
    if meas.kind == FLOW:
        lo, hi = topo.lines[meas.target].endpoints
        return lo - 1, hi - 1
    return meas.target - 1, topo.n_buses


def _merge_edges(pairs, supernode) -> tuple[Edge, ...]:
    grouped: dict[tuple[int, int], list[int]] = defaultdict(list)
    for (a, b), mid in pairs:
        u, v = supernode[a], supernode[b]
        if u == v:
            continue
        grouped[(min(u, v), max(u, v))].append(mid)
    return tuple(Edge(u, v, len(ids), tuple(sorted(ids))) for (u, v), ids in sorted(grouped.items()))


def build_attack_graph(topo: GridTopology, ms: MeasurementSet) -> AttackGraph:
    """Graph of the unprotected measurements, before any contraction."""
    ms.validate(topo)
    ends = tuple(_endpoints(topo, meas) for meas in ms)
    pairs = [(ends[meas.id], meas.id) for meas in ms if not meas.protected]
    supernode = tuple(range(topo.n_buses + 1))
    return AttackGraph(topo.n_buses, _merge_edges(pairs, supernode), supernode, ends)


def apply_protections(g: AttackGraph, ms: MeasurementSet) -> AttackGraph:
    """Contract every protected measurement and protected state into supernodes.

    The result depends only on the set of protections, not on their order.
    """
    ref = g.reference
    ds = DisjointSet(range(g.node_count))
    for k, rep in enumerate(g.supernode):
        ds.merge(k, rep)
    for bus in ms.protected_states:
        ds.merge(bus - 1, ref)
    for meas in ms:
        if meas.protected:
            ds.merge(*g.endpoints[meas.id])

    rep_of = {}
    for members in ds.subsets():
        rep_of.update(dict.fromkeys(members, ref if ref in members else min(members)))
    supernode = tuple(rep_of[k] for k in range(g.node_count))

    pairs = [((e.u, e.v), mid) for e in g.edges for mid in e.measurement_ids]
    edges = _merge_edges(pairs, supernode)
    infeasible = len(set(supernode)) == 1
    return AttackGraph(g.n_buses, edges, supernode, g.endpoints, infeasible)


def attack_graph(topo: GridTopology, ms: MeasurementSet) -> AttackGraph:
    """Build and contract in one step (the graph the attacker actually faces)."""
    return apply_protections(build_attack_graph(topo, ms), ms)
