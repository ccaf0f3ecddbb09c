"""Global minimum cut (Stoer-Wagner) and reference-rooted side labelling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DisconnectedError, InfeasibleError
from .graph import AttackGraph


@dataclass(frozen=True)
class CutResult:
    """A global cut, normalised so the reference supernode is on the 0-side.

    Node sets hold supernode representatives; ``cut_edges`` are indices into
    the graph's edge list.
    """

    value: int
    side_of_reference: frozenset[int]
    attacked_side: frozenset[int]
    cut_edges: tuple[int, ...]


def stoer_wagner(weights: np.ndarray, start: int = 0) -> tuple[int, list[int]]:
    """Minimum cut of a dense symmetric non-negative integer weight matrix.

    Returns ``(value, side)`` where ``side`` is one shore of a minimum cut and
    never contains ``start``: every phase grows its ordering from the group
    holding ``start``. Maximum-adjacency ties go to the lowest index and the
    first phase reaching the minimum wins, so the result is a pure function
    of the matrix and ``start``.
    """
    W = np.array(weights, dtype=np.int64)
    k = W.shape[0]
    if k < 2:
        raise ValueError("a cut needs at least two nodes")
    groups = [[i] for i in range(k)]
    active = np.ones(k, dtype=bool)
    best_value, best_side = None, None
    root = start
    for _ in range(k - 1):
        alive = np.flatnonzero(active)
        in_a = ~active
        in_a[root] = True
        conn = W[root].copy()
        prev, last = root, root
        for _ in range(len(alive) - 1):
            # excluded nodes sink below any real connectivity (weights >= 0)
            nxt = int(np.argmax(np.where(in_a, -1, conn)))
            in_a[nxt] = True
            prev, last = last, nxt
            phase_cut = int(conn[nxt])
            conn += W[nxt]
        if best_value is None or phase_cut < best_value:
            best_value, best_side = phase_cut, list(groups[last])
        W[prev] += W[last]
        W[:, prev] += W[:, last]
        W[prev, prev] = 0
        W[last] = 0
        W[:, last] = 0
        active[last] = False
        groups[prev].extend(groups[last])
    return best_value, best_side


def _weight_matrix(g: AttackGraph, nodes: list[int]) -> np.ndarray:
    pos = {rep: k for k, rep in enumerate(nodes)}
    W = np.zeros((len(nodes), len(nodes)), dtype=np.int64)
    for e in g.edges:
        i, j = pos[e.u], pos[e.v]
        W[i, j] += e.weight
        W[j, i] += e.weight
    return W


def _cut_from_side(g: AttackGraph, side) -> CutResult:
    side = frozenset(side)
    if g.reference in side:
        side = frozenset(g.supernodes) - side
    rest = frozenset(g.supernodes) - side
    cut_edges = tuple(k for k, e in enumerate(g.edges) if (e.u in side) != (e.v in side))
    value = sum(g.edges[k].weight for k in cut_edges)
    return CutResult(value, rest, side, cut_edges)


def global_min_cut(g: AttackGraph) -> CutResult:
    if g.infeasible:
        raise InfeasibleError("every bus is contracted into the reference")
    if not g.is_connected():
        raise DisconnectedError("attack graph is disconnected")
    nodes = g.supernodes
    # phases start at the reference, so the returned shore is the attacked side
    value, side = stoer_wagner(_weight_matrix(g, nodes), start=nodes.index(g.reference))
    cut = _cut_from_side(g, (nodes[k] for k in side))
    assert cut.value == value
    return cut


def label_sides(g: AttackGraph, cut: CutResult) -> np.ndarray:
    """0-1 labels over the original ``n + 1`` nodes (reference last, always 0).

    Cut edges are removed and the graph is searched breadth-first from the
    reference supernode; reached supernodes get 0, the rest 1. Labels are
    expanded from supernodes to the buses they contain.
    """
    reached = g.reachable(g.reference, frozenset(cut.cut_edges))
    return np.array([0 if rep in reached else 1 for rep in g.supernode], dtype=np.int8)


def cut_value_of_labels(g: AttackGraph, labels) -> int:
    """Total weight of edges whose endpoints carry different labels."""
    return sum(e.weight for e in g.edges if labels[e.u] != labels[e.v])
