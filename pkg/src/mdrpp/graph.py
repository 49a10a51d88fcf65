"""Directed weighted multigraph with deterministic shortest-path queries.

Undirected edges are stored as two opposite arcs.  All queries are pure
functions over immutable graphs, so values can be shared freely between
threads.
"""

from __future__ import annotations

import heapq
from collections import Counter
from dataclasses import dataclass

EPS = 1e-9


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Arc:
    frm: int
    to: int
    weight: float


@dataclass(frozen=True)
class PathResult:
    cost: float
    nodes: tuple[int, ...]


def _as_arc(item) -> Arc:
    if isinstance(item, Arc):
        return Arc(int(item.frm), int(item.to), float(item.weight))
    frm, to, weight = item
    return Arc(int(frm), int(to), float(weight))


class WeightedGraph:
    """Immutable multigraph; parallel arcs are kept, self-loops rejected."""

    __slots__ = ("node_count", "arcs", "symmetric", "_adj", "_min_weight")

    def __init__(self, node_count: int, arcs, symmetric: bool = False):
        node_count = int(node_count)
        if node_count <= 0:
            raise GraphError("node_count must be positive")
        arcs = tuple(_as_arc(a) for a in arcs)
        for a in arcs:
            if not (0 <= a.frm < node_count and 0 <= a.to < node_count):
                raise GraphError(f"arc ({a.frm},{a.to}) references unknown node")
            if a.frm == a.to:
                raise GraphError(f"self-loop at node {a.frm} rejected")
            if a.weight < 0:
                raise GraphError(f"negative weight on arc ({a.frm},{a.to})")
        if symmetric:
            fwd = Counter((a.frm, a.to, a.weight) for a in arcs)
            rev = Counter((a.to, a.frm, a.weight) for a in arcs)
            if fwd != rev:
                raise GraphError("symmetric graph must contain both orientations of every edge")
        self.node_count = node_count
        self.arcs = arcs
        self.symmetric = bool(symmetric)
        # shortest-path relaxation only ever needs the cheapest parallel arc
        min_w: dict[tuple[int, int], float] = {}
        for a in arcs:
            key = (a.frm, a.to)
            if key not in min_w or a.weight < min_w[key]:
                min_w[key] = a.weight
        self._min_weight = min_w
        adj: list[list[tuple[int, float]]] = [[] for _ in range(node_count)]
        for (frm, to), w in sorted(min_w.items()):
            adj[frm].append((to, w))
        self._adj = adj

    def neighbors(self, node: int) -> list[tuple[int, float]]:
        return self._adj[node]

    def min_weight(self, frm: int, to: int) -> float | None:
        return self._min_weight.get((frm, to))

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and self.symmetric == other.symmetric
            and sorted((a.frm, a.to, a.weight) for a in self.arcs)
            == sorted((a.frm, a.to, a.weight) for a in other.arcs)
        )

    def __hash__(self) -> int:
        return hash((self.node_count, self.symmetric,
                     tuple(sorted((a.frm, a.to, a.weight) for a in self.arcs))))

    def __repr__(self) -> str:
        return (f"WeightedGraph(nodes={self.node_count}, arcs={len(self.arcs)}, "
                f"symmetric={self.symmetric})")


def _check_node(g: WeightedGraph, node: int) -> None:
    if not (0 <= node < g.node_count):
        raise GraphError(f"node {node} out of range [0, {g.node_count})")


def _lex_dijkstra(g: WeightedGraph, src: int, stop_at: int | None = None):
    """Dijkstra settling nodes in (cost, node-sequence) order.

    Heap entries carry the full path tuple, so equal-cost ties resolve to the
    lexicographically smallest node sequence.
    """
    best: dict[int, tuple[float, tuple[int, ...]]] = {}
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    while heap:
        cost, path = heapq.heappop(heap)
        u = path[-1]
        if u in best:
            continue
        best[u] = (cost, path)
        if u == stop_at:
            break
        for v, w in g.neighbors(u):
            if v not in best:
                heapq.heappush(heap, (cost + w, path + (v,)))
    return best


def shortest_path(g: WeightedGraph, src: int, dst: int) -> PathResult | None:
    """Minimum-cost walk from src to dst, or None if unreachable."""
    _check_node(g, src)
    _check_node(g, dst)
    best = _lex_dijkstra(g, src, stop_at=dst)
    if dst not in best:
        return None
    cost, path = best[dst]
    return PathResult(cost, path)


def shortest_path_to_set(g: WeightedGraph, src: int, targets) -> tuple[int, PathResult] | None:
    """Cheapest-to-reach member of targets; ties broken by smallest node id."""
    targets = set(targets)
    if not targets:
        raise GraphError("targets must be nonempty")
    _check_node(g, src)
    for t in targets:
        _check_node(g, t)
    best = _lex_dijkstra(g, src)
    reachable = [(best[t][0], t) for t in targets if t in best]
    if not reachable:
        return None
    cost, node = min(reachable)
    return node, PathResult(cost, best[node][1])


def is_connected(g: WeightedGraph) -> bool:
    """True iff every node is reachable from node 0 along stored arcs."""
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v, _ in g.neighbors(u):
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.node_count


def one_to_all(g: WeightedGraph, src: int) -> tuple[list[float], list[int]]:
    """Plain Dijkstra: (costs, parents) arrays; parent -1 where unreached."""
    _check_node(g, src)
    inf = float("inf")
    cost = [inf] * g.node_count
    parent = [-1] * g.node_count
    cost[src] = 0.0
    heap = [(0.0, src)]
    while heap:
        c, u = heapq.heappop(heap)
        if c > cost[u]:
            continue
        for v, w in g.neighbors(u):
            nc = c + w
            if nc < cost[v]:
                cost[v] = nc
                parent[v] = u
                heapq.heappush(heap, (nc, v))
    return cost, parent


def path_from_parents(parents: list[int], src: int, dst: int) -> tuple[int, ...]:
    nodes = [dst]
    while nodes[-1] != src:
        p = parents[nodes[-1]]
        if p < 0:
            raise GraphError(f"node {dst} not reached from {src}")
        nodes.append(p)
    nodes.reverse()
    return tuple(nodes)


def all_to_set(g: WeightedGraph, targets) -> tuple[list[float], list[int], list[int]]:
    """Multi-source Dijkstra over reversed arcs.

    Returns (cost, successor, target_of): cost[v] is the cheapest forward cost
    from v to any target, successor[v] the next hop on that walk, target_of[v]
    the target reached.  successor/target_of are -1 where no target is
    reachable (targets themselves have successor -1 and cost 0).
    """
    targets = sorted(set(targets))
    if not targets:
        raise GraphError("targets must be nonempty")
    radj: list[list[tuple[int, float]]] = [[] for _ in range(g.node_count)]
    for u in range(g.node_count):
        for v, w in g.neighbors(u):
            radj[v].append((u, w))
    for lst in radj:
        lst.sort()
    inf = float("inf")
    cost = [inf] * g.node_count
    succ = [-1] * g.node_count
    target_of = [-1] * g.node_count
    heap = []
    for t in targets:
        _check_node(g, t)
        cost[t] = 0.0
        target_of[t] = t
        heap.append((0.0, t))
    heapq.heapify(heap)
    while heap:
        c, v = heapq.heappop(heap)
        if c > cost[v]:
            continue
        for u, w in radj[v]:
            nc = c + w
            if nc < cost[u]:
                cost[u] = nc
                succ[u] = v
                target_of[u] = target_of[v]
                heapq.heappush(heap, (nc, u))
    return cost, succ, target_of


def path_to_set(succ: list[int], src: int) -> tuple[int, ...]:
    nodes = [src]
    while succ[nodes[-1]] != -1:
        nodes.append(succ[nodes[-1]])
    return tuple(nodes)
