"""Multi-depot adaptations of classic CARP construction heuristics.

All three reuse the multi-trip route semantics (trips chain depot to depot,
full recharge between trips) so results are comparable with the multi-trip
solver.  Failure to cover every required edge is an Unsolved value, never an
exception.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field

from .graph import WeightedGraph, all_to_set, one_to_all, path_from_parents, path_to_set
from .instance import Instance, RequiredEdge
from .solution import Route, Solution, Trip, covered_by_walk, route_time

EPS = 1e-9
CRITERIA = 5


@dataclass(frozen=True)
class BaselineResult:
    outcome: Solution | None
    reason: str | None = None
    criterion_used: int | None = None

    @property
    def solved(self) -> bool:
        return self.outcome is not None


class _Net:
    """Shortest-path tables over one (possibly residual) graph."""

    def __init__(self, graph: WeightedGraph, depots):
        self.graph = graph
        self.depots = sorted(set(depots))
        self.to_depot_cost, self.to_depot_succ, _ = all_to_set(graph, self.depots)
        self._from: dict[int, tuple[list[float], list[int]]] = {}

    def from_node(self, src: int) -> tuple[list[float], list[int]]:
        if src not in self._from:
            self._from[src] = one_to_all(self.graph, src)
        return self._from[src]

    def return_walk(self, node: int) -> tuple[int, ...]:
        return path_to_set(self.to_depot_succ, node)


@dataclass
class _Veh:
    location: int
    available: float = 0.0
    trips: list[Trip] = field(default_factory=list)
    stuck: bool = False


def _splice(nodes: tuple[int, ...], artificial: dict[tuple[int, int], tuple[int, ...]]
            ) -> tuple[int, ...]:
    if not artificial:
        return nodes
    out = [nodes[0]]
    for a, b in zip(nodes, nodes[1:]):
        detour = artificial.get((a, b))
        if detour is not None:
            out.extend(detour[1:])
        else:
            out.append(b)
    return tuple(out)


def _orientations(e: RequiredEdge):
    if e.directed:
        return [(e.frm, e.to)]
    return [(e.frm, e.to), (e.to, e.frm)]


def _criterion_key(criterion: int, deadhead: float, serve: float, ret: float,
                   idx: int, orient: int):
    # 0: nearest edge, 1/2: max/min distance back to a depot,
    # 3/4: max/min remaining-capacity fraction after serving
    if criterion == 0:
        return (deadhead, idx, orient)
    if criterion == 1:
        return (-ret, idx, orient)
    if criterion == 2:
        return (ret, idx, orient)
    if criterion == 3:
        return (serve, idx, orient)
    return (-serve, idx, orient)


def _build_trip(net: _Net, inst: Instance, start: int, uncovered, criterion: int,
                artificial) -> Trip | None:
    """One capacity-feasible trip from `start` greedily chaining required edges."""
    cur = start
    used = 0.0
    walk: tuple[int, ...] = (start,)
    while True:
        costs, parents = net.from_node(cur)
        best = None
        for idx, e in enumerate(uncovered):
            for orient, (tail, head) in enumerate(_orientations(e)):
                w = net.graph.min_weight(tail, head)
                if w is None:
                    continue
                deadhead = costs[tail]
                ret = net.to_depot_cost[head]
                total = used + deadhead + w + ret
                if total > inst.capacity + EPS:
                    continue
                key = _criterion_key(criterion, deadhead, deadhead + w, ret, idx, orient)
                if best is None or key < best[0]:
                    best = (key, tail, head, deadhead + w)
        if best is None:
            break
        _, tail, head, serve = best
        walk = walk + path_from_parents(parents, cur, tail)[1:] + (head,)
        used += serve
        cur = head
        # drop everything the walk has touched so far
        touched = covered_by_walk(inst, walk)
        uncovered = [e for e in uncovered if e not in touched]
    if cur == start and len(walk) == 1:
        return None
    walk = walk + net.return_walk(cur)[1:]
    duration = used + net.to_depot_cost[cur]
    real = _splice(walk, artificial)
    return Trip(nodes=real, duration=duration,
                covered=tuple(sorted(covered_by_walk(inst, real))))


def _scan_full(net: _Net, inst: Instance, fleet: list[_Veh], uncovered: list[RequiredEdge],
               criterion: int, artificial) -> None:
    """Run path scanning until no vehicle can add a covering trip.

    Mutates fleet and uncovered in place.
    """
    budget = 10 * max(1, len(inst.required)) + len(fleet)
    steps = 0
    while uncovered and steps < budget:
        steps += 1
        k = None
        for i, v in enumerate(fleet):
            if v.stuck:
                continue
            if k is None or v.available < fleet[k].available:
                k = i
        if k is None:
            break
        veh = fleet[k]
        trip = _build_trip(net, inst, veh.location, uncovered, criterion, artificial)
        if trip is None or not any(e in trip.covered for e in uncovered):
            veh.stuck = True
            continue
        if veh.trips:
            veh.available += inst.recharge_time
        veh.available += trip.duration
        veh.location = trip.nodes[-1]
        veh.trips.append(trip)
        covered = set(trip.covered)
        uncovered[:] = [e for e in uncovered if e not in covered]


def _fleet_solution(inst: Instance, fleet: list[_Veh], uncovered) -> Solution:
    routes = tuple(Route(k, tuple(v.trips)) for k, v in enumerate(fleet))
    makespan = max(
        (route_time((t.duration for t in r.trips), inst.recharge_time) for r in routes),
        default=0.0)
    return Solution(routes, makespan, tuple(uncovered))


def path_scanning(inst: Instance) -> BaselineResult:
    """Run all five scanning criteria; keep the lowest-makespan complete result."""
    net = _Net(inst.graph, inst.start_depots)
    best: tuple[float, int, Solution] | None = None
    for criterion in range(CRITERIA):
        fleet = [_Veh(location=inst.start_depot(k)) for k in range(inst.vehicles)]
        uncovered = list(inst.required)
        _scan_full(net, inst, fleet, uncovered, criterion, {})
        if uncovered:
            continue
        sol = _fleet_solution(inst, fleet, ())
        if best is None or (sol.makespan, criterion) < (best[0], best[1]):
            best = (sol.makespan, criterion, sol)
    if best is None:
        return BaselineResult(None, reason="no criterion covered every required edge")
    return BaselineResult(best[2], criterion_used=best[1])


def augment_merge(inst: Instance) -> BaselineResult:
    """Augment: one depot round trip per required edge; merge: concatenate
    routes anchored at the same depot while a single trip stays feasible."""
    anchors = sorted(set(inst.start_depots))
    dist_cache: dict[int, list[float]] = {}

    def costs_from(src: int) -> list[float]:
        if src not in dist_cache:
            dist_cache[src] = one_to_all(inst.graph, src)[0]
        return dist_cache[src]

    dist = {d: costs_from(d) for d in anchors}

    def chain_cost(depot: int, legs) -> float:
        total = 0.0
        pos = depot
        for tail, head in legs:
            w = inst.graph.min_weight(tail, head)
            if w is None:
                return float("inf")
            total += costs_from(pos)[tail] + w
            pos = head
        return total + costs_from(pos)[depot]

    routes: list[tuple[int, list[tuple[int, int]], float]] = []
    for e in inst.required:
        best = None
        for d in anchors:
            for tail, head in _orientations(e):
                w = inst.graph.min_weight(tail, head)
                if w is None:
                    continue
                back = costs_from(head)[d]
                cost = dist[d][tail] + w + back
                if cost <= inst.capacity + EPS and (best is None or cost < best[0]):
                    best = (cost, d, (tail, head))
        if best is None:
            return BaselineResult(
                None, reason=f"required edge ({e.frm},{e.to}) unreachable within capacity")
        routes.append((best[1], [best[2]], best[0]))

    merged = True
    while merged:
        merged = False
        routes.sort(key=lambda r: (-r[2], r[0]))
        for i in range(len(routes)):
            for j in range(len(routes)):
                if i == j or routes[i][0] != routes[j][0]:
                    continue
                depot = routes[i][0]
                for legs in (routes[i][1] + routes[j][1], routes[j][1] + routes[i][1]):
                    cost = chain_cost(depot, legs)
                    if cost <= inst.capacity + EPS and cost < routes[i][2] + routes[j][2] - EPS:
                        keep = (depot, list(legs), cost)
                        routes = [r for idx, r in enumerate(routes) if idx not in (i, j)]
                        routes.append(keep)
                        merged = True
                        break
                if merged:
                    break
            if merged:
                break

    fleet = [_Veh(location=inst.start_depot(k)) for k in range(inst.vehicles)]
    by_depot: dict[int, list[int]] = {}
    for k in range(inst.vehicles):
        by_depot.setdefault(inst.start_depot(k), []).append(k)
    for depot, legs, cost in sorted(routes, key=lambda r: (-r[2], r[0], r[1])):
        candidates = by_depot.get(depot)
        if not candidates:
            return BaselineResult(None, reason=f"no vehicle based at depot {depot}")
        k = min(candidates, key=lambda i: (fleet[i].available, i))
        veh = fleet[k]
        walk: tuple[int, ...] = (depot,)
        for tail, head in legs:
            _, parents = one_to_all(inst.graph, walk[-1])
            walk = walk + path_from_parents(parents, walk[-1], tail)[1:] + (head,)
        _, parents = one_to_all(inst.graph, walk[-1])
        walk = walk + path_from_parents(parents, walk[-1], depot)[1:]
        trip = Trip(nodes=walk, duration=cost,
                    covered=tuple(sorted(covered_by_walk(inst, walk))))
        if veh.trips:
            veh.available += inst.recharge_time
        veh.available += trip.duration
        veh.trips.append(trip)
    sol = _fleet_solution(inst, fleet, ())
    return BaselineResult(sol)


def construct_strike(inst: Instance) -> BaselineResult:
    """Alternate path-scanning passes with striking the traversed edges.

    When striking disconnects every start depot from the remaining required
    edges, artificial edges (weight = shortest-path cost in the original
    graph) rejoin them; the emitted walks splice the real path back in.
    Frequently Unsolved by design.
    """
    node_count = inst.graph.node_count
    residual_arcs = list(inst.graph.arcs)
    artificial: dict[tuple[int, int], tuple[int, ...]] = {}
    fleet = [_Veh(location=inst.start_depot(k)) for k in range(inst.vehicles)]
    uncovered = list(inst.required)
    passes = 0
    max_passes = 10 * max(1, len(inst.required))
    while uncovered:
        passes += 1
        if passes > max_passes:
            return BaselineResult(None, reason="pass budget exhausted")
        residual = WeightedGraph(node_count, residual_arcs, symmetric=False)
        best = None
        for criterion in range(CRITERIA):
            net = _Net(residual, inst.start_depots)
            fleet_copy = copy.deepcopy(fleet)
            for v in fleet_copy:
                v.stuck = False
            uncovered_copy = list(uncovered)
            _scan_full(net, inst, fleet_copy, uncovered_copy, criterion, artificial)
            progress = len(uncovered) - len(uncovered_copy)
            if progress == 0:
                continue
            makespan = _fleet_solution(inst, fleet_copy, uncovered_copy).makespan
            key = (-progress, makespan, criterion)
            if best is None or key < best[0]:
                best = (key, fleet_copy, uncovered_copy)
        if best is None:
            if not _add_artificial_edges(inst, residual_arcs, artificial, uncovered):
                return BaselineResult(None, reason="no progress after striking")
            continue
        _, fleet, new_uncovered = best
        struck = _walk_arcs(fleet, len(uncovered) - len(new_uncovered))
        residual_arcs = [a for a in residual_arcs
                         if (a.frm, a.to) not in struck and (a.to, a.frm) not in struck]
        uncovered = new_uncovered
    sol = _fleet_solution(inst, fleet, ())
    return BaselineResult(sol)


def _walk_arcs(fleet: list[_Veh], _progress: int) -> set[tuple[int, int]]:
    pairs: set[tuple[int, int]] = set()
    for v in fleet:
        for trip in v.trips:
            pairs.update(zip(trip.nodes, trip.nodes[1:]))
    return pairs


def _add_artificial_edges(inst: Instance, residual_arcs, artificial, uncovered) -> bool:
    from .graph import Arc, shortest_path

    endpoints = sorted({n for e in uncovered for n in (e.frm, e.to)})
    residual = WeightedGraph(inst.graph.node_count, residual_arcs, symmetric=False)
    added = False
    for d in sorted(set(inst.start_depots)):
        costs, _ = one_to_all(residual, d)
        if any(costs[v] < float("inf") for v in endpoints):
            continue
        best = None
        for v in endpoints:
            p = shortest_path(inst.graph, d, v)
            if p is not None and (best is None or p.cost < best.cost):
                best = p
        if best is None or len(best.nodes) < 2:
            continue
        v = best.nodes[-1]
        if (d, v) in artificial:
            continue
        residual_arcs.append(Arc(d, v, best.cost))
        residual_arcs.append(Arc(v, d, best.cost))
        artificial[(d, v)] = best.nodes
        artificial[(v, d)] = tuple(reversed(best.nodes))
        added = True
    return added
