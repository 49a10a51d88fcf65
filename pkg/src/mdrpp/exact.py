"""Exact min-max solver for tiny instances plus a brute-force cross-check.

`solve_exact` runs depth-first branch and bound over assignments of required
edges (with orientation and in-trip order) to vehicle trips, with optional
repositioning hops between depots.  `enumerate_exhaustive` recomputes the
optimum by plain enumeration and exists only to cross-check the search.
Neither scales; both are ground truth for heuristic gaps and MILP checks.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass

from .graph import shortest_path
from .instance import Instance, RequiredEdge
from .solution import Route, Solution, Trip, covered_by_walk, route_time

EPS = 1e-9


class OracleSizeError(ValueError):
    pass


def _distance_matrix(inst: Instance) -> list[list[float]]:
    from .graph import one_to_all

    return [one_to_all(inst.graph, s)[0] for s in range(inst.graph.node_count)]


def _edge_weight(inst: Instance, tail: int, head: int) -> float:
    w = inst.graph.min_weight(tail, head)
    if w is None:
        return float("inf")
    return w


def _orientations(e: RequiredEdge):
    if e.directed:
        return [(e.frm, e.to)]
    return [(e.frm, e.to), (e.to, e.frm)]


def _cheapest_single_trip(inst: Instance, dist, e: RequiredEdge) -> float:
    """Cheapest depot-to-depot trip covering e, ignoring vehicle positions."""
    best = float("inf")
    for tail, head in _orientations(e):
        w = _edge_weight(inst, tail, head)
        for d1 in inst.depots:
            for d2 in inst.depots:
                c = dist[d1][tail] + w + dist[head][d2]
                if c < best:
                    best = c
    return best


@dataclass
class _TripPlan:
    legs: tuple[tuple[int, int], ...]  # oriented required edges, () = reposition
    end_depot: int
    duration: float


def _trip_options(inst: Instance, dist, depot: int, uncovered: tuple[RequiredEdge, ...],
                  max_edges: int):
    """All capacity-feasible trips from `depot`: repositioning hops and
    covering trips over ordered subsets of uncovered edges."""
    options: list[tuple[_TripPlan, frozenset]] = []
    cap = inst.capacity + EPS
    for d in inst.depots:
        if d != depot and dist[depot][d] <= cap:
            options.append((_TripPlan((), d, dist[depot][d]), frozenset()))
    indices = range(len(uncovered))
    for size in range(1, min(max_edges, len(uncovered)) + 1):
        for combo in itertools.permutations(indices, size):
            edges = [uncovered[i] for i in combo]
            for orients in itertools.product(*[_orientations(e) for e in edges]):
                run = 0.0
                pos = depot
                ok = True
                for tail, head in orients:
                    run += dist[pos][tail] + _edge_weight(inst, tail, head)
                    pos = head
                    if run > cap:
                        ok = False
                        break
                if not ok:
                    continue
                for d in inst.depots:
                    total = run + dist[pos][d]
                    if total <= cap:
                        options.append(
                            (_TripPlan(tuple(orients), d, total),
                             frozenset(combo)))
    return options


def solve_exact(inst: Instance, f_cap: int = 3, time_budget: float = 60.0,
                max_edges_per_trip: int | None = None
                ) -> tuple[Solution, bool] | None:
    """Provably optimal min-max solution, or best incumbent at budget expiry.

    Trips cover at most `max_edges_per_trip` required edges (default
    min(|E_u|, 3)); raising it restores completeness at exponential cost.
    Returns None when no feasible assignment exists within f_cap trips.
    """
    if f_cap < 1:
        raise OracleSizeError("f_cap must be positive")
    dist = _distance_matrix(inst)
    # parallel copies of a required edge are covered by one traversal
    required = tuple(dict.fromkeys(inst.required))
    if max_edges_per_trip is None:
        max_edges_per_trip = min(len(required), 3) or 1
    edge_bound = {e: _cheapest_single_trip(inst, dist, e) for e in required}
    deadline = time.monotonic() + time_budget

    best_plan: list[list[_TripPlan]] | None = None
    best_value = float("inf")
    complete = True

    n_veh = inst.vehicles
    rt = inst.recharge_time

    def vehicle_time(trips: list[_TripPlan]) -> float:
        return route_time([t.duration for t in trips], rt)

    def bound(times: list[float], uncovered: tuple[RequiredEdge, ...]) -> float:
        lb = max(times) if times else 0.0
        for e in uncovered:
            lb = max(lb, edge_bound[e])
        return lb

    def dfs(k: int, uncovered: tuple[RequiredEdge, ...],
            plans: list[list[_TripPlan]], times: list[float]) -> None:
        nonlocal best_plan, best_value, complete
        if time.monotonic() > deadline:
            complete = False
            return
        if k == n_veh:
            if not uncovered and max(times, default=0.0) < best_value - EPS:
                best_value = max(times, default=0.0)
                best_plan = [list(p) for p in plans]
            return
        if bound(times, uncovered) >= best_value - EPS:
            return

        def extend(depot: int, trips: list[_TripPlan],
                   remaining: tuple[RequiredEdge, ...]) -> None:
            nonlocal best_plan, best_value, complete
            if time.monotonic() > deadline:
                complete = False
                return
            t_here = vehicle_time(trips)
            # any remaining edge costs at least its cheapest covering trip,
            # whichever vehicle ends up taking it
            lb = bound(times + [t_here], remaining)
            if lb >= best_value - EPS:
                return
            # stop extending this vehicle; hand the rest to the next one
            plans[k] = list(trips)
            times.append(t_here)
            dfs(k + 1, remaining, plans, times)
            times.pop()
            plans[k] = []
            if len(trips) >= f_cap:
                return
            seen_repo = set()
            for plan, combo in _trip_options(inst, dist, depot, remaining,
                                             max_edges_per_trip):
                if not combo:
                    # skip zero-progress repositioning loops
                    if plan.end_depot in seen_repo or plan.end_depot == depot:
                        continue
                    seen_repo.add(plan.end_depot)
                if combo:
                    nxt = tuple(e for i, e in enumerate(remaining) if i not in combo)
                else:
                    nxt = remaining
                extend(plan.end_depot, trips + [plan], nxt)

        extend(inst.start_depot(k), [], uncovered)

    dfs(0, required, [[] for _ in range(n_veh)], [])
    if best_plan is None:
        return None
    return _materialize(inst, best_plan), complete


def _materialize(inst: Instance, plans: list[list[_TripPlan]]) -> Solution:
    routes = []
    for k, trips in enumerate(plans):
        pos = inst.start_depot(k)
        out = []
        for plan in trips:
            nodes: tuple[int, ...] = (pos,)
            for tail, head in plan.legs:
                leg = shortest_path(inst.graph, nodes[-1], tail)
                nodes = nodes + leg.nodes[1:] + (head,)
            back = shortest_path(inst.graph, nodes[-1], plan.end_depot)
            nodes = nodes + back.nodes[1:]
            out.append(Trip(nodes=nodes, duration=plan.duration,
                            covered=tuple(sorted(covered_by_walk(inst, nodes)))))
            pos = plan.end_depot
        routes.append(Route(k, tuple(out)))
    makespan = max(
        (route_time((t.duration for t in r.trips), inst.recharge_time) for r in routes),
        default=0.0)
    return Solution(tuple(routes), makespan, ())


def enumerate_exhaustive(inst: Instance, f_cap: int = 3,
                         max_edges_per_trip: int | None = None) -> float | None:
    """Brute-force optimum over every assignment/order/orientation/route shape.

    Guarded to |E_u| <= 5, K <= 2, f_cap <= 3; returns None when infeasible.
    """
    required = tuple(dict.fromkeys(inst.required))
    if len(required) > 5 or inst.vehicles > 2 or f_cap > 3:
        raise OracleSizeError("exhaustive enumeration guard exceeded "
                              "(|E_u| <= 5, K <= 2, f_cap <= 3)")
    if max_edges_per_trip is None:
        max_edges_per_trip = min(len(required), 3) or 1
    dist = _distance_matrix(inst)
    cap = inst.capacity + EPS
    depots = list(inst.depots)
    rt = inst.recharge_time

    def route_values(start: int, seq: tuple[tuple[int, int, float], ...]):
        """All route times covering `seq` (oriented legs) in order within f_cap
        trips, allowing interleaved repositioning hops."""
        results: list[float] = []

        def rec(i: int, depot: int, trips_left: int, durations: tuple[float, ...]):
            if i == len(seq):
                results.append(route_time(durations, rt))
                return
            if trips_left == 0:
                return
            # repositioning hop
            for d in depots:
                if d != depot and dist[depot][d] <= cap:
                    rec(i, d, trips_left - 1, durations + (dist[depot][d],))
            # covering trip over the next j legs
            for j in range(1, min(max_edges_per_trip, len(seq) - i) + 1):
                run = 0.0
                pos = depot
                ok = True
                for tail, head, w in seq[i:i + j]:
                    run += dist[pos][tail] + w
                    pos = head
                    if run > cap:
                        ok = False
                        break
                if not ok:
                    break
                for d in depots:
                    total = run + dist[pos][d]
                    if total <= cap:
                        rec(i + j, d, trips_left - 1, durations + (total,))

        rec(0, start, f_cap, ())
        return results

    best = float("inf")
    idx = range(len(required))
    for assign in itertools.product(range(inst.vehicles), repeat=len(required)):
        per_vehicle_best: list[float] = []
        feasible = True
        for k in range(inst.vehicles):
            mine = [required[i] for i in idx if assign[i] == k]
            if not mine:
                per_vehicle_best.append(0.0)
                continue
            best_k = float("inf")
            for perm in itertools.permutations(mine):
                for orients in itertools.product(*[_orientations(e) for e in perm]):
                    seq = tuple((tail, head, _edge_weight(inst, tail, head))
                                for tail, head in orients)
                    for value in route_values(inst.start_depot(k), seq):
                        if value < best_k:
                            best_k = value
            if best_k == float("inf"):
                feasible = False
                break
            per_vehicle_best.append(best_k)
        if feasible:
            value = max(per_vehicle_best)
            if value < best:
                best = value
    if best == float("inf"):
        return None
    return best
