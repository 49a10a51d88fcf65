"""Solution representation, objective evaluation, feasibility audit, file I/O."""

from __future__ import annotations

from dataclasses import dataclass

from .instance import Instance, RequiredEdge

EPS = 1e-9
DURATION_TOL = 1e-6


@dataclass(frozen=True)
class Trip:
    nodes: tuple[int, ...]
    duration: float
    covered: tuple[RequiredEdge, ...] = ()


@dataclass(frozen=True)
class Route:
    vehicle: int
    trips: tuple[Trip, ...]


@dataclass(frozen=True)
class Solution:
    routes: tuple[Route, ...]
    makespan: float
    uncovered: tuple[RequiredEdge, ...] = ()

    @property
    def complete(self) -> bool:
        return not self.uncovered


def route_time(durations, recharge_time: float) -> float:
    """Total trip time plus one recharge per trip boundary."""
    durations = list(durations)
    if any(d < 0 for d in durations):
        raise ValueError("trip durations must be nonnegative")
    if not durations:
        return 0.0
    return sum(durations) + (len(durations) - 1) * recharge_time


def evaluate_solution(inst: Instance, sol: Solution) -> float:
    """Makespan: worst route time across the fleet."""
    times = [route_time((t.duration for t in r.trips), inst.recharge_time)
             for r in sol.routes]
    return max(times, default=0.0)


def gap(m_heuristic: float, m_optimal: float) -> float:
    """Percentage excess of a heuristic makespan over the optimum."""
    if m_optimal <= 0:
        raise ValueError("optimal makespan must be positive")
    return (m_heuristic - m_optimal) / m_optimal * 100.0


def walk_cost(inst: Instance, nodes) -> float | None:
    """Cost of a node walk using the cheapest parallel arc, None on a non-arc."""
    total = 0.0
    for a, b in zip(nodes, nodes[1:]):
        w = inst.graph.min_weight(a, b)
        if w is None:
            return None
        total += w
    return total


def covered_by_walk(inst: Instance, nodes) -> set[RequiredEdge]:
    """Required edges traversed by a walk (direction-sensitive when directed)."""
    pairs = set(zip(nodes, nodes[1:]))
    out = set()
    for e in inst.required:
        if (e.frm, e.to) in pairs:
            out.add(e)
        elif not e.directed and (e.to, e.frm) in pairs:
            out.add(e)
    return out


def check_feasibility(inst: Instance, sol: Solution) -> list[str]:
    """Constraint audit; an empty report means feasible and complete."""
    findings: list[str] = []
    depot_set = set(inst.depots)
    covered: set[RequiredEdge] = set()
    for route in sol.routes:
        k = route.vehicle
        prev_end = None
        for f, trip in enumerate(route.trips):
            tag = f"vehicle {k} trip {f}"
            if not trip.nodes:
                findings.append(f"{tag}: empty node walk")
                continue
            if trip.nodes[0] not in depot_set:
                findings.append(f"{tag}: starts at non-depot node {trip.nodes[0]}")
            if trip.nodes[-1] not in depot_set:
                findings.append(f"{tag}: ends at non-depot node {trip.nodes[-1]}")
            if f == 0:
                if k < len(inst.start_depots) and trip.nodes[0] != inst.start_depot(k):
                    findings.append(
                        f"{tag}: starts at {trip.nodes[0]}, vehicle based at "
                        f"{inst.start_depot(k)}")
            elif prev_end is not None and trip.nodes[0] != prev_end:
                findings.append(
                    f"{tag}: starts at {trip.nodes[0]} but previous trip ended at {prev_end}")
            prev_end = trip.nodes[-1]
            cost = walk_cost(inst, trip.nodes)
            if cost is None:
                findings.append(f"{tag}: walk uses a non-arc")
                continue
            if abs(cost - trip.duration) > DURATION_TOL:
                findings.append(
                    f"{tag}: stated duration {trip.duration} differs from walk cost {cost}")
            if trip.duration > inst.capacity + EPS:
                findings.append(
                    f"{tag}: duration {trip.duration} exceeds capacity {inst.capacity}")
            covered |= covered_by_walk(inst, trip.nodes)
    for e in inst.required:
        if e not in covered:
            findings.append(f"required edge ({e.frm},{e.to}) not covered")
    return findings


def write_solution(inst: Instance, sol: Solution) -> str:
    lines = [f"SOLUTION {inst.name or 'unnamed'} {repr(float(sol.makespan))}"]
    for route in sol.routes:
        lines.append(f"ROUTE {route.vehicle}")
        for trip in route.trips:
            nodes = " ".join(str(n) for n in trip.nodes)
            lines.append(f"TRIP {repr(float(trip.duration))} {nodes}")
    for e in sol.uncovered:
        lines.append(f"UNCOVERED {e.frm} {e.to}")
    return "\n".join(lines) + "\n"


def write_unsolved(inst: Instance, reason: str) -> str:
    return f"UNSOLVED {reason}\n"


def parse_solution(text: str) -> Solution | str:
    """Parse a solution file; returns the Unsolved reason string when present."""
    routes: list[Route] = []
    cur_vehicle = None
    cur_trips: list[Trip] = []
    makespan = 0.0
    uncovered: list[RequiredEdge] = []

    def flush():
        if cur_vehicle is not None:
            routes.append(Route(cur_vehicle, tuple(cur_trips)))

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        kind = tokens[0].upper()
        try:
            if kind == "UNSOLVED":
                return " ".join(tokens[1:]) or "unspecified"
            if kind == "SOLUTION":
                makespan = float(tokens[-1])
            elif kind == "ROUTE":
                flush()
                cur_vehicle = int(tokens[1])
                cur_trips = []
            elif kind == "TRIP":
                duration = float(tokens[1])
                nodes = tuple(int(t) for t in tokens[2:])
                cur_trips.append(Trip(nodes, duration))
            elif kind == "UNCOVERED":
                uncovered.append(RequiredEdge(int(tokens[1]), int(tokens[2])))
            else:
                raise ValueError(f"unknown directive {tokens[0]!r}")
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {line_no}: {exc}") from exc
    flush()
    return Solution(tuple(routes), makespan, tuple(uncovered))
