"""MILP materialization, LP/MPS writers, iterative trip-count driver, decoding.

The model minimizes the makespan beta subject to trip tracking, chaining,
capacity, flow, coverage, trip-usage gating and fully enumerated subtour
rows.  Solving is delegated to a pluggable callback (no solver bindings);
assignments travel as {variable name: value} dictionaries.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .instance import Instance, RequiredEdge, add_dummy_nodes
from .solution import Route, Solution, Trip, covered_by_walk, route_time, walk_cost

INT_TOL = 1e-6


class ModelSizeError(ValueError):
    pass


class EncodeError(ValueError):
    pass


class DecodeError(ValueError):
    pass


class SolverResourceLimit(RuntimeError):
    """Raised by the driver when the callback reports a resource limit."""


class TripCapExceeded(RuntimeError):
    """Raised by the driver when no trip count up to the cap is feasible."""


@dataclass(frozen=True)
class VarIndex:
    kind: str  # 'x', 'y', 'z' or 'beta'
    k: int = -1
    f: int = -1
    i: int = -1
    j: int = -1
    d: int = -1
    arc: int = -1  # index into the model's canonical arc list ('x' only)


@dataclass(frozen=True)
class Column:
    name: str
    lower: float
    upper: float
    integer: bool
    objective: float


@dataclass(frozen=True)
class Row:
    name: str
    sense: str  # 'E', 'L' or 'G'
    rhs: float
    coeffs: tuple[tuple[int, float], ...]  # (column index, coefficient)


@dataclass
class MilpModel:
    name: str
    columns: list[Column]
    rows: list[Row]
    big_m: float
    num_vehicles: int
    num_trips: int
    var_index: list[VarIndex] = field(default_factory=list)
    arcs: list[tuple[int, int, float]] = field(default_factory=list)

    def column_id(self, name: str) -> int:
        if not hasattr(self, "_by_name"):
            self._by_name = {c.name: i for i, c in enumerate(self.columns)}
        return self._by_name[name]


def _canonical_arcs(inst: Instance) -> list[tuple[int, int, float]]:
    return sorted((a.frm, a.to, a.weight) for a in inst.graph.arcs)


def _arc_names(arcs) -> list[str]:
    seen: dict[tuple[int, int], int] = {}
    names = []
    for i, j, _ in arcs:
        n = seen.get((i, j), 0)
        seen[(i, j)] = n + 1
        names.append(f"{i}_{j}" if n == 0 else f"{i}_{j}_p{n}")
    return names


def _columns(inst: Instance, num_trips: int):
    arcs = _canonical_arcs(inst)
    arc_names = _arc_names(arcs)
    depots = sorted(inst.depots)
    columns: list[Column] = []
    var_index: list[VarIndex] = []
    for k in range(inst.vehicles):
        for f in range(num_trips):
            for a, (i, j, _) in enumerate(arcs):
                columns.append(Column(f"x_{k}_{f}_{arc_names[a]}", 0.0, 1.0, True, 0.0))
                var_index.append(VarIndex("x", k=k, f=f, i=i, j=j, arc=a))
    for k in range(inst.vehicles):
        for f in range(num_trips):
            for d in depots:
                columns.append(Column(f"y_{k}_{f}_{d}", 0.0, 1.0, True, 0.0))
                var_index.append(VarIndex("y", k=k, f=f, d=d))
    for k in range(inst.vehicles):
        for f in range(num_trips):
            columns.append(Column(f"z_{k}_{f}", 0.0, 1.0, True, 0.0))
            var_index.append(VarIndex("z", k=k, f=f))
    columns.append(Column("beta", 0.0, float("inf"), False, 1.0))
    var_index.append(VarIndex("beta"))
    return arcs, depots, columns, var_index


def count_columns(n_arcs: int, n_depots: int, vehicles: int, num_trips: int) -> int:
    return vehicles * num_trips * (n_arcs + n_depots + 1) + 1


def build_model(inst: Instance, num_trips: int, subtour_mode: str = "full-enumeration",
                subtour_cap: int = 16) -> MilpModel:
    """Materialize the formulation for a fixed trip count.

    The instance is expected to be dummy-node preprocessed (no required edge
    touching a depot) so subtour rows can quantify over non-depot node sets.
    Subtour rows are fully enumerated, guarded by `subtour_cap` on the number
    of non-depot nodes; pass subtour_mode='none' to skip them.
    """
    if num_trips < 1:
        raise ValueError("trip count must be positive")
    if subtour_mode not in ("full-enumeration", "none"):
        raise ValueError(f"unknown subtour mode {subtour_mode!r}")
    arcs, depots, columns, var_index = _columns(inst, num_trips)
    depot_set = set(depots)
    K, F = inst.vehicles, num_trips
    n_arcs = len(arcs)
    big_m = 2 * n_arcs + 1

    def xcol(k: int, f: int, a: int) -> int:
        return (k * F + f) * n_arcs + a

    y_base = K * F * n_arcs

    def ycol(k: int, f: int, d_idx: int) -> int:
        return y_base + (k * F + f) * len(depots) + d_idx

    z_base = y_base + K * F * len(depots)

    def zcol(k: int, f: int) -> int:
        return z_base + k * F + f

    beta_col = z_base + K * F
    depot_pos = {d: i for i, d in enumerate(depots)}
    arcs_out: dict[int, list[int]] = {}
    arcs_in: dict[int, list[int]] = {}
    for a, (i, j, _) in enumerate(arcs):
        arcs_out.setdefault(i, []).append(a)
        arcs_in.setdefault(j, []).append(a)

    rows: list[Row] = []

    # (1) first-trip start tracking at the base depot
    for k in range(K):
        coeffs = [(xcol(k, 0, a), 1.0) for a in arcs_out.get(inst.start_depot(k), [])]
        coeffs.append((zcol(k, 0), -1.0))
        rows.append(Row(f"start_{k}", "E", 0.0, tuple(coeffs)))
    # (2) trip ordering
    for k in range(K):
        for f in range(F - 1):
            rows.append(Row(f"order_{k}_{f}", "G", 0.0,
                            ((zcol(k, f), 1.0), (zcol(k, f + 1), -1.0))))
    # (3) trip-end tracking per depot
    for k in range(K):
        for f in range(F):
            for d in depots:
                coeffs = [(xcol(k, f, a), 1.0) for a in arcs_in.get(d, [])]
                coeffs.append((ycol(k, f, depot_pos[d]), -1.0))
                rows.append(Row(f"end_{k}_{f}_{d}", "E", 0.0, tuple(coeffs)))
    # (4) trip chaining
    for k in range(K):
        for f in range(1, F):
            for d in depots:
                coeffs = [(ycol(k, f - 1, depot_pos[d]), 1.0)]
                coeffs += [(xcol(k, f, a), -1.0) for a in arcs_out.get(d, [])]
                rows.append(Row(f"chain_{k}_{f}_{d}", "G", 0.0, tuple(coeffs)))
    # (5) used trips end at exactly one depot
    for k in range(K):
        for f in range(F):
            coeffs = [(zcol(k, f), 1.0)]
            coeffs += [(ycol(k, f, di), -1.0) for di in range(len(depots))]
            rows.append(Row(f"endexists_{k}_{f}", "E", 0.0, tuple(coeffs)))
    # (6) makespan including recharges
    for k in range(K):
        coeffs = []
        for f in range(F):
            for a, (_, _, w) in enumerate(arcs):
                if w != 0.0:
                    coeffs.append((xcol(k, f, a), w))
            if inst.recharge_time != 0.0:
                coeffs.append((zcol(k, f), inst.recharge_time))
        coeffs.append((beta_col, -1.0))
        rows.append(Row(f"makespan_{k}", "L", inst.recharge_time, tuple(coeffs)))
    # (7) per-trip capacity
    for k in range(K):
        for f in range(F):
            coeffs = [(xcol(k, f, a), w) for a, (_, _, w) in enumerate(arcs) if w != 0.0]
            rows.append(Row(f"capacity_{k}_{f}", "L", inst.capacity, tuple(coeffs)))
    # (8) depot in/out balance per trip
    for k in range(K):
        for f in range(F):
            bal: dict[int, float] = {}
            for a, (i, j, _) in enumerate(arcs):
                if i in depot_set:
                    bal[xcol(k, f, a)] = bal.get(xcol(k, f, a), 0.0) + 1.0
                if j in depot_set:
                    bal[xcol(k, f, a)] = bal.get(xcol(k, f, a), 0.0) - 1.0
            rows.append(Row(f"depotbal_{k}_{f}", "E", 0.0,
                            tuple((c, v) for c, v in sorted(bal.items()) if v != 0.0)))
    # (9) flow conservation at non-depot nodes
    for k in range(K):
        for f in range(F):
            for i in range(inst.graph.node_count):
                if i in depot_set:
                    continue
                coeffs = [(xcol(k, f, a), 1.0) for a in arcs_out.get(i, [])]
                coeffs += [(xcol(k, f, a), -1.0) for a in arcs_in.get(i, [])]
                if coeffs:
                    rows.append(Row(f"flow_{k}_{f}_{i}", "E", 0.0, tuple(coeffs)))
    # (10) required-edge coverage, both orientations for undirected edges
    for r, e in enumerate(inst.required):
        cols = []
        for k in range(K):
            for f in range(F):
                for a, (i, j, _) in enumerate(arcs):
                    if (i, j) == (e.frm, e.to) or (not e.directed and (i, j) == (e.to, e.frm)):
                        cols.append((xcol(k, f, a), 1.0))
        rows.append(Row(f"cover_{r}", "G", 1.0, tuple(cols)))
    # (11) trip-usage gating
    for k in range(K):
        for f in range(F):
            coeffs = [(xcol(k, f, a), 1.0) for a in range(n_arcs)]
            coeffs.append((zcol(k, f), -float(big_m)))
            rows.append(Row(f"gate_{k}_{f}", "L", 0.0, tuple(coeffs)))
    # (12) subtour elimination, fully enumerated
    if subtour_mode == "full-enumeration":
        rows.extend(_subtour_rows(inst, arcs, xcol, K, F, subtour_cap))

    return MilpModel(
        name=inst.name or "mdrpprv",
        columns=columns,
        rows=rows,
        big_m=float(big_m),
        num_vehicles=K,
        num_trips=F,
        var_index=var_index,
        arcs=list(arcs),
    )


def _subtour_rows(inst: Instance, arcs, xcol, K: int, F: int, cap: int) -> list[Row]:
    depot_set = set(inst.depots)
    free_nodes = [n for n in range(inst.graph.node_count) if n not in depot_set]
    if len(free_nodes) > cap:
        raise ModelSizeError(
            f"{len(free_nodes)} non-depot nodes exceed the subtour enumeration cap "
            f"of {cap}; raise the cap or use subtour_mode='none'")
    oriented = []
    for e in inst.required:
        oriented.append((e.frm, e.to))
        if not e.directed:
            oriented.append((e.to, e.frm))
    arc_ids: dict[tuple[int, int], list[int]] = {}
    for a, (i, j, _) in enumerate(arcs):
        arc_ids.setdefault((i, j), []).append(a)
    rows: list[Row] = []
    n_row = 0
    for size in range(2, len(free_nodes) + 1):
        for subset in itertools.combinations(free_nodes, size):
            s = set(subset)
            inside = [(p, q) for (p, q) in oriented if p in s and q in s]
            if not inside:
                continue
            crossing = [a for a, (i, j, _) in enumerate(arcs) if (i in s) != (j in s)]
            for anchor, (p, q) in enumerate(inside):
                for copy_no, pq_arc in enumerate(arc_ids.get((p, q), [])):
                    for k in range(K):
                        for f in range(F):
                            coeffs = {xcol(k, f, a): 1.0 for a in crossing}
                            key = xcol(k, f, pq_arc)
                            coeffs[key] = coeffs.get(key, 0.0) - 2.0
                            rows.append(Row(
                                f"subtour_{n_row}_{anchor}_{copy_no}_{k}_{f}",
                                "G", 0.0, tuple(sorted(coeffs.items()))))
            n_row += 1
    return rows


def _num(x: float) -> str:
    if x == int(x) and abs(x) < 1e15:
        return str(int(x))
    return repr(x)


def write_lp(model: MilpModel) -> str:
    """CPLEX-LP text with deterministic row and column order."""
    out = [f"\\ {model.name}", "Minimize"]
    obj_terms = [f"{_num(c.objective)} {c.name}" for c in model.columns if c.objective != 0.0]
    out.append(" obj: " + " + ".join(obj_terms))
    out.append("Subject To")
    for row in model.rows:
        terms = []
        for col, coeff in row.coeffs:
            sign = "+" if coeff >= 0 else "-"
            terms.append(f"{sign} {_num(abs(coeff))} {model.columns[col].name}")
        expr = " ".join(terms).lstrip("+ ") if terms else "0 " + model.columns[0].name
        op = {"E": "=", "L": "<=", "G": ">="}[row.sense]
        out.append(f" {row.name}: {expr} {op} {_num(row.rhs)}")
    out.append("Bounds")
    for c in model.columns:
        if c.integer:
            continue
        upper = "+inf" if c.upper == float("inf") else _num(c.upper)
        out.append(f" {_num(c.lower)} <= {c.name} <= {upper}")
    binaries = [c.name for c in model.columns if c.integer]
    if binaries:
        out.append("Binaries")
        for name in binaries:
            out.append(f" {name}")
    out.append("End")
    return "\n".join(out) + "\n"


def write_mps(model: MilpModel) -> str:
    """Fixed-layout MPS text with deterministic ordering."""
    lines = [f"NAME          {model.name[:60]}"]
    lines.append("ROWS")
    lines.append(" N  COST")
    for row in model.rows:
        lines.append(f" {row.sense}  {row.name}")
    lines.append("COLUMNS")
    by_col: dict[int, list[tuple[str, float]]] = {}
    for row in model.rows:
        for col, coeff in row.coeffs:
            by_col.setdefault(col, []).append((row.name, coeff))
    in_int = False
    marker = 0
    for idx, c in enumerate(model.columns):
        if c.integer != in_int:
            tag = "INTORG" if c.integer else "INTEND"
            lines.append(f"    MARKER{marker}                 'MARKER'                 '{tag}'")
            in_int = c.integer
            marker += 1
        entries = []
        if c.objective != 0.0:
            entries.append(("COST", c.objective))
        entries.extend(by_col.get(idx, []))
        for pos in range(0, len(entries), 2):
            chunk = entries[pos:pos + 2]
            parts = [f"    {c.name:<24}"]
            for rname, coeff in chunk:
                parts.append(f"{rname:<20} {_num(coeff):<14}")
            lines.append("".join(parts).rstrip())
    if in_int:
        lines.append(f"    MARKER{marker}                 'MARKER'                 'INTEND'")
    lines.append("RHS")
    for row in model.rows:
        if row.rhs != 0.0:
            lines.append(f"    RHS                     {row.name:<20} {_num(row.rhs)}")
    lines.append("BOUNDS")
    for c in model.columns:
        if c.integer:
            lines.append(f" BV BND                    {c.name}")
        else:
            if c.lower != 0.0:
                lines.append(f" LO BND                    {c.name:<24} {_num(c.lower)}")
            if c.upper != float("inf"):
                lines.append(f" UP BND                    {c.name:<24} {_num(c.upper)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def check_assignment(model: MilpModel, assignment: dict[str, float],
                     tol: float = INT_TOL) -> list[str]:
    """Names of rows the assignment violates (missing variables read as 0)."""
    values = [assignment.get(c.name, 0.0) for c in model.columns]
    violated = []
    for row in model.rows:
        lhs = sum(values[col] * coeff for col, coeff in row.coeffs)
        ok = (
            abs(lhs - row.rhs) <= tol if row.sense == "E"
            else lhs <= row.rhs + tol if row.sense == "L"
            else lhs >= row.rhs - tol
        )
        if not ok:
            violated.append(row.name)
    return violated


def encode_solution(inst: Instance, sol: Solution) -> tuple[int, dict[str, float]]:
    """Express a feasible Solution as a variable assignment.

    Trips that pass through a depot mid-walk are split at each depot visit
    (the formulation's end-tracking rows admit exactly one depot entry per
    trip), so the returned trip count can exceed the solution's own.
    """
    arcs = _canonical_arcs(inst)
    arc_names = _arc_names(arcs)
    cheapest: dict[tuple[int, int], tuple[float, int]] = {}
    for a, (i, j, w) in enumerate(arcs):
        if (i, j) not in cheapest or w < cheapest[(i, j)][0]:
            cheapest[(i, j)] = (w, a)
    depot_set = set(inst.depots)

    split_routes: list[list[tuple[int, ...]]] = []
    for route in sol.routes:
        segments: list[tuple[int, ...]] = []
        for trip in route.trips:
            seg = [trip.nodes[0]]
            for node in trip.nodes[1:]:
                seg.append(node)
                if node in depot_set:
                    if len(seg) > 1:
                        segments.append(tuple(seg))
                    seg = [node]
            if len(seg) > 1:
                raise EncodeError(
                    f"vehicle {route.vehicle}: trip does not end at a depot")
        split_routes.append(segments)

    num_trips = max((len(s) for s in split_routes), default=1) or 1
    assignment: dict[str, float] = {}
    beta = 0.0
    for k, segments in enumerate(split_routes):
        durations = []
        for f, seg in enumerate(segments):
            used: set[int] = set()
            d = 0.0
            for i, j in zip(seg, seg[1:]):
                if (i, j) not in cheapest:
                    raise EncodeError(f"walk uses non-arc ({i},{j})")
                w, a = cheapest[(i, j)]
                if a in used:
                    raise EncodeError(
                        f"vehicle {k} trip {f}: arc ({i},{j}) traversed twice; "
                        "binary arc variables cannot express this walk")
                used.add(a)
                d += w
                assignment[f"x_{k}_{f}_{arc_names[a]}"] = 1.0
            assignment[f"z_{k}_{f}"] = 1.0
            assignment[f"y_{k}_{f}_{seg[-1]}"] = 1.0
            durations.append(d)
        beta = max(beta, route_time(durations, inst.recharge_time))
    assignment["beta"] = beta
    return num_trips, assignment


def decode_solution(inst: Instance, num_trips: int, assignment: dict[str, float]) -> Solution:
    """Rebuild trips from an assignment by Eulerian walk extraction."""
    arcs = _canonical_arcs(inst)
    arc_names = _arc_names(arcs)
    routes = []
    beta = assignment.get("beta", 0.0)
    for k in range(inst.vehicles):
        trips: list[Trip] = []
        pos = inst.start_depot(k)
        for f in range(num_trips):
            if assignment.get(f"z_{k}_{f}", 0.0) < 1 - INT_TOL:
                break
            chosen = [a for a in range(len(arcs))
                      if assignment.get(f"x_{k}_{f}_{arc_names[a]}", 0.0) > 1 - INT_TOL]
            end = [d for d in sorted(inst.depots)
                   if assignment.get(f"y_{k}_{f}_{d}", 0.0) > 1 - INT_TOL]
            if len(end) != 1:
                raise DecodeError(f"vehicle {k} trip {f}: ambiguous end depot {end}")
            walk = _euler_walk(arcs, chosen, pos, end[0])
            if walk is None:
                raise DecodeError(
                    f"vehicle {k} trip {f}: arcs do not form a depot-to-depot walk")
            duration = sum(arcs[a][2] for a in chosen)
            trips.append(Trip(nodes=walk, duration=duration,
                              covered=tuple(sorted(covered_by_walk(inst, walk)))))
            pos = end[0]
        routes.append(Route(k, tuple(trips)))
    makespan = max(
        (route_time((t.duration for t in r.trips), inst.recharge_time) for r in routes),
        default=0.0)
    if abs(makespan - beta) > 1e-6 and beta:
        raise DecodeError(f"decoded makespan {makespan} disagrees with beta {beta}")
    return Solution(tuple(routes), makespan, ())


def _euler_walk(arcs, chosen, start: int, end: int) -> tuple[int, ...] | None:
    if not chosen:
        return None
    out: dict[int, list[int]] = {}
    for a in sorted(chosen, key=lambda a: arcs[a][:2]):
        out.setdefault(arcs[a][0], []).append(a)
    for lst in out.values():
        lst.reverse()  # pop() yields smallest (i, j) first
    stack = [start]
    walk: list[int] = []
    used = 0
    while stack:
        v = stack[-1]
        if out.get(v):
            a = out[v].pop()
            stack.append(arcs[a][1])
            used += 1
        else:
            walk.append(stack.pop())
    walk.reverse()
    if used != len(chosen) or walk[0] != start or walk[-1] != end:
        return None
    return tuple(walk)


@dataclass(frozen=True)
class SolveResult:
    status: str  # 'optimal', 'infeasible' or 'resource-limit'
    assignment: dict[str, float] | None = None


def iterative_f_driver(inst: Instance, solve_callback, f_cap: int = 8,
                       subtour_mode: str = "full-enumeration",
                       subtour_cap: int = 16) -> tuple[int, dict[str, float]]:
    """Grow the trip count from 1 until the callback reports optimality.

    The instance is dummy-node preprocessed before model building.  A
    resource-limit report stops the driver immediately; exhausting f_cap
    raises TripCapExceeded.
    """
    prepped, _ = add_dummy_nodes(inst)
    for f in range(1, f_cap + 1):
        model = build_model(prepped, f, subtour_mode=subtour_mode, subtour_cap=subtour_cap)
        result = solve_callback(model)
        if result.status == "optimal":
            return f, result.assignment
        if result.status == "resource-limit":
            raise SolverResourceLimit(f"solver hit a resource limit at trip count {f}")
        if result.status != "infeasible":
            raise ValueError(f"unknown callback status {result.status!r}")
    raise TripCapExceeded(f"no feasible trip count up to cap {f_cap}")
