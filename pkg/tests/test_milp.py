"""Model materialization: counts, writers, encode/check/decode, trip driver."""

import pytest

from mdrpp import (
    Instance,
    RequiredEdge,
    add_dummy_nodes,
    build_model,
    check_assignment,
    decode_solution,
    encode_solution,
    check_feasibility,
    solve_multitrip,
    write_lp,
    write_mps,
)
from mdrpp.milp import (
    ModelSizeError,
    SolveResult,
    SolverResourceLimit,
    TripCapExceeded,
    count_columns,
    iterative_f_driver,
)
from mdrpp.exact import solve_exact

from conftest import (
    reposition_instance,
    tiny_corpus,
    trivial_instance,
    undirected_graph,
)


def small_model(num_trips=2):
    inst, _ = add_dummy_nodes(reposition_instance())
    return inst, build_model(inst, num_trips)


def test_column_count_formula():
    inst, model = small_model()
    n_arcs = len(inst.graph.arcs)
    assert len(model.columns) == count_columns(
        n_arcs, len(inst.depots), inst.vehicles, 2)
    # the classic small shape: 1 vehicle, 1 trip, 11 edges (22 arcs), 2 depots
    assert count_columns(22, 2, 1, 1) == 26


def test_variable_families_and_bounds():
    _, model = small_model()
    kinds = {}
    for col, vi in zip(model.columns, model.var_index):
        kinds.setdefault(vi.kind, 0)
        kinds[vi.kind] += 1
        if vi.kind == "beta":
            assert not col.integer and col.objective == 1.0
        else:
            assert col.integer and (col.lower, col.upper) == (0.0, 1.0)
    assert kinds["beta"] == 1
    assert kinds["x"] == model.num_vehicles * model.num_trips * len(model.arcs)
    assert kinds["z"] == model.num_vehicles * model.num_trips


def test_big_m_is_twice_arc_count_plus_one():
    inst, model = small_model()
    assert model.big_m == 2 * len(inst.graph.arcs) + 1


def test_build_model_input_guards():
    inst, _ = small_model()
    with pytest.raises(ValueError):
        build_model(inst, 0)
    with pytest.raises(ValueError):
        build_model(inst, 1, subtour_mode="lazy")
    with pytest.raises(ModelSizeError) as err:
        build_model(inst, 1, subtour_cap=3)
    assert "cap" in str(err.value) and "3" in str(err.value)


def parse_lp(text: str):
    """Minimal CPLEX-LP reader returning (objective, rows, binaries)."""
    lines = [ln.strip() for ln in text.splitlines()
             if ln.strip() and not ln.startswith("\\")]
    section = None
    objective = {}
    rows = {}
    binaries = set()
    for ln in lines:
        low = ln.lower()
        if low in ("minimize", "subject to", "bounds", "binaries", "end"):
            section = low
            continue
        if section == "minimize":
            body = ln.split(":", 1)[1]
            objective = parse_expr(body)
        elif section == "subject to":
            name, body = ln.split(":", 1)
            for op in ("<=", ">=", "="):
                if op in body:
                    expr, rhs = body.rsplit(op, 1)
                    rows[name.strip()] = (parse_expr(expr), op, float(rhs))
                    break
        elif section == "binaries":
            binaries.add(ln)
    return objective, rows, binaries


def parse_expr(body: str):
    tokens = body.replace("+", " + ").replace("-", " - ").split()
    coeffs = {}
    sign = 1.0
    pending = None
    for tok in tokens:
        if tok == "+":
            sign = 1.0
        elif tok == "-":
            sign = -1.0
        else:
            try:
                pending = sign * float(tok)
            except ValueError:
                coeffs[tok] = coeffs.get(tok, 0.0) + (pending if pending is not None else sign)
                pending = None
                sign = 1.0
    return coeffs


def parse_mps(text: str):
    """Minimal fixed-MPS reader returning (objective, rows, binaries)."""
    section = None
    senses = {}
    order = []
    matrix = {}
    objective = {}
    rhs = {}
    binaries = set()
    integer = False
    for raw in text.splitlines():
        if not raw.strip():
            continue
        if not raw.startswith(" "):
            section = raw.split()[0]
            continue
        fields = raw.split()
        if section == "ROWS":
            sense, name = fields
            if sense == "N":
                continue
            senses[name] = sense
            order.append(name)
        elif section == "COLUMNS":
            if "'MARKER'" in fields:
                integer = fields[-1].strip("'") == "INTORG"
                continue
            col = fields[0]
            if integer:
                binaries.add(col)
            for pos in range(1, len(fields), 2):
                row, val = fields[pos], float(fields[pos + 1])
                if row == "COST":
                    objective[col] = val
                else:
                    matrix.setdefault(row, {})[col] = val
        elif section == "RHS":
            rhs[fields[1]] = float(fields[2])
    op_of = {"E": "=", "L": "<=", "G": ">="}
    rows = {name: (matrix.get(name, {}), op_of[senses[name]], rhs.get(name, 0.0))
            for name in order}
    return objective, rows, binaries


def model_matrix(model):
    objective = {c.name: c.objective for c in model.columns if c.objective != 0.0}
    op_of = {"E": "=", "L": "<=", "G": ">="}
    rows = {}
    for row in model.rows:
        coeffs = {}
        for col, coeff in row.coeffs:
            coeffs[model.columns[col].name] = coeffs.get(model.columns[col].name, 0.0) + coeff
        rows[row.name] = (coeffs, op_of[row.sense], row.rhs)
    binaries = {c.name for c in model.columns if c.integer}
    return objective, rows, binaries


def assert_same_matrix(a, b):
    obj_a, rows_a, bin_a = a
    obj_b, rows_b, bin_b = b
    assert obj_a.keys() == obj_b.keys()
    for k in obj_a:
        assert obj_a[k] == pytest.approx(obj_b[k])
    assert bin_a == bin_b
    assert rows_a.keys() == rows_b.keys()
    for name in rows_a:
        ca, opa, ra = rows_a[name]
        cb, opb, rb = rows_b[name]
        assert opa == opb and ra == pytest.approx(rb), name
        assert ca.keys() == cb.keys(), name
        for var in ca:
            assert ca[var] == pytest.approx(cb[var]), (name, var)


def test_lp_round_trip_to_identical_matrix():
    _, model = small_model()
    assert_same_matrix(parse_lp(write_lp(model)), model_matrix(model))


def test_mps_round_trip_to_identical_matrix():
    _, model = small_model()
    assert_same_matrix(parse_mps(write_mps(model)), model_matrix(model))


def test_lp_and_mps_agree_with_each_other():
    inst, _ = add_dummy_nodes(trivial_instance())
    model = build_model(inst, 1)
    assert_same_matrix(parse_lp(write_lp(model)), parse_mps(write_mps(model)))


def test_writers_are_deterministic():
    _, m1 = small_model()
    _, m2 = small_model()
    assert write_lp(m1) == write_lp(m2)
    assert write_mps(m1) == write_mps(m2)


def test_encode_satisfies_every_row():
    inst, _ = add_dummy_nodes(reposition_instance())
    sol = solve_multitrip(inst)
    assert sol.complete
    num_trips, assignment = encode_solution(inst, sol)
    model = build_model(inst, num_trips)
    assert check_assignment(model, assignment) == []
    assert assignment["beta"] == pytest.approx(sol.makespan)


def test_encode_rejects_repeated_arc_in_trip():
    # pendant edge walked twice in the same direction between depot visits
    g = undirected_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    inst = Instance(graph=g, depots=(0,), required=(RequiredEdge(1, 2),),
                    vehicles=1, capacity=20.0, recharge_time=0.5, start_depots=(0,))
    from mdrpp import Route, Solution, Trip

    walk = (0, 1, 2, 1, 2, 1, 0)  # arc (1,2) twice in one trip
    bad = Solution(
        (Route(0, (Trip(walk, 6.0, (RequiredEdge(1, 2),)),)),), 6.0, ())
    with pytest.raises(ValueError):
        encode_solution(inst, bad)


def test_encode_splits_trips_at_intermediate_depots():
    # a walk passing through depot 2 mid-trip becomes two model trips
    g = undirected_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
    inst = Instance(graph=g, depots=(0, 2), required=(RequiredEdge(1, 2),),
                    vehicles=1, capacity=9.0, recharge_time=0.5, start_depots=(0,))
    from mdrpp import Route, Solution, Trip

    walk = (0, 1, 2, 3, 0)
    sol = Solution((Route(0, (Trip(walk, 4.0, (RequiredEdge(1, 2),)),)),), 4.0, ())
    num_trips, assignment = encode_solution(inst, sol)
    assert num_trips == 2
    assert assignment["z_0_0"] == 1.0 and assignment["z_0_1"] == 1.0
    assert assignment["y_0_0_2"] == 1.0 and assignment["y_0_1_0"] == 1.0
    # beta reflects the split route: 2.0 + 0.5 + 2.0
    assert assignment["beta"] == pytest.approx(4.5)
    model = build_model(inst, num_trips)
    assert check_assignment(model, assignment) == []


def test_check_assignment_flags_violations():
    inst, model = small_model()
    sol = solve_multitrip(inst)
    num_trips, assignment = encode_solution(inst, sol)
    model = build_model(inst, num_trips)
    broken = dict(assignment)
    broken["beta"] = 0.0
    violated = check_assignment(model, broken)
    assert violated and all(name.startswith("makespan") for name in violated)


def test_decode_rebuilds_the_walks():
    inst, _ = add_dummy_nodes(reposition_instance())
    sol = solve_multitrip(inst)
    num_trips, assignment = encode_solution(inst, sol)
    decoded = decode_solution(inst, num_trips, assignment)
    assert decoded.makespan == pytest.approx(sol.makespan)
    assert check_feasibility(inst, decoded) == []


def test_encode_check_decode_on_corpus():
    checked = 0
    for inst in tiny_corpus(30):
        if inst.graph.node_count - len(inst.depots) > 10:
            continue
        prepped, _ = add_dummy_nodes(inst)
        sol = solve_multitrip(prepped)
        if not sol.complete:
            continue
        try:
            num_trips, assignment = encode_solution(prepped, sol)
        except ValueError:
            continue  # a walk reused one directed arc; not expressible
        model = build_model(prepped, num_trips)
        assert check_assignment(model, assignment) == []
        decoded = decode_solution(prepped, num_trips, assignment)
        # splitting a depot pass-through adds recharges, so the modelled
        # makespan can only meet or exceed the heuristic's
        assert decoded.makespan == pytest.approx(assignment["beta"], abs=1e-6)
        assert decoded.makespan >= sol.makespan - 1e-9
        assert check_feasibility(prepped, decoded) == []
        checked += 1
    assert checked >= 10


def oracle_callback(inst):
    """Trip-count feasibility callback backed by the exact solver."""
    prepped, _ = add_dummy_nodes(inst)

    def callback(model):
        out = solve_exact(prepped, f_cap=model.num_trips,
                          max_edges_per_trip=max(1, len(prepped.required)))
        if out is None:
            return SolveResult("infeasible")
        num_trips, assignment = encode_solution(prepped, out[0])
        if num_trips > model.num_trips:
            return SolveResult("infeasible")
        return SolveResult("optimal", assignment)

    return callback


def test_iterative_driver_needs_two_trips_for_repositioning():
    inst = reposition_instance()
    f_star, assignment = iterative_f_driver(inst, oracle_callback(inst))
    assert f_star == 2
    assert assignment["beta"] == pytest.approx(11.6, abs=1e-9)


def test_iterative_driver_single_trip_when_trivial():
    inst = trivial_instance()
    f_star, assignment = iterative_f_driver(inst, oracle_callback(inst))
    assert f_star == 1
    assert assignment["beta"] == pytest.approx(2.0)


def test_iterative_driver_cap_and_resource_limit():
    inst = trivial_instance()
    with pytest.raises(TripCapExceeded):
        iterative_f_driver(inst, lambda model: SolveResult("infeasible"), f_cap=3)
    with pytest.raises(SolverResourceLimit):
        iterative_f_driver(inst, lambda model: SolveResult("resource-limit"))
