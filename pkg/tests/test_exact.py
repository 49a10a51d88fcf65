"""Exact solver vs. independent brute-force enumeration, plus invariants."""

import pytest

from mdrpp import (
    Instance,
    OracleSizeError,
    RequiredEdge,
    WeightedGraph,
    add_dummy_nodes,
    check_feasibility,
    enumerate_exhaustive,
    solve_exact,
)

from conftest import (
    reposition_instance,
    tiny_corpus,
    trivial_instance,
    two_vehicle_instance,
    undirected_graph,
)


def test_exact_matches_hand_fixture():
    inst = two_vehicle_instance()
    out = solve_exact(inst)
    assert out is not None
    sol, proven = out
    assert proven
    assert sol.makespan == pytest.approx(18.8, abs=1e-9)
    assert check_feasibility(inst, sol) == []


def test_exact_on_reposition_fixture():
    inst = reposition_instance()
    out = solve_exact(inst)
    assert out is not None
    sol, proven = out
    assert proven
    assert sol.makespan == pytest.approx(11.6, abs=1e-9)
    assert check_feasibility(inst, sol) == []


def test_exact_hand_computable_square():
    # square of unit edges, one required edge opposite the depot: the only
    # route shape is out-around-and-back, optimum 4.0
    g = undirected_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
    inst = Instance(graph=g, depots=(0,), required=(RequiredEdge(2, 3),),
                    vehicles=1, capacity=10.0, recharge_time=2.0, start_depots=(0,))
    out = solve_exact(inst)
    assert out[0].makespan == pytest.approx(4.0)


def test_exhaustive_equals_branch_and_bound_on_corpus():
    agreements = 0
    for inst in tiny_corpus(55):
        ref = enumerate_exhaustive(inst)
        out = solve_exact(inst)
        if ref is None:
            assert out is None
        else:
            assert out is not None
            assert out[0].makespan == pytest.approx(ref, abs=1e-9)
            assert check_feasibility(inst, out[0]) == []
            agreements += 1
    assert agreements >= 25


def test_objective_scales_with_weights():
    # multiplying every weight, the capacity and the recharge time by c
    # multiplies the optimum by c
    inst = two_vehicle_instance()
    base = solve_exact(inst)[0].makespan
    c = 2.5
    scaled_graph = WeightedGraph(
        inst.graph.node_count,
        [(a.frm, a.to, a.weight * c) for a in inst.graph.arcs])
    scaled = Instance(graph=scaled_graph, depots=inst.depots,
                      required=inst.required, vehicles=inst.vehicles,
                      capacity=inst.capacity * c,
                      recharge_time=inst.recharge_time * c,
                      start_depots=inst.start_depots)
    assert solve_exact(scaled)[0].makespan == pytest.approx(base * c, abs=1e-9)


def test_extra_vehicle_never_hurts():
    inst = reposition_instance()
    base = solve_exact(inst)[0].makespan
    more = Instance(graph=inst.graph, depots=inst.depots, required=inst.required,
                    vehicles=2, capacity=inst.capacity,
                    recharge_time=inst.recharge_time, start_depots=(0, 0))
    assert solve_exact(more)[0].makespan <= base + 1e-9


def test_dummy_nodes_do_not_change_optimum():
    changed = 0
    for inst in tiny_corpus(30):
        depot_set = set(inst.depots)
        touches = any(e.frm in depot_set or e.to in depot_set for e in inst.required)
        if not touches:
            continue
        prepped, remap = add_dummy_nodes(inst)
        assert remap
        a = solve_exact(inst)
        b = solve_exact(prepped)
        if a is None:
            assert b is None
        else:
            assert b is not None
            assert a[0].makespan == pytest.approx(b[0].makespan, abs=1e-9)
        changed += 1
    assert changed >= 10


def test_infeasible_returns_none():
    # the required edge round trip exceeds capacity from every depot
    g = undirected_graph(3, [(0, 1, 5.0), (1, 2, 5.0)])
    inst = Instance(graph=g, depots=(0,), required=(RequiredEdge(1, 2),),
                    vehicles=1, capacity=6.0, recharge_time=1.0, start_depots=(0,))
    assert solve_exact(inst) is None
    assert enumerate_exhaustive(inst) is None


def test_exhaustive_guard_raises():
    inst = two_vehicle_instance()
    with pytest.raises(OracleSizeError):
        enumerate_exhaustive(inst, f_cap=4)
    with pytest.raises(OracleSizeError):
        solve_exact(inst, f_cap=0)


def test_duplicate_required_edges_collapse():
    g = undirected_graph(3, [(0, 1, 1.0), (1, 2, 1.0)])
    base = Instance(graph=g, depots=(0,), required=(RequiredEdge(0, 1),),
                    vehicles=1, capacity=9.0, recharge_time=1.0, start_depots=(0,))
    dup = Instance(graph=g, depots=(0,),
                   required=(RequiredEdge(0, 1), RequiredEdge(0, 1)),
                   vehicles=1, capacity=9.0, recharge_time=1.0, start_depots=(0,))
    assert solve_exact(dup)[0].makespan == pytest.approx(
        solve_exact(base)[0].makespan)
    assert enumerate_exhaustive(dup) == pytest.approx(enumerate_exhaustive(base))
