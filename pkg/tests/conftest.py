"""Shared fixtures: hand-built instances and a seeded tiny-instance corpus."""

import pytest

from mdrpp import (
    GenSpec,
    Instance,
    RequiredEdge,
    WeightedGraph,
    generate_instance,
    random_connected_graph,
)


def undirected_graph(node_count: int, edges) -> WeightedGraph:
    arcs = []
    for i, j, w in edges:
        arcs.append((i, j, float(w)))
        arcs.append((j, i, float(w)))
    return WeightedGraph(node_count, arcs)


def reposition_instance() -> Instance:
    """One vehicle, one required edge out of direct reach: covering it from the
    start depot costs 7.5 > capacity 7, so the vehicle must first move to the
    second depot (trip 3.8) and cover the edge from there (trip 6.7)."""
    g = undirected_graph(8, [
        (0, 1, 2.3), (1, 5, 1.5), (1, 3, 3.0), (3, 5, 2.2),
        (0, 2, 4.0), (2, 4, 4.0), (4, 6, 4.0), (6, 7, 4.0),
        (7, 3, 4.0), (2, 6, 4.0), (4, 7, 4.0), (0, 7, 4.0),
    ])
    return Instance(
        graph=g, depots=(0, 5), required=(RequiredEdge(1, 3),),
        vehicles=1, capacity=7.0, recharge_time=1.1, start_depots=(0,),
        name="reposition-8")


def two_vehicle_instance() -> Instance:
    """Nine nodes, three depots, two vehicles, one required edge (7, 8).
    Both vehicles must reposition; the known optimum makespan is 18.8."""
    g = undirected_graph(9, [
        (4, 7, 2.0), (7, 8, 1.4), (8, 4, 2.0), (0, 1, 2.2), (1, 4, 2.2),
        (5, 6, 2.7), (6, 4, 2.7), (0, 2, 3.0), (2, 3, 3.0), (3, 8, 3.0),
        (1, 5, 4.0), (5, 7, 3.5), (2, 6, 2.0),
    ])
    return Instance(
        graph=g, depots=(0, 4, 5), required=(RequiredEdge(7, 8),),
        vehicles=2, capacity=6.0, recharge_time=9.0, start_depots=(0, 5),
        name="two-vehicle-9")


def trivial_instance() -> Instance:
    """One required edge adjacent to the start depot; solvable in one trip."""
    g = undirected_graph(4, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)])
    return Instance(
        graph=g, depots=(0, 2), required=(RequiredEdge(0, 1),),
        vehicles=1, capacity=5.0, recharge_time=0.5, start_depots=(0,),
        name="trivial-4")


def tiny_corpus(count: int = 60, offset: int = 0):
    """Seeded instances with at most 8 nodes, 12 edges, 4 required edges and
    2 vehicles.  A loose capacity override keeps most of them solvable; every
    third instance keeps the tight default, and every fifth is a wind set."""
    out = []
    for pos in range(count):
        seed = offset + pos
        n = 5 + seed % 4
        m = min(n + 1 + seed % 4, n * (n - 1) // 2, 12)
        base = random_connected_graph(n, m, seed, integer_weights=False,
                                      min_weight=1.0, max_weight=4.0)
        if seed % 5 == 4:
            spec = GenSpec(n, m, seed, set_kind="C", capacity_minutes=14.0)
        elif seed % 3 == 0:
            spec = GenSpec(n, m, seed, set_kind="A")
        else:
            spec = GenSpec(n, m, seed, set_kind="A", max_edge_weight=6.0)
        out.append(generate_instance(base, spec))
    return out


@pytest.fixture(scope="session")
def corpus():
    return tiny_corpus()
