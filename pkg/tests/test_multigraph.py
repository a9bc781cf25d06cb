"""Construction, cut counting, contraction and Eulerian tours."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modk.errors import GraphError
from modk.generators import complete_graph, cycle_graph, scaled
from modk.multigraph import MultiGraph, Orientation
from strategies import graph_and_subset, multigraphs


# -- construction -----------------------------------------------------


def test_loops_rejected():
    with pytest.raises(GraphError):
        MultiGraph.from_edges(3, [(0, 0)])


def test_endpoint_outside_vertex_set_rejected():
    with pytest.raises(GraphError):
        MultiGraph.from_edges(2, [(0, 5)])


def test_single_vertex_graph_is_valid():
    g = MultiGraph.from_edges(1, [])
    assert g.n == 1 and g.m == 0
    assert g.is_connected()


def test_parallel_edges_are_distinct():
    g = MultiGraph.from_edges(2, [(0, 1), (0, 1), (1, 0)])
    assert g.m == 3
    assert g.parallel_edges(0, 1) == (0, 1, 2)
    assert g.degree(0) == 3


def test_incident_ids_ascending():
    g = MultiGraph.from_edges(3, [(1, 0), (0, 2), (0, 1)])
    assert g.incident(0) == (0, 1, 2)
    assert g.neighbors(0) == (1, 2)


# -- cuts -------------------------------------------------------------


def test_boundary_examples():
    c4 = cycle_graph(4)
    k4 = complete_graph(4)
    assert c4.boundary({0}) == 2
    assert k4.boundary({0, 1}) == 4
    assert k4.boundary(k4.vertices) == 0


@given(graph_and_subset())
def test_boundary_symmetric(ga):
    g, A = ga
    comp = set(g.vertices) - set(A)
    assert g.boundary(A) == g.boundary(comp)


@given(graph_and_subset(), st.randoms(use_true_random=False))
def test_boundary_disjoint_union(ga, rng):
    g, A = ga
    rest = [v for v in g.vertices if v not in A]
    B = tuple(v for v in rest if rng.random() < 0.5)
    lhs = g.boundary(set(A) | set(B))
    assert lhs == g.boundary(A) + g.boundary(B) - 2 * g.between(A, B)


# -- contraction ------------------------------------------------------


def test_contract_cycle_edge():
    g, vmap = cycle_graph(4).contract({0, 1})
    assert g.vertices == (0, 2, 3)
    assert g.m == 3
    assert vmap[1] == 0
    # shape: a triangle on the merged vertex and the two untouched ones
    assert sorted(tuple(sorted(uv)) for _, *uv in g.edges()) == [(0, 2), (0, 3), (2, 3)]


def test_contract_triangle_of_k4_leaves_parallel_class():
    g, _ = complete_graph(4).contract({0, 1, 2})
    assert g.vertices == (0, 3)
    assert g.m == 3
    assert g.parallel_edges(0, 3) == g.edge_ids()


def test_contract_everything():
    g, _ = complete_graph(4).contract({0, 1, 2, 3})
    assert g.vertices == (0,)
    assert g.m == 0


@given(graph_and_subset())
def test_contract_boundary_identity(ga):
    g, A = ga
    contracted, vmap = g.contract(A)
    a = vmap[A[0]]
    assert contracted.boundary({a}) == g.boundary(A)
    # surviving edges keep their ids
    assert set(contracted.edge_ids()) == set(g.boundary_edges(A)) | {
        e for e, u, v in g.edges() if u not in A and v not in A
    }


# -- derived graphs ---------------------------------------------------


def test_delete_and_keep_are_complementary():
    g = complete_graph(4)
    kept = g.keep_edges({0, 1, 2})
    dropped = g.delete_edges({0, 1, 2})
    assert set(kept.edge_ids()) | set(dropped.edge_ids()) == set(g.edge_ids())
    assert kept.vertices == g.vertices == dropped.vertices


def test_add_edges_assigns_fresh_ids():
    g = cycle_graph(3)
    g2, new = g.add_edges([(0, 1), (1, 2)])
    assert new == (3, 4)
    assert g2.m == 5
    assert g.m == 3  # original untouched


def test_remove_vertex():
    g = complete_graph(4).remove_vertex(3)
    assert g.vertices == (0, 1, 2)
    assert g.m == 3


def test_spanning_forest_prefers_small_ids():
    g = MultiGraph.from_edges(3, [(0, 1), (0, 1), (1, 2)])
    assert g.spanning_forest() == (0, 2)


# -- Eulerian tours ---------------------------------------------------


def test_tour_on_doubled_edge():
    g = scaled(MultiGraph.from_edges(2, [(0, 1)]), 2)
    tour = g.eulerian_tour(start=0)
    assert len(tour) == 2


def test_tour_on_doubled_cycle_covers_every_edge_once():
    g = scaled(cycle_graph(4), 2)
    tour = g.eulerian_tour(start=0)
    assert len(tour) == 8
    assert sorted(tour) == sorted(g.edge_ids())
    # consecutive edges share an endpoint
    at = 0
    for e in tour:
        assert at in g.endpoints(e)
        at = g.other_end(e, at)
    assert at == 0


def test_tour_rejects_odd_degree():
    with pytest.raises(GraphError):
        cycle_graph(4).delete_edges({0}).eulerian_tour(start=0)


def test_tour_first_edge_forced():
    g = scaled(cycle_graph(3), 2)  # ids 0,1 on 0-1; 2,3 on 1-2; 4,5 on 2-0
    tour = g.eulerian_tour(start=0, first_edge=1)
    assert tour[0] == 1
    assert g.eulerian_tour(start=1, first_edge=3)[0] == 3
    with pytest.raises(GraphError):
        g.eulerian_tour(start=0, first_edge=3)


@settings(max_examples=60)
@given(multigraphs(min_n=2, max_n=5, max_m=6))
def test_tour_of_doubled_graph(g):
    doubled = scaled(g, 2)
    start = min(
        (v for v in doubled.vertices if doubled.degree(v) > 0),
        default=None,
    )
    if start is None:
        assert doubled.eulerian_tour() == ()
        return
    comp = next(c for c in doubled.connected_components() if start in c)
    tour = doubled.eulerian_tour(start=start)
    in_comp = [e for e, u, _ in doubled.edges() if u in comp]
    assert sorted(tour) == sorted(in_comp)


# -- orientations ------------------------------------------------------


def test_orientation_out_degrees():
    g = cycle_graph(3)
    o = Orientation(g)
    for e, u, _ in g.edges():
        o.orient_out_of(e, u)
    assert o.is_total()
    assert o.out_degrees() == {0: 1, 1: 1, 2: 1}
    assert o.tail(0) == 0 and o.head(0) == 1


def test_directed_tour_of_cyclic_triangle():
    g = cycle_graph(3)
    o = Orientation(g, {0: 1, 1: 1, 2: 1})
    assert o.directed_eulerian_tour(start=0) == (0, 1, 2)


def test_directed_tour_rejects_unbalanced():
    g = cycle_graph(3)
    o = Orientation(g, {0: 1, 1: 1, 2: -1})
    with pytest.raises(GraphError):
        o.directed_eulerian_tour(start=0)


def test_orientation_reversal_flips_degrees():
    g = complete_graph(4)
    o = Orientation(g, {e: 1 for e in g.edge_ids()})
    assert sum(o.out_degrees().values()) == g.m
    assert all(o.out_degree(v) + o.in_degree(v) == g.degree(v) for v in g.vertices)
