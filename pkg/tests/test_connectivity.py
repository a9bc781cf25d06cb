"""Edge-connectivity queries against small hand-checked instances.

Expected values for the non-obvious cases were frozen from independent
subset enumeration before the implementations existed.
"""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modk.connectivity import (
    CUT_PARITY,
    SET_CARDINALITY,
    bipartite_index,
    bipartition,
    edge_connectivity,
    essential_edge_connectivity,
    is_lambda_at_least,
    is_parity_edge_connected,
    max_flow,
    pair_connectivity_floor,
)
from modk.errors import GraphError, PreconditionError
from modk.generators import (
    complete_bipartite,
    complete_graph,
    cycle_graph,
    path_graph,
    scaled,
    star_graph,
)
from modk.multigraph import MultiGraph
from strategies import multigraphs


def brute_min_cut(g: MultiGraph) -> int:
    # independent oracle: enumerate proper nonempty subsets containing vertex 0
    verts = list(g.vertices)
    rest = verts[1:]
    best = g.m + 1
    for mask in range(2 ** len(rest)):
        A = {verts[0]} | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        if len(A) == g.n:
            continue
        best = min(best, g.boundary(A))
    return best


# -- global lambda -----------------------------------------------------


def test_lambda_examples():
    assert edge_connectivity(cycle_graph(4)).cut_value == 2
    assert edge_connectivity(complete_graph(4)).cut_value == 3
    assert edge_connectivity(path_graph(2)).cut_value == 1


def test_lambda_certificate_achieves_value():
    cert = edge_connectivity(cycle_graph(5))
    assert cycle_graph(5).boundary(cert.witness_set) == cert.cut_value
    assert cert.parity_tag == "even_cut"


def test_lambda_disconnected():
    g = MultiGraph.from_edges(4, [(0, 1), (2, 3)])
    cert = edge_connectivity(g)
    assert cert.cut_value == 0
    assert cert.witness_set == (0, 1)


def test_lambda_needs_two_vertices():
    with pytest.raises(GraphError):
        edge_connectivity(MultiGraph.from_edges(1, []))


@settings(max_examples=120)
@given(multigraphs(min_n=2, max_n=6, max_m=12))
def test_lambda_matches_brute_force(g):
    cert = edge_connectivity(g)
    assert cert.cut_value == brute_min_cut(g)
    assert g.boundary(cert.witness_set) == cert.cut_value
    assert cert.cut_value <= g.min_degree()


@settings(max_examples=60)
@given(multigraphs(min_n=2, max_n=6, max_m=12), st.integers(0, 5))
def test_is_lambda_at_least_consistent(g, lam):
    assert is_lambda_at_least(g, lam) == (edge_connectivity(g).cut_value >= lam)


# -- max flow and u-avoiding cuts ---------------------------------------


@settings(max_examples=60)
@given(multigraphs(min_n=2, max_n=5, max_m=10))
def test_max_flow_is_min_cut_separating(g):
    s, t = g.vertices[0], g.vertices[-1]
    val, side = max_flow(g, s, t)
    assert s in side and t not in side
    assert g.boundary(side) == val
    # no separating subset does better
    rest = [v for v in g.vertices if v not in (s, t)]
    best = g.m + 1
    for mask in range(2 ** len(rest)):
        A = {s} | {rest[i] for i in range(len(rest)) if mask >> i & 1}
        best = min(best, g.boundary(A))
    assert val == best


def test_pair_connectivity_floor():
    assert pair_connectivity_floor(cycle_graph(4), 3) == 2
    # isolating vertex 3 keeps all other pairs 2-connected
    g = cycle_graph(4).delete_edges(cycle_graph(4).incident(3))
    g2, _ = g.add_edges([(0, 2)])
    assert pair_connectivity_floor(g2, 3) == 2
    # vacuous when only one other vertex remains
    assert pair_connectivity_floor(MultiGraph.from_edges(2, [(0, 1)] * 4), 0) is None


# -- parity-refined connectivity ----------------------------------------


def test_parity_examples():
    assert is_parity_edge_connected(cycle_graph(4), 1, 1)
    assert is_parity_edge_connected(complete_graph(4), 1, 1)
    res = is_parity_edge_connected(path_graph(3), 1, 1)
    assert not res
    assert res.certificate.cut_value == 1
    assert res.certificate.parity_tag == "odd_cut"


def test_parity_parameter_order_enforced():
    with pytest.raises(PreconditionError):
        is_parity_edge_connected(cycle_graph(4), 2, 1)
    with pytest.raises(PreconditionError):
        is_parity_edge_connected(cycle_graph(4), -1, 0)


def test_parity_excluded_vertex():
    # the path 0-1-2 has bridges, but every subset avoiding the middle
    # vertex that is cut off cheaply still shows a violation
    g = path_graph(3)
    res = is_parity_edge_connected(g, 1, 1, excluded_vertex=1)
    assert not res
    assert 1 not in res.certificate.witness_set
    # C4 minus nothing: all cuts avoiding vertex 3 still have value >= 2
    assert is_parity_edge_connected(cycle_graph(4), 1, 1, excluded_vertex=3)


def test_set_cardinality_mode_uses_size_thresholds():
    # doubled star: every vertex cut is even-valued, but singleton sets are
    # odd-sized, so the odd threshold applies to them
    g = scaled(star_graph(3), 2)
    assert is_parity_edge_connected(g, 1, 1, mode=SET_CARDINALITY)
    res = is_parity_edge_connected(g, 1, 2, mode=SET_CARDINALITY)
    assert not res
    assert res.certificate.parity_tag == "odd_cardinality"
    assert res.certificate.cut_value == 2


@settings(max_examples=80)
@given(multigraphs(min_n=2, max_n=5, max_m=10), st.integers(0, 2))
def test_parity_collapses_to_lambda(g, m):
    # equal thresholds: (2m+1 odd, 2m even) is exactly lambda >= 2m
    res = is_parity_edge_connected(g, m, m, mode=CUT_PARITY)
    lam = edge_connectivity(g).cut_value
    assert bool(res) == (lam >= 2 * m)


@settings(max_examples=80)
@given(multigraphs(min_n=2, max_n=5, max_m=8), st.integers(0, 2), st.integers(0, 2))
def test_parity_brute_force_agreement(g, m, extra):
    m_prime = m + extra
    res = is_parity_edge_connected(g, m, m_prime, mode=CUT_PARITY)
    verts = list(g.vertices)
    ok = True
    for mask in range(1, 2 ** len(verts) - 1):
        A = {verts[i] for i in range(len(verts)) if mask >> i & 1}
        d = g.boundary(A)
        bound = 2 * m_prime + 1 if d % 2 else 2 * m
        if d < bound:
            ok = False
            break
    assert bool(res) == ok


# -- essential connectivity ----------------------------------------------


def test_essential_two_triangles():
    # two disjoint triangles joined by a non-adjacent pair of edges
    g = MultiGraph.from_edges(
        6,
        [(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4)],
    )
    value, witness = essential_edge_connectivity(g)
    assert value == 2
    assert witness == (0, 1, 2)


def test_essential_star_has_no_essential_cut():
    g = star_graph(3)
    value, witness = essential_edge_connectivity(g)
    assert value == g.m and witness is None


def test_essential_k4():
    # every 2+2 split of K4 is a 4-edge cut with no shared endpoint
    value, witness = essential_edge_connectivity(complete_graph(4))
    assert value == 4
    assert witness == (0, 1)


def test_essential_needs_three_vertices():
    with pytest.raises(GraphError):
        essential_edge_connectivity(path_graph(2))


# -- bipartite index ------------------------------------------------------


def test_bipartite_index_examples():
    assert bipartite_index(complete_bipartite(2, 3))[0] == 0
    assert bipartite_index(cycle_graph(5))[0] == 1
    assert bipartite_index(complete_graph(4))[0] == 2


def test_bipartite_index_deleted_edges_realize_optimum():
    g = complete_graph(4)
    count, deleted, colors = bipartite_index(g)
    assert len(deleted) == count
    assert bipartition(g.delete_edges(deleted)) is not None


@settings(max_examples=60)
@given(multigraphs(min_n=1, max_n=5, max_m=8))
def test_bipartite_index_matches_exhaustive(g):
    count, deleted, _ = bipartite_index(g)
    best = g.m
    verts = list(g.vertices)
    for mask in range(2 ** len(verts)):
        side = {verts[i] for i in range(len(verts)) if mask >> i & 1}
        mono = sum(1 for _, u, v in g.edges() if (u in side) == (v in side))
        best = min(best, mono)
    assert count == best
    assert len(deleted) == count
    assert (count == 0) == (bipartition(g) is not None)
