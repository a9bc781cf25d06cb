"""Edge-partition engine and its factor splits, against window oracles.

The oracle here recomputes every degree window from its stated formula
and, on small hosts, enumerates all candidate parts outright, so the
tour-walking engine is checked by a route that shares none of its code.
Factor splits are rechecked from their returned pieces alone: packing
levels, disjointness, and both inequality families, recomputed in-test.
"""

import itertools
import random

import pytest
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from modk.decomposition import (
    DecompositionResult,
    LIST_SEARCH_CAP,
    RULE_TABLE,
    eulerian_rule_decomposition,
    list_factor_decomposition,
    tree_plus_liftable_decomposition,
    tree_plus_trees_decomposition,
    two_tree_connected_factors,
)
from modk.errors import ContractViolation, PreconditionError, SizeGuardExceeded
from modk.generators import cycle_graph, random_lambda_connected, scaled
from modk.multigraph import MultiGraph, Orientation
from modk.tree_packing import is_tree_connected

from strategies import multigraphs


def _deg(g, eids, v):
    return sum(1 for e in eids if v in g.endpoints(e))


def _stated_windows(oriented, f1, f2, s1, s2, v):
    """Both degree windows at v, rebuilt from the stated formula."""
    dp, dm = oriented.out_degree(v), oriented.in_degree(v)
    o1 = sum(1 for e in f1 if oriented.tail(e) == v)
    o2 = sum(1 for e in f2 if oriented.tail(e) == v)
    g1 = (dp - o2 - s2.get(v, 0), dm + o1 + s1.get(v, 0))
    g2 = (dp - o1 - s1.get(v, 0), dm + o2 + s2.get(v, 0))
    return g1, g2


def _oracle_survivors(oriented, f1, f2, s1, s2):
    """Every superset of f1 avoiding f2 whose two parts clear both
    windows, by brute enumeration."""
    host = oriented.host
    free = sorted(set(host.edge_ids()) - f1 - f2)
    good = []
    for bits in itertools.product((False, True), repeat=len(free)):
        part1 = set(f1) | {e for e, b in zip(free, bits) if b}
        ok = True
        for v in host.vertices:
            d1 = _deg(host, part1, v)
            d2 = host.degree(v) - d1
            (lo1, hi1), (lo2, hi2) = _stated_windows(oriented, f1, f2, s1, s2, v)
            if not (lo1 <= d1 <= hi1 and lo2 <= d2 <= hi2):
                ok = False
                break
        if ok:
            good.append(frozenset(part1))
    return good


def directed_cycle(n):
    g = cycle_graph(n)
    return Orientation(g, {e: 1 for e in g.edge_ids()})


# -- the engine -------------------------------------------------------------


def test_triangle_split_is_the_unique_window_survivor():
    oriented = directed_cycle(3)
    survivors = _oracle_survivors(oriented, frozenset({0}), frozenset(), {}, {})
    assert survivors == [frozenset({0, 2})]
    res = eulerian_rule_decomposition(oriented, {0}, frozenset())
    assert isinstance(res, DecompositionResult)
    assert res.parts == (frozenset({0, 2}), frozenset({1}))


def test_all_edges_required_keeps_everything():
    oriented = directed_cycle(4)
    every = frozenset(oriented.host.edge_ids())
    res = eulerian_rule_decomposition(oriented, every, frozenset())
    assert res.parts == (every, frozenset())


def test_balanced_host_needs_no_balancers():
    oriented = directed_cycle(4)
    fired = set()
    res = eulerian_rule_decomposition(oriented, {0}, {2}, fired=fired)
    assert ("balancer", "always") not in fired
    # with no surplus anywhere the windows read d+ - d+_{f2} .. d- + d+_{f1}
    for v in oriented.host.vertices:
        assert res.certificates[0].window[v] == _stated_windows(
            oriented, {0}, {2}, {}, {}, v
        )[0]


def two_against_one():
    g = MultiGraph.from_edges(2, [(0, 1), (0, 1), (1, 0)])
    return Orientation(g, {0: 1, 1: 1, 2: 1})


def test_allowance_open_diverts_the_follower():
    # vertex 0 has surplus 1; the edge after the balancing arc lands in
    # the second part while the allowance lasts
    res = eulerian_rule_decomposition(two_against_one(), {2}, frozenset(), None, {0: 1})
    assert res.parts[0] == frozenset({2})


def test_allowance_spent_keeps_the_follower():
    res = eulerian_rule_decomposition(two_against_one(), {2}, frozenset(), {0: 1}, None)
    assert res.parts[0] == frozenset({1, 2})


def test_rule_table_is_fully_exercised():
    fired = set()
    eulerian_rule_decomposition(directed_cycle(3), {0}, {1}, fired=fired)
    eulerian_rule_decomposition(two_against_one(), {2}, frozenset(), None, {0: 1}, fired=fired)
    eulerian_rule_decomposition(two_against_one(), {2}, frozenset(), {0: 1}, None, fired=fired)
    assert fired == set(RULE_TABLE)


def test_empty_first_subset_swaps_roles():
    oriented = directed_cycle(3)
    res = eulerian_rule_decomposition(oriented, frozenset(), {0})
    assert frozenset({0}) <= res.parts[1]
    assert res.parts[0] | res.parts[1] == frozenset(oriented.host.edge_ids())
    res.verify()


def test_engine_rejects_bad_inputs():
    oriented = directed_cycle(3)
    with pytest.raises(PreconditionError, match="at least one"):
        eulerian_rule_decomposition(oriented, frozenset(), frozenset())
    with pytest.raises(PreconditionError, match="overlap"):
        eulerian_rule_decomposition(oriented, {0}, {0})
    with pytest.raises(PreconditionError, match="negative"):
        eulerian_rule_decomposition(oriented, {0}, frozenset(), {0: -1}, None)
    g = MultiGraph.from_edges(4, [(0, 1), (2, 3)])
    o = Orientation(g, {0: 1, 1: 1})
    with pytest.raises(PreconditionError, match="connected"):
        eulerian_rule_decomposition(o, {0}, frozenset(), {0: 5, 2: 5}, None)
    lopsided = two_against_one()
    with pytest.raises(PreconditionError, match="absorb"):
        eulerian_rule_decomposition(lopsided, {2}, frozenset())


@st.composite
def engine_instances(draw):
    g = draw(multigraphs(min_n=2, max_n=5, max_m=9))
    assume(g.m >= 1 and g.is_connected())
    ids = g.edge_ids()
    bits = draw(st.lists(st.sampled_from((1, -1)), min_size=g.m, max_size=g.m))
    oriented = Orientation(g, dict(zip(ids, bits)))
    labels = draw(
        st.lists(st.sampled_from(("free", "first", "second")), min_size=g.m, max_size=g.m)
    )
    f1 = frozenset(e for e, tag in zip(ids, labels) if tag == "first")
    f2 = frozenset(e for e, tag in zip(ids, labels) if tag == "second")
    assume(f1 or f2)
    s1, s2 = {}, {}
    for v in g.vertices:
        surplus = max(0, oriented.out_degree(v) - oriented.in_degree(v))
        toward_first = draw(st.integers(0, surplus))
        s1[v] = toward_first + draw(st.integers(0, 1))
        s2[v] = surplus - toward_first + draw(st.integers(0, 1))
    return oriented, f1, f2, s1, s2


@settings(
    max_examples=120,
    deadline=None,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)
@given(engine_instances())
def test_engine_output_is_an_oracle_survivor(instance):
    oriented, f1, f2, s1, s2 = instance
    res = eulerian_rule_decomposition(oriented, f1, f2, s1, s2)
    res.verify()
    survivors = _oracle_survivors(oriented, f1, f2, s1, s2)
    assert survivors, "the windows always admit a split"
    assert res.parts[0] in survivors
    for v in oriented.host.vertices:
        w1, w2 = _stated_windows(oriented, f1, f2, s1, s2, v)
        assert res.certificates[0].window[v] == w1
        assert res.certificates[1].window[v] == w2


@settings(
    max_examples=80,
    deadline=None,
    suppress_health_check=[HealthCheck.filter_too_much, HealthCheck.too_slow],
)
@given(engine_instances())
def test_halved_allowances_give_near_half_windows(instance):
    # splitting each surplus in half lands both parts within rounding
    # of half the degree, shifted by prescribed out-degrees
    oriented, f1, f2, _, _ = instance
    host = oriented.host
    s1, s2 = {}, {}
    for v in host.vertices:
        surplus = max(0, oriented.out_degree(v) - oriented.in_degree(v))
        s1[v], s2[v] = surplus // 2, (surplus + 1) // 2
    res = eulerian_rule_decomposition(oriented, f1, f2, s1, s2)
    for v in host.vertices:
        d = host.degree(v)
        dp, dm = oriented.out_degree(v), oriented.in_degree(v)
        o1 = sum(1 for e in f1 if oriented.tail(e) == v)
        o2 = sum(1 for e in f2 if oriented.tail(e) == v)
        d1 = _deg(host, res.parts[0], v)
        if dp > dm:
            assert d // 2 - o2 <= d1 <= (d + 1) // 2 + o1
        else:
            assert dp - o2 <= d1 <= dm + o1
        if not f2:
            # single prescribed subset: the upper side sharpens to a floor
            if dp > dm:
                assert d // 2 <= d1 <= d // 2 + o1
            else:
                assert dp <= d1 <= dm + o1


# -- two tree-connected factors ----------------------------------------------


def test_doubled_cycle_splits_into_two_hamiltonian_factors():
    g = scaled(cycle_graph(4), 2)
    res = two_tree_connected_factors(g, 1, 1, {0: 1}, {0: 1})
    res.verify()
    # pinned output of the deterministic pipeline: one copy of each rail
    # per part, so both parts are spanning cycles
    assert res.parts == (frozenset({1, 2, 4, 6}), frozenset({0, 3, 5, 7}))
    for i in (0, 1):
        sub = res.part_graph(i)
        assert sub.is_connected()
        assert all(sub.degree(v) == 2 for v in sub.vertices)


def test_single_level_specialization_keeps_ceiling_window():
    g = scaled(cycle_graph(4), 2)
    res = two_tree_connected_factors(g, 1, 0)
    res.verify()
    assert res.certificates[0].tree_level == 1
    for v in g.vertices:
        d = g.degree(v)
        lo, hi = res.certificates[0].window[v]
        assert hi == (d + 1) // 2 + 1 - (1 if v == 0 else 0)
        assert lo == d // 2


def test_quadrupled_pair_splits_evenly():
    g = MultiGraph.from_edges(2, [(0, 1)] * 4)
    res = two_tree_connected_factors(g, 1, 1)
    assert len(res.parts[0]) == 2 and len(res.parts[1]) == 2
    # the stated window at the shared vertex 0 pins the first part's
    # degree, and hence its size, to exactly half the edges
    lo0 = 4 // 2 - 1 + 1
    hi0 = (4 + 1) // 2 + 1 - 1
    assert (lo0, hi0) == (2, 2)
    assert res.certificates[0].window[0] == (2, 2)


def test_two_factor_split_rejects_connectivity_shortfall():
    with pytest.raises(PreconditionError, match="edge-connected"):
        two_tree_connected_factors(cycle_graph(4), 1, 1)
    with pytest.raises(PreconditionError, match="tree level"):
        two_tree_connected_factors(cycle_graph(4), 0, 0)
    with pytest.raises(PreconditionError, match="sum to"):
        two_tree_connected_factors(scaled(cycle_graph(4), 2), 1, 1, {0: 2}, None)


def test_two_factor_split_on_random_hosts():
    rng = random.Random(20240811)
    for _ in range(12):
        m1, m2 = rng.choice([(1, 0), (0, 1), (1, 1)])
        need = 2 * (m1 + m2)
        n = rng.randrange(2, 6)
        g = random_lambda_connected(n, rng.randrange(need * n, need * n + 5), need, rng)
        roots1 = rng.choices(sorted(g.vertices), k=m1)
        roots2 = rng.choices(sorted(g.vertices), k=m2)
        r1 = {v: roots1.count(v) for v in set(roots1)}
        r2 = {v: roots2.count(v) for v in set(roots2)}
        res = two_tree_connected_factors(g, m1, m2, r1, r2)
        res.verify()
        assert res.parts[0] | res.parts[1] == frozenset(g.edge_ids())
        for v in g.vertices:
            d = g.degree(v)
            d1 = _deg(g, res.parts[0], v)
            assert d // 2 - m2 + r2.get(v, 0) <= d1
            assert d1 <= (d + 1) // 2 + m1 - r1.get(v, 0)
        assert is_tree_connected(g.keep_edges(res.parts[0]), m1)
        assert is_tree_connected(g.keep_edges(res.parts[1]), m2)


# -- tree-connected factor plus a liftable factor ------------------------------


def _recheck_liftable(g, m1_ids, m2_ids, sub, m1, m2, budget, r1, r2, anchor):
    """Independent recheck of everything the operation promises."""
    assert not m1_ids & m2_ids
    assert m1_ids | m2_ids <= frozenset(g.edge_ids())
    assert frozenset(sub.base.edge_ids()) == m2_ids
    sub.verify()
    assert is_tree_connected(sub.derived, m2)
    if m1:
        assert is_tree_connected(g.keep_edges(m1_ids), m1)
    for v in g.vertices:
        d = g.degree(v)
        d1, d2, dl = _deg(g, m1_ids, v), _deg(g, m2_ids, v), sub.derived.degree(v)
        sv = budget.get(v, 0)
        assert 2 * d1 + d2 - dl >= 2 * (d // 2 - m1 - m2 + sv)
        hi = (d + 1) // 2 + m1 + m2 + sv - r1.get(v, 0) - r2.get(v, 0)
        if v == anchor:
            hi = d // 2 + m1 + m2 + sv - r1.get(v, 0) - r2.get(v, 0)
        assert 2 * d1 + d2 + dl <= 2 * hi


def test_doubled_cycle_trail_coloring():
    g = scaled(cycle_graph(4), 2)
    m1_ids, m2_ids, sub = tree_plus_liftable_decomposition(g, 0, 1)
    _recheck_liftable(g, m1_ids, m2_ids, sub, 0, 1, {}, {}, {0: 1}, 0)
    # the second factor shrinks to a connected graph after its lifts
    assert sub.derived.is_connected()


def test_quadrupled_cycle_full_pipeline():
    g = scaled(cycle_graph(4), 4)
    m1_ids, m2_ids, sub = tree_plus_liftable_decomposition(g, 1, 1)
    _recheck_liftable(g, m1_ids, m2_ids, sub, 1, 1, {}, {0: 1}, {0: 1}, 0)


def test_budget_at_its_cap():
    g = scaled(cycle_graph(4), 4)
    r2 = {0: 1}
    budget = {v: 1 + r2.get(v, 0) for v in g.vertices}
    m1_ids, m2_ids, sub = tree_plus_liftable_decomposition(g, 1, 1, budget)
    _recheck_liftable(g, m1_ids, m2_ids, sub, 1, 1, budget, {0: 1}, r2, 0)


def test_odd_anchor_gets_one_extra_budget_unit():
    g = scaled(MultiGraph.from_edges(2, [(0, 1)]), 3)
    m1_ids, m2_ids, sub = tree_plus_liftable_decomposition(g, 0, 1, {0: 2})
    _recheck_liftable(g, m1_ids, m2_ids, sub, 0, 1, {0: 2}, {}, {0: 1}, 0)
    with pytest.raises(PreconditionError, match="cap"):
        tree_plus_liftable_decomposition(g, 0, 1, {0: 3})
    with pytest.raises(PreconditionError, match="cap"):
        tree_plus_liftable_decomposition(g, 0, 1, {1: 2})


def test_liftable_rejects_bad_inputs():
    g = scaled(cycle_graph(4), 2)
    with pytest.raises(PreconditionError, match="at least one tree"):
        tree_plus_liftable_decomposition(g, 1, 0)
    with pytest.raises(PreconditionError, match="edge-connected"):
        tree_plus_liftable_decomposition(cycle_graph(4), 1, 1)


def test_liftable_split_on_random_hosts():
    rng = random.Random(95014)
    for _ in range(10):
        m1, m2 = rng.choice([(0, 1), (1, 1), (0, 2)])
        need = 2 * (m1 + m2)
        n = rng.randrange(2, 5)
        g = random_lambda_connected(n, rng.randrange(need * n, need * n + 4), need, rng)
        verts = sorted(g.vertices)
        z0 = rng.choice([None] + verts)
        anchor = z0 if z0 is not None else min(verts)
        roots2 = rng.choices(verts, k=m2)
        r1 = {min(verts): m1} if m1 else {}
        r2 = {v: roots2.count(v) for v in set(roots2)}
        budget = {}
        for v in verts:
            cap = m1 + r2.get(v, 0) + (1 if v == anchor and g.degree(v) % 2 else 0)
            budget[v] = rng.randint(0, cap)
        m1_ids, m2_ids, sub = tree_plus_liftable_decomposition(
            g, m1, m2, budget, r1, r2, z0
        )
        _recheck_liftable(g, m1_ids, m2_ids, sub, m1, m2, budget, r1, r2, anchor)


# -- tree-connected factor plus disjoint spanning trees ------------------------


def _recheck_tree_plus_trees(g, g1, g2, m1, m2, r1, r2):
    assert not g1 & g2
    assert len(g2) == m2 * (g.n - 1)
    assert is_tree_connected(g.keep_edges(g1), m1)
    assert is_tree_connected(g.keep_edges(g2), m2)
    for v in g.vertices:
        d, d1, d2 = g.degree(v), _deg(g, g1, v), _deg(g, g2, v)
        half = (d - d2) // 2
        tight = half <= d1 <= half + m1 - r1.get(v, 0)
        joint = d // 2 - m2 <= d1 and d1 + d2 <= (d + 1) // 2 + m1 + m2 - r1.get(
            v, 0
        ) - r2.get(v, 0)
        assert tight or joint


def test_doubled_cycle_tree_plus_tree():
    g = scaled(cycle_graph(4), 2)
    g1, g2 = tree_plus_trees_decomposition(g, 1, 1)
    _recheck_tree_plus_trees(g, g1, g2, 1, 1, {0: 1}, {0: 1})
    assert g.keep_edges(g1).is_connected()


def test_no_trees_side_collapses_to_single_factor():
    g = scaled(cycle_graph(4), 2)
    g1, g2 = tree_plus_trees_decomposition(g, 1, 0)
    assert g2 == frozenset()
    _recheck_tree_plus_trees(g, g1, g2, 1, 0, {0: 1}, {})


def test_quadrupled_pair_forces_a_two_edge_factor():
    g = MultiGraph.from_edges(2, [(0, 1)] * 4)
    g1, g2 = tree_plus_trees_decomposition(g, 2, 0)
    assert g2 == frozenset()
    # both guarantee branches pin the factor degree to exactly 2 here
    assert len(g1) == 2
    _recheck_tree_plus_trees(g, g1, g2, 2, 0, {0: 2}, {})


def test_tree_plus_trees_needs_a_first_level():
    with pytest.raises(PreconditionError, match="at least one tree level"):
        tree_plus_trees_decomposition(scaled(cycle_graph(4), 2), 0, 1)


def test_tree_plus_trees_on_random_hosts():
    rng = random.Random(60622)
    for _ in range(10):
        m1, m2 = rng.choice([(1, 0), (1, 1), (2, 0)])
        need = 2 * (m1 + m2)
        n = rng.randrange(2, 6)
        g = random_lambda_connected(n, rng.randrange(need * n, need * n + 4), need, rng)
        verts = sorted(g.vertices)
        roots1 = rng.choices(verts, k=m1)
        roots2 = rng.choices(verts, k=m2)
        r1 = {v: roots1.count(v) for v in set(roots1)}
        r2 = {v: roots2.count(v) for v in set(roots2)}
        g1, g2 = tree_plus_trees_decomposition(g, m1, m2, r1, r2)
        _recheck_tree_plus_trees(g, g1, g2, m1, m2, r1, r2)


# -- factors with list-valued degrees -------------------------------------------


def test_four_cycle_lists_force_a_unique_split():
    oriented = directed_cycle(4)
    lists = {0: [1], 1: [1, 2], 2: [1], 3: [1, 2]}
    ones = {v: 1 for v in oriented.host.vertices}
    res = list_factor_decomposition(
        oriented, {0}, {2}, {0, 1}, {2, 3}, lists, ones, None
    )
    # enumeration over the four supersets of the required edge leaves one
    host = oriented.host
    survivors = []
    for extra in map(set, itertools.chain.from_iterable(
        itertools.combinations((1, 3), k) for k in range(3)
    )):
        part1 = {0} | extra
        good = all(
            (_deg(host, part1, v) if v in (0, 1)
             else host.degree(v) - _deg(host, part1, v)) in lists[v]
            for v in host.vertices
        )
        if good:
            survivors.append(frozenset(part1))
    assert survivors == [frozenset({0, 1})]
    assert res.parts == (frozenset({0, 1}), frozenset({2, 3}))


def test_unconstrained_lists_return_the_smallest_split():
    oriented = directed_cycle(4)
    lists = {v: range(0, 3) for v in oriented.host.vertices}
    res = list_factor_decomposition(
        oriented, frozenset(), frozenset(), oriented.host.vertices, (), lists
    )
    assert res.parts[0] == frozenset()


def test_list_size_shortfall_is_rejected():
    oriented = directed_cycle(4)
    with pytest.raises(PreconditionError, match="holds"):
        list_factor_decomposition(
            oriented, frozenset(), frozenset(), oriented.host.vertices, (),
            {v: [1] for v in oriented.host.vertices},
        )


def test_slack_beyond_prescribed_degree_is_rejected():
    oriented = directed_cycle(4)
    ones = {v: 1 for v in oriented.host.vertices}
    with pytest.raises(PreconditionError, match="slack"):
        list_factor_decomposition(
            oriented, frozenset(), frozenset(), oriented.host.vertices, (),
            {v: [1] for v in oriented.host.vertices}, ones, None,
        )


def test_list_search_cap_guards_large_hosts():
    wide = MultiGraph.from_edges(2, [(0, 1)] * (LIST_SEARCH_CAP + 1))
    oriented = Orientation(wide, {e: 1 for e in wide.edge_ids()})
    lists = {v: range(wide.degree(v) + 1) for v in wide.vertices}
    with pytest.raises(SizeGuardExceeded):
        list_factor_decomposition(oriented, frozenset(), frozenset(),
                                  wide.vertices, (), lists)


def test_list_split_on_random_instances():
    rng = random.Random(1961)
    for _ in range(30):
        n = rng.randrange(2, 5)
        pairs = []
        for _ in range(rng.randrange(1, 8)):
            u = rng.randrange(n)
            w = rng.randrange(n - 1)
            pairs.append((u, w + 1 if w >= u else w))
        g = MultiGraph.from_edges(n, pairs)
        oriented = Orientation(g, {e: rng.choice((1, -1)) for e in g.edge_ids()})
        tags = {e: rng.choice(("free", "first", "second")) for e in g.edge_ids()}
        f1 = frozenset(e for e, t in tags.items() if t == "first")
        f2 = frozenset(e for e, t in tags.items() if t == "second")
        v1 = frozenset(v for v in g.vertices if rng.random() < 0.5)
        v2 = frozenset(g.vertices) - v1
        s1, s2, lists = {}, {}, {}
        for v in g.vertices:
            own = _deg(g, f1 if v in v1 else f2, v)
            other = _deg(g, f2 if v in v1 else f1, v)
            s1[v] = rng.randint(0, own)
            s2[v] = rng.randint(0, other)
            need = (
                oriented.out_degree(v) + 1
                + sum(1 for e in f1 | f2 if oriented.head(e) == v)
                - s1[v] - s2[v]
            )
            window = range(s1[v], g.degree(v) - s2[v] + 1)
            k = rng.randint(max(need, 1), len(window))
            lists[v] = rng.sample(window, k)
        res = list_factor_decomposition(oriented, f1, f2, v1, v2, lists, s1, s2)
        res.verify()
        assert f1 <= res.parts[0] and f2 <= res.parts[1]
        for v in g.vertices:
            hit = _deg(g, res.parts[0] if v in v1 else res.parts[1], v)
            assert hit in set(lists[v])
