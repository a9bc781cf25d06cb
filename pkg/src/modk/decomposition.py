"""Splitting a directed graph into two parts around prescribed subsets.

The engine walks one closed Eulerian tour of the graph, padded with
balancing arcs so the tour exists, and decides each edge's part with a
fixed transition table keyed on the edge's class and on what happened
one step earlier on the tour. That locality pins every part degree
inside an explicit window built from out- and in-degrees.

The remaining operations layer tree packings on top of the engine:
splits of a well-connected graph into tree-connected factors with
near-half degrees, a variant whose second factor only regains its tree
level after its edges are lifted back together, and a split whose part
degrees must land in per-vertex lists.
"""

from __future__ import annotations

from contextlib import contextmanager
from dataclasses import dataclass

from .connectivity import is_lambda_at_least
from .errors import ContractViolation, GraphError, PreconditionError, SizeGuardExceeded
from .lifting import (
    LiftLedger,
    PreserveLambda,
    find_admissible_lift,
    restricted_ledger,
)
from .multigraph import EdgeId, MultiGraph, Orientation, Vertex
from .tree_packing import (
    KIND_IN,
    Branching,
    BranchingSet,
    catlin_factor,
    disjoint_branchings,
    is_tree_connected,
    transfer_branchings_across_lift,
)

KEEP = "keep"
DROP = "drop"

# The walk classifies each tour edge, then looks up what to do with it.
# Required and excluded edges are forced. A plain edge reached right
# after a balancing arc consumes one unit of the head vertex's second
# allowance while any remains; otherwise it copies the opposite of what
# happened to the previous tour edge.
RULE_TABLE: dict[tuple[str, str], str] = {
    ("required", "always"): KEEP,
    ("excluded", "always"): DROP,
    ("balancer", "always"): DROP,
    ("plain", "allowance_open"): DROP,
    ("plain", "allowance_spent"): KEEP,
    ("plain", "previous_kept"): DROP,
    ("plain", "previous_dropped"): KEEP,
}


@dataclass(frozen=True)
class PartCertificate:
    """What one part promises: required edges, degree window, tree level.

    A window maps vertices to inclusive (lo, hi) degree bounds; vertices
    it omits are unconstrained. tree_level t asserts the part carries t
    edge-disjoint spanning trees.
    """

    contains: frozenset[EdgeId]
    window: dict[Vertex, tuple[int, int]] | None = None
    tree_level: int = 0


@dataclass(frozen=True)
class DecompositionResult:
    host: MultiGraph
    parts: tuple[frozenset[EdgeId], ...]
    certificates: tuple[PartCertificate, ...]

    def part_graph(self, i: int) -> MultiGraph:
        return self.host.keep_edges(self.parts[i])

    def verify(self) -> None:
        """Recheck the partition and every certificate from scratch."""
        if len(self.parts) != len(self.certificates):
            raise ContractViolation("each part needs exactly one certificate")
        seen: set[EdgeId] = set()
        for part in self.parts:
            if part & seen:
                raise ContractViolation("parts share an edge")
            seen |= part
        if seen != set(self.host.edge_ids()):
            raise ContractViolation("parts do not cover the edge set")
        for i, (part, cert) in enumerate(zip(self.parts, self.certificates)):
            if not cert.contains <= part:
                raise ContractViolation(f"part {i} drops a required edge")
            sub = self.host.keep_edges(part)
            if cert.window is not None:
                for v in self.host.vertices:
                    if v not in cert.window:
                        continue
                    lo, hi = cert.window[v]
                    if not lo <= sub.degree(v) <= hi:
                        raise ContractViolation(
                            f"part {i} has degree {sub.degree(v)} at {v}, "
                            f"outside [{lo}, {hi}]"
                        )
            if cert.tree_level and not is_tree_connected(sub, cert.tree_level):
                raise ContractViolation(
                    f"part {i} is not {cert.tree_level}-tree-connected"
                )


# -- the Eulerian walk engine ----------------------------------------------


def _allowance_map(host: MultiGraph, s) -> dict[Vertex, int]:
    s = {} if s is None else dict(s)
    for v, val in s.items():
        if v not in host.vertices:
            raise GraphError(f"unknown vertex {v} in an allowance map")
        if val < 0:
            raise PreconditionError(f"negative allowance at {v}")
    return {v: s.get(v, 0) for v in host.vertices}


def _out_profile(oriented: Orientation, eids) -> dict[Vertex, int]:
    out = {v: 0 for v in oriented.host.vertices}
    for e in eids:
        out[oriented.tail(e)] += 1
    return out


def _in_profile(oriented: Orientation, eids) -> dict[Vertex, int]:
    inn = {v: 0 for v in oriented.host.vertices}
    for e in eids:
        inn[oriented.head(e)] += 1
    return inn


def _degree_profile(g: MultiGraph, eids) -> dict[Vertex, int]:
    deg = {v: 0 for v in g.vertices}
    for e in eids:
        u, w = g.endpoints(e)
        deg[u] += 1
        deg[w] += 1
    return deg


def eulerian_rule_decomposition(
    oriented: Orientation,
    f1,
    f2,
    s1=None,
    s2=None,
    *,
    fired: set[tuple[str, str]] | None = None,
) -> DecompositionResult:
    """Split the edges into a part around f1 and a part around f2.

    Both parts come with per-vertex degree windows. Writing d+ and d-
    for out- and in-degrees in the input orientation, the part around
    f1 satisfies

        d+(v) - d+_{f2}(v) - s2(v)  <=  d(v)  <=  d-(v) + d+_{f1}(v) + s1(v)

    at every vertex, and the part around f2 the same with roles of
    (f1, s1) and (f2, s2) exchanged. The allowances s1, s2 must absorb
    the imbalance: s1(v) + s2(v) >= d+(v) - d-(v).

    The construction pairs surplus-in vertices to surplus-out vertices
    with balancing arcs, tours the padded graph starting on an f1 edge,
    and classifies each edge via RULE_TABLE. When `fired` is given, the
    table keys the walk actually used are added to it, one entry per
    distinct key, so coverage can be audited.
    """
    host = oriented.host
    f1 = frozenset(f1)
    f2 = frozenset(f2)
    for e in f1 | f2:
        if not host.has_edge(e):
            raise GraphError(f"unknown edge {e}")
    if f1 & f2:
        raise PreconditionError("the two prescribed subsets overlap")
    if not (f1 or f2):
        raise PreconditionError("need at least one prescribed edge")
    if not oriented.is_total():
        raise PreconditionError("every edge needs a direction")
    if not host.is_connected():
        raise PreconditionError("host graph must be connected")
    s1 = _allowance_map(host, s1)
    s2 = _allowance_map(host, s2)
    for v in host.vertices:
        if s1[v] + s2[v] < oriented.out_degree(v) - oriented.in_degree(v):
            raise PreconditionError(f"allowances at {v} cannot absorb the surplus")
    if not f1:
        # the walk must start on a prescribed kept edge, so run with the
        # roles exchanged and read the answer back in the original order
        swapped = eulerian_rule_decomposition(oriented, f2, f1, s2, s1, fired=fired)
        return DecompositionResult(
            host,
            (swapped.parts[1], swapped.parts[0]),
            (swapped.certificates[1], swapped.certificates[0]),
        )

    deltas = {v: oriented.out_degree(v) - oriented.in_degree(v) for v in host.vertices}
    givers = [v for v in sorted(host.vertices) for _ in range(max(0, -deltas[v]))]
    takers = [v for v in sorted(host.vertices) for _ in range(max(0, deltas[v]))]
    pairs = list(zip(givers, takers))
    if pairs:
        padded, arc_ids = host.add_edges(pairs, start=host.next_edge_id())
    else:
        padded, arc_ids = host, ()
    balancers = frozenset(arc_ids)
    direction = dict(oriented.as_dict())
    for e in arc_ids:
        direction[e] = Orientation.FORWARD
    tour = Orientation(padded, direction).directed_eulerian_tour(first_edge=min(f1))

    kept: set[EdgeId] = set()
    arrivals = {v: 0 for v in host.vertices}
    used_rules: set[tuple[str, str]] = set()
    walk = Orientation(padded, direction)
    for i, e in enumerate(tour):
        if e in f1:
            key = ("required", "always")
        elif e in f2:
            key = ("excluded", "always")
        elif e in balancers:
            key = ("balancer", "always")
        else:
            prev = tour[i - 1]  # i >= 1 because the tour starts inside f1
            if prev in balancers:
                v = walk.tail(e)
                arrivals[v] += 1
                state = "allowance_open" if arrivals[v] <= s2[v] else "allowance_spent"
            else:
                state = "previous_kept" if prev in kept else "previous_dropped"
            key = ("plain", state)
        used_rules.add(key)
        if RULE_TABLE[key] == KEEP:
            kept.add(e)
    if fired is not None:
        fired.update(used_rules)

    part1 = frozenset(kept)
    part2 = frozenset(host.edge_ids()) - part1
    out1 = _out_profile(oriented, f1)
    out2 = _out_profile(oriented, f2)
    w1: dict[Vertex, tuple[int, int]] = {}
    w2: dict[Vertex, tuple[int, int]] = {}
    for v in host.vertices:
        dp, dm = oriented.out_degree(v), oriented.in_degree(v)
        w1[v] = (dp - out2[v] - s2[v], dm + out1[v] + s1[v])
        w2[v] = (dp - out1[v] - s1[v], dm + out2[v] + s2[v])
    result = DecompositionResult(
        host,
        (part1, part2),
        (PartCertificate(f1, w1), PartCertificate(f2, w2)),
    )
    result.verify()
    return result


# -- two tree-connected factors ---------------------------------------------


def _root_map(g: MultiGraph, m: int, r) -> dict[Vertex, int]:
    """Normalize a root-count map; None concentrates all m at the
    smallest vertex."""
    if r is None:
        return {min(g.vertices): m} if m else {}
    out = {}
    for v, c in r.items():
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v} in a root map")
        if c < 0:
            raise PreconditionError(f"negative root count at {v}")
        if c:
            out[v] = int(c)
    total = sum(out.values())
    if total != m:
        raise PreconditionError(f"root counts sum to {total}, expected {m}")
    return out


def _merged_roots(r1, r2) -> dict[Vertex, int]:
    out = dict(r1)
    for v, c in r2.items():
        out[v] = out.get(v, 0) + c
    return out


def _take_by_quota(branchings, r1) -> tuple[tuple[Branching, ...], tuple[Branching, ...]]:
    """Split branchings so the first group meets the r1 root counts."""
    left = dict(r1)
    first: list[Branching] = []
    second: list[Branching] = []
    for b in branchings:
        if left.get(b.root, 0) > 0:
            left[b.root] -= 1
            first.append(b)
        else:
            second.append(b)
    if any(left.values()):
        raise ContractViolation("branchings cannot meet the root quota")
    return tuple(first), tuple(second)


def _edge_union(branchings) -> frozenset[EdgeId]:
    out: set[EdgeId] = set()
    for b in branchings:
        out |= b.edges
    return frozenset(out)


def _halved_allowances(oriented: Orientation) -> tuple[dict, dict]:
    """Split each vertex's surplus between the allowances, larger half
    second, so both engine windows round to near-half degrees."""
    s1: dict[Vertex, int] = {}
    s2: dict[Vertex, int] = {}
    for v in oriented.host.vertices:
        surplus = max(0, oriented.out_degree(v) - oriented.in_degree(v))
        s1[v] = surplus // 2
        s2[v] = (surplus + 1) // 2
    return s1, s2


def two_tree_connected_factors(
    g: MultiGraph,
    m1: int,
    m2: int,
    r1=None,
    r2=None,
) -> DecompositionResult:
    """Partition g into an m1- and an m2-tree-connected factor whose
    degrees stay within one of half the hosting degree, refined by the
    root counts.

    The part around the first factor satisfies, at every vertex,

        floor(d(v)/2) - m2 + r2(v)  <=  d(v)  <=  ceil(d(v)/2) + m1 - r1(v)

    and symmetrically for the second. Roots default to concentrating at
    the smallest vertex. Needs g to be 2(m1+m2)-edge-connected.
    """
    if m1 < 0 or m2 < 0:
        raise PreconditionError("tree levels cannot be negative")
    if m1 + m2 < 1:
        raise PreconditionError("need at least one tree level overall")
    if not g.vertices:
        raise PreconditionError("graph has no vertices")
    r1 = _root_map(g, m1, r1)
    r2 = _root_map(g, m2, r2)
    if g.n == 1:
        (v0,) = g.vertices
        result = DecompositionResult(
            g,
            (frozenset(), frozenset()),
            (
                PartCertificate(frozenset(), {v0: (0, 0)}, m1),
                PartCertificate(frozenset(), {v0: (0, 0)}, m2),
            ),
        )
        result.verify()
        return result
    bs = disjoint_branchings(g, _merged_roots(r1, r2), KIND_IN, min(g.vertices))
    first, second = _take_by_quota(bs.branchings, r1)
    f1 = _edge_union(first)
    f2 = _edge_union(second)
    s1, s2 = _halved_allowances(bs.orientation)
    engine = eulerian_rule_decomposition(bs.orientation, f1, f2, s1, s2)
    w1: dict[Vertex, tuple[int, int]] = {}
    w2: dict[Vertex, tuple[int, int]] = {}
    for v in g.vertices:
        d = g.degree(v)
        w1[v] = (d // 2 - m2 + r2.get(v, 0), (d + 1) // 2 + m1 - r1.get(v, 0))
        w2[v] = (d // 2 - m1 + r1.get(v, 0), (d + 1) // 2 + m2 - r2.get(v, 0))
    result = DecompositionResult(
        g,
        engine.parts,
        (PartCertificate(f1, w1, m1), PartCertificate(f2, w2, m2)),
    )
    result.verify()
    return result


# -- tree-connected factor plus a liftable factor ----------------------------


@contextmanager
def _stage(name: str):
    """Tag errors escaping one pipeline stage with the stage's name."""
    try:
        yield
    except (GraphError, PreconditionError, ContractViolation) as err:
        first = err.args[0] if err.args else ""
        err.args = (f"{name}: {first}",) + err.args[1:]
        raise


def _stage_graphs(ledger: LiftLedger) -> list[MultiGraph]:
    """The graph before each recorded step, in step order."""
    stages = [ledger.base]
    for s in ledger.steps:
        nxt = stages[-1].delete_edges((s.left, s.right))
        if s.created is not None:
            nxt, (made,) = nxt.add_edges([(s.left_end, s.right_end)], start=s.created)
            assert made == s.created
        stages.append(nxt)
    return stages


def _budget_map(g: MultiGraph, s, anchor: Vertex, m1: int, r2) -> dict[Vertex, int]:
    s = {} if s is None else dict(s)
    for v, val in s.items():
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v} in the budget map")
        if val < 0:
            raise PreconditionError(f"negative budget at {v}")
    out = {v: s.get(v, 0) for v in g.vertices}
    for v in g.vertices:
        cap = m1 + r2.get(v, 0)
        if v == anchor and g.degree(v) % 2:
            cap += 1
        if out[v] > cap:
            raise PreconditionError(f"budget at {v} exceeds its cap {cap}")
    return out


def _out_degree_factor(h: MultiGraph, quota) -> dict[EdgeId, Vertex]:
    """Distinct edges, quota[v] of them claimed by (and oriented out of)
    v, found by backtracking over the claim order."""
    slots = [v for v in sorted(quota) for _ in range(quota[v])]
    chosen: dict[EdgeId, Vertex] = {}

    def place(i: int) -> bool:
        if i == len(slots):
            return True
        v = slots[i]
        for e in sorted(h.incident(v)):
            if e in chosen:
                continue
            chosen[e] = v
            if place(i + 1):
                return True
            del chosen[e]
        return False

    if not place(0):
        raise ContractViolation("cannot realize the claimed out-degrees")
    return chosen


def _liftable_with_trees(g, h, ledger, m1, m2, budget, r1, r2, anchor):
    """Both factors carry trees: keep m1 of the branchings on the base
    graph, carve out the other m2 as the liftable factor, and let the
    engine pick the first factor inside what remains."""
    with _stage("branchings"):
        bs = disjoint_branchings(h, _merged_roots(r1, r2), KIND_IN, anchor)
    first, second = _take_by_quota(bs.branchings, r1)
    l_ids = _edge_union(second)
    with _stage("orientation transfer"):
        induced = ledger.induce_orientation(bs.orientation)
        orientation, trees = bs.orientation, first
        stages = _stage_graphs(ledger)
        for i in reversed(range(len(ledger.steps))):
            orientation, trees = transfer_branchings_across_lift(
                stages[i], ledger.steps[i], orientation, trees
            )
        if orientation.as_dict() != induced.as_dict():
            raise ContractViolation("branching transfer left the trail pullback")
        BranchingSet(orientation, trees).verify(r=r1)
    f_ids = _edge_union(trees)
    with _stage("history restriction"):
        sub, _ = restricted_ledger(ledger, l_ids)
        m2_ids = frozenset(sub.base.edge_ids())
        if f_ids & m2_ids:
            raise ContractViolation("kept trees leak into the liftable factor")
        if not is_tree_connected(sub.derived, m2):
            raise ContractViolation("carved factor lost its tree level")
    with _stage("bounded selection"):
        l_out = _out_profile(bs.orientation, l_ids)
        l_in = _in_profile(bs.orientation, l_ids)
        s1: dict[Vertex, int] = {}
        s2: dict[Vertex, int] = {}
        for v in g.vertices:
            q_out = bs.orientation.out_degree(v) - l_out[v]
            q_in = bs.orientation.in_degree(v) - l_in[v]
            need = m1 + r2.get(v, 0)
            if v == anchor and g.degree(v) % 2:
                need += 1
            if q_out < need:
                raise ContractViolation(f"out-degree at {v} fell below {need}")
            s1[v] = q_out - need + budget[v]
            s2[v] = max(0, q_out - q_in - s1[v])
        rest = g.keep_edges(frozenset(g.edge_ids()) - m2_ids)
        engine = eulerian_rule_decomposition(
            induced.restricted_to(rest), f_ids, frozenset(), s1, s2
        )
    m1_ids = engine.parts[0]
    if not is_tree_connected(g.keep_edges(m1_ids), m1):
        raise ContractViolation("selected factor misses its tree level")
    return frozenset(m1_ids), m2_ids, sub


def _liftable_trail_colored(g, h, ledger, m2, budget, r2, anchor):
    """No trees to keep: claim one small factor whose removal keeps the
    lifted graph's tree level, then two-color its base trails and take
    the first factor from the leading color."""
    with _stage("factor selection"):
        claimed = _out_degree_factor(h, {v: c for v, c in r2.items() if c})
        m_edges = frozenset(claimed)
        tails = dict(claimed)
        if g.degree(anchor) % 2:
            pick = None
            for cand in sorted(set(h.incident(anchor)) - m_edges):
                if is_tree_connected(h.delete_edges(m_edges | {cand}), m2):
                    pick = cand
                    break
            if pick is None:
                raise ContractViolation(f"no spare edge at {anchor} keeps the tree level")
            tails[pick] = anchor
            q_ids = m_edges | {pick}
        else:
            catlin_factor(h, m2, m_edges)
            q_ids = m_edges
    with _stage("history restriction"):
        l_ids = frozenset(h.edge_ids()) - q_ids
        sub, _ = restricted_ledger(ledger, l_ids, include_annihilated=True)
        m2_ids = frozenset(sub.base.edge_ids())
        if not is_tree_connected(sub.derived, m2):
            raise ContractViolation("carved factor lost its tree level")
    with _stage("trail coloring"):
        rest = frozenset(g.edge_ids()) - m2_ids
        blue: set[EdgeId] = set()
        covered: set[EdgeId] = set()
        for v in sorted(g.vertices):
            mine = sorted(e for e in q_ids if tails[e] == v)
            for idx, e in enumerate(mine):
                trail = ledger.trail_from(e, v)
                covered.update(trail)
                lead = idx < budget[v]
                for pos, base_e in enumerate(trail):
                    if (pos % 2 == 0) == lead:
                        blue.add(base_e)
        if covered != rest:
            raise ContractViolation("trail split leaves unaccounted edges")
        rest_deg = _degree_profile(g, rest)
        q_deg = _degree_profile(h, q_ids)
        blue_deg = _degree_profile(g, blue)
        for v in g.vertices:
            rho = r2.get(v, 0)
            if v == anchor and g.degree(v) % 2:
                rho += 1
            lo2 = rest_deg[v] - q_deg[v] + 2 * budget[v]
            hi2 = rest_deg[v] + q_deg[v] - 2 * (rho - budget[v])
            if not lo2 <= 2 * blue_deg[v] <= hi2:
                raise ContractViolation(f"coloring window fails at {v}")
    return frozenset(blue), m2_ids, sub


def _check_liftable_windows(g, m1_ids, m2_ids, derived, m1, m2, budget, r1, r2, anchor):
    """Both inequality families, kept in doubled integers; the half
    terms track how far the liftable factor contracts."""
    deg1 = _degree_profile(g, m1_ids)
    deg2 = _degree_profile(g, m2_ids)
    for v in g.vertices:
        d = g.degree(v)
        dl = derived.degree(v)
        lo2 = 2 * (d // 2 - m1 - m2 + budget[v])
        if 2 * deg1[v] + (deg2[v] - dl) < lo2:
            raise ContractViolation(f"lower degree guarantee fails at {v}")
        hi = (d + 1) // 2 + m1 + m2 + budget[v] - r1.get(v, 0) - r2.get(v, 0)
        if v == anchor:
            hi = min(hi, d // 2 + m1 + m2 + budget[v] - r1.get(v, 0) - r2.get(v, 0))
        if 2 * deg1[v] + (deg2[v] + dl) > 2 * hi:
            raise ContractViolation(f"upper degree guarantee fails at {v}")


def tree_plus_liftable_decomposition(
    g: MultiGraph,
    m1: int,
    m2: int,
    s=None,
    r1=None,
    r2=None,
    z0: Vertex | None = None,
) -> tuple[frozenset[EdgeId], frozenset[EdgeId], LiftLedger]:
    """Edge-disjoint factors (first, liftable, history): the first is
    m1-tree-connected, and replaying the returned history's lifts turns
    the second into an m2-tree-connected graph.

    Writing L for the returned history's final graph and d for degrees
    in g, every vertex satisfies both

        (i)   d_first(v) + (d_second(v) - d_L(v)) / 2
                  >=  floor(d(v)/2) - m1 - m2 + s(v)
        (ii)  d_first(v) + (d_second(v) + d_L(v)) / 2
                  <=  ceil(d(v)/2) + m1 + m2 + s(v) - r1(v) - r2(v)

    and at z0 the ceiling in (ii) drops to a floor. The budget s(v) is
    capped by m1 + r2(v), plus one more at an odd-degree z0. Needs g
    2(m1+m2)-edge-connected and m2 >= 1. z0 defaults to the smallest
    vertex; m1 = 0 switches to a trail-coloring construction that needs
    no branchings on the base graph.
    """
    if m1 < 0:
        raise PreconditionError("tree levels cannot be negative")
    if m2 < 1:
        raise PreconditionError("the liftable factor needs at least one tree")
    if not g.vertices:
        raise PreconditionError("graph has no vertices")
    if z0 is not None and z0 not in g.vertices:
        raise GraphError(f"unknown vertex {z0}")
    r1 = _root_map(g, m1, r1)
    r2 = _root_map(g, m2, r2)
    anchor = z0 if z0 is not None else min(g.vertices)
    budget = _budget_map(g, s, anchor, m1, r2)
    if g.n == 1:
        return frozenset(), frozenset(), LiftLedger(g)
    lam = 2 * (m1 + m2)
    if not is_lambda_at_least(g, lam):
        raise PreconditionError(f"graph is not {lam}-edge-connected")
    ledger = LiftLedger(g)
    with _stage("degree reduction"):
        while True:
            cur = ledger.derived
            u = next((v for v in sorted(cur.vertices) if cur.degree(v) > lam + 1), None)
            if u is None:
                break
            ledger.lift(*find_admissible_lift(cur, u, PreserveLambda(lam)), pivot=u)
    h = ledger.derived
    if m1 >= 1:
        m1_ids, m2_ids, sub = _liftable_with_trees(
            g, h, ledger, m1, m2, budget, r1, r2, anchor
        )
    else:
        m1_ids, m2_ids, sub = _liftable_trail_colored(
            g, h, ledger, m2, budget, r2, anchor
        )
    _check_liftable_windows(
        g, m1_ids, m2_ids, sub.derived, m1, m2, budget, r1, r2, anchor
    )
    return m1_ids, m2_ids, sub


# -- tree-connected factor plus disjoint spanning trees -----------------------


def tree_plus_trees_decomposition(
    g: MultiGraph,
    m1: int,
    m2: int,
    r1=None,
    r2=None,
) -> tuple[frozenset[EdgeId], frozenset[EdgeId]]:
    """Edge-disjoint factors: the first m1-tree-connected, the second
    exactly m2 edge-disjoint spanning trees.

    Unlike the full partition, edges may be left over. Each vertex
    settles at least one of two degree guarantees: either the first
    factor stays within m1 - r1(v) above half of what the trees leave,

        (i)  floor((d(v)-d_trees(v))/2) <= d_first(v)
                 <= floor((d(v)-d_trees(v))/2) + m1 - r1(v)

    or both factors together stay near half of d(v),

        (ii) floor(d(v)/2) - m2 <= d_first(v)  and
             d_first(v) + d_trees(v) <= ceil(d(v)/2) + m1 + m2 - r1(v) - r2(v).

    Needs g 2(m1+m2)-edge-connected and m1 >= 1.
    """
    if m1 < 1:
        raise PreconditionError("the connected factor needs at least one tree level")
    if m2 < 0:
        raise PreconditionError("tree counts cannot be negative")
    if not g.vertices:
        raise PreconditionError("graph has no vertices")
    r1 = _root_map(g, m1, r1)
    r2 = _root_map(g, m2, r2)
    if g.n == 1:
        return frozenset(), frozenset()
    bs = disjoint_branchings(g, _merged_roots(r1, r2), KIND_IN, min(g.vertices))
    first, second = _take_by_quota(bs.branchings, r1)
    f_ids = _edge_union(first)
    t_ids = _edge_union(second)
    core = g.delete_edges(t_ids)
    core_oriented = bs.orientation.restricted_to(core)
    s1, s2 = _halved_allowances(core_oriented)
    engine = eulerian_rule_decomposition(core_oriented, f_ids, frozenset(), s1, s2)
    g1 = engine.parts[0]
    deg1 = _degree_profile(g, g1)
    deg2 = _degree_profile(g, t_ids)
    for v in g.vertices:
        d, d1, d2 = g.degree(v), deg1[v], deg2[v]
        half = (d - d2) // 2
        tight = half <= d1 <= half + m1 - r1.get(v, 0)
        joint = (
            d // 2 - m2 <= d1
            and d1 + d2 <= (d + 1) // 2 + m1 + m2 - r1.get(v, 0) - r2.get(v, 0)
        )
        if not (tight or joint):
            raise ContractViolation(f"neither degree guarantee holds at {v}")
    if not is_tree_connected(g.keep_edges(g1), m1):
        raise ContractViolation("first factor misses its tree level")
    return frozenset(g1), frozenset(t_ids)


# -- factors with list-valued degrees -----------------------------------------

# hard cap for the exhaustive subroutine; beyond this the search space
# is out of desk range
LIST_SEARCH_CAP = 24


def _listed_factor(h: MultiGraph, lists) -> frozenset[EdgeId] | None:
    """Smallest edge set whose degrees land in the per-vertex lists,
    exclude-first exhaustive with a window prune per decision."""
    if h.m > LIST_SEARCH_CAP:
        raise SizeGuardExceeded(
            f"list search handles at most {LIST_SEARCH_CAP} edges, got {h.m}"
        )
    order = sorted(h.edge_ids())
    remaining = {v: h.degree(v) for v in h.vertices}
    current = {v: 0 for v in h.vertices}
    allowed = {v: tuple(lists[v]) for v in h.vertices}

    def feasible(v: Vertex) -> bool:
        lo, hi = current[v], current[v] + remaining[v]
        return any(lo <= x <= hi for x in allowed[v])

    if not all(feasible(v) for v in h.vertices):
        return None
    picked: list[EdgeId] = []

    def walk(i: int) -> bool:
        if i == len(order):
            return True
        e = order[i]
        u, w = h.endpoints(e)
        for take in (False, True):
            if take:
                current[u] += 1
                current[w] += 1
                picked.append(e)
            remaining[u] -= 1
            remaining[w] -= 1
            if feasible(u) and feasible(w) and walk(i + 1):
                return True
            remaining[u] += 1
            remaining[w] += 1
            if take:
                current[u] -= 1
                current[w] -= 1
                picked.pop()
        return False

    return frozenset(picked) if walk(0) else None


def list_factor_decomposition(
    oriented: Orientation,
    f1,
    f2,
    v1,
    v2,
    lists,
    s1=None,
    s2=None,
) -> DecompositionResult:
    """Partition around f1 and f2 where part degrees must hit lists.

    Vertices on side v1 constrain the first part, side v2 the second:
    d_part(v) must land in lists[v]. Feasibility rests on a per-vertex
    size bound; each list must hold at least

        d+(v) + 1 + d-_{f1}(v) + d-_{f2}(v) - s1(v) - s2(v)

    values drawn from [s1(v), d(v) - s2(v)], where the slacks s1, s2
    are bounded by prescribed-factor degrees (own side first: on v1,
    s1(v) <= d_{f1}(v) and s2(v) <= d_{f2}(v); on v2 the reverse).
    """
    host = oriented.host
    f1 = frozenset(f1)
    f2 = frozenset(f2)
    for e in f1 | f2:
        if not host.has_edge(e):
            raise GraphError(f"unknown edge {e}")
    if f1 & f2:
        raise PreconditionError("the two prescribed subsets overlap")
    if not oriented.is_total():
        raise PreconditionError("every edge needs a direction")
    v1 = frozenset(v1)
    v2 = frozenset(v2)
    if v1 & v2 or (v1 | v2) != set(host.vertices):
        raise PreconditionError("sides must split the vertex set")
    s1 = _allowance_map(host, s1)
    s2 = _allowance_map(host, s2)
    deg_f1 = _degree_profile(host, f1)
    deg_f2 = _degree_profile(host, f2)
    for v in host.vertices:
        own, other = (deg_f1[v], deg_f2[v]) if v in v1 else (deg_f2[v], deg_f1[v])
        if s1[v] > own or s2[v] > other:
            raise PreconditionError(f"slack at {v} exceeds its prescribed degree")
    table: dict[Vertex, list[int]] = {}
    for v in host.vertices:
        if v not in lists:
            raise PreconditionError(f"no list at {v}")
        vals = sorted(set(int(x) for x in lists[v]))
        if not vals:
            raise PreconditionError(f"empty list at {v}")
        if vals[0] < s1[v] or vals[-1] > host.degree(v) - s2[v]:
            raise PreconditionError(f"list at {v} leaves its slack window")
        table[v] = vals
    in_f1 = _in_profile(oriented, f1)
    in_f2 = _in_profile(oriented, f2)
    for v in host.vertices:
        need = oriented.out_degree(v) + 1 + in_f1[v] + in_f2[v] - s1[v] - s2[v]
        if len(table[v]) < need:
            raise PreconditionError(f"list at {v} holds {len(table[v])} < {need} values")

    h = host.delete_edges(f1 | f2)
    shifted: dict[Vertex, list[int]] = {}
    for v in host.vertices:
        d = host.degree(v)
        if v in v1:
            vals = [x - deg_f1[v] for x in table[v] if deg_f1[v] <= x <= d - deg_f2[v]]
        else:
            vals = [d - x - deg_f1[v] for x in table[v] if deg_f2[v] <= x <= d - deg_f1[v]]
        shifted[v] = sorted(set(vals))
    chosen = _listed_factor(h, shifted)
    if chosen is None:
        raise ContractViolation("no split hits the lists despite their size")
    part1 = chosen | f1
    part2 = frozenset(host.edge_ids()) - part1
    result = DecompositionResult(
        host,
        (part1, part2),
        (PartCertificate(f1), PartCertificate(f2)),
    )
    result.verify()
    deg1 = _degree_profile(host, part1)
    for v in host.vertices:
        hit = deg1[v] if v in v1 else host.degree(v) - deg1[v]
        if hit not in table[v]:
            raise ContractViolation(f"degree {hit} at {v} misses its list")
    return result
