"""Lifting operations, admissibility searches, and the step ledger.

A lift at pivot u replaces edges xu, uy by a single new edge xy, or
deletes both when they are parallel. The ledger keeps enough history to
reverse everything: each derived edge expands to a trail in the base
graph, and an orientation of the derived graph propagates back along
those trails.
"""

from __future__ import annotations

from dataclasses import dataclass

from .connectivity import (
    CUT_PARITY,
    SET_CARDINALITY,
    is_lambda_at_least,
    is_parity_edge_connected,
    pair_connectivity_floor,
)
from .errors import ContractViolation, GraphError, PreconditionError
from .multigraph import EdgeId, MultiGraph, Orientation, Vertex


@dataclass(frozen=True)
class LiftStep:
    pivot: Vertex
    left: EdgeId
    right: EdgeId
    created: EdgeId | None  # None when the pair was parallel (annihilation)
    left_end: Vertex
    right_end: Vertex


class LiftLedger:
    """Ordered lift history rooted at a base graph.

    Single-owner and mutated in sequence; `derived` is always the graph
    after every recorded step.
    """

    def __init__(self, base: MultiGraph):
        self.base = base
        self.derived = base
        self.steps: list[LiftStep] = []
        # never reuse an id, even after the top edges are lifted away
        self._next_id = base.next_edge_id()

    def __len__(self) -> int:
        return len(self.steps)

    def lift(self, e1: EdgeId, e2: EdgeId, pivot: Vertex | None = None) -> MultiGraph:
        """Apply one lift to the derived graph and record it."""
        g = self.derived
        a, b = g.endpoints(e1)
        if e1 == e2:
            raise GraphError("cannot lift an edge with itself")
        c, d = g.endpoints(e2)
        shared = {a, b} & {c, d}
        if not shared:
            raise GraphError(f"edges {e1} and {e2} share no endpoint")
        if pivot is None:
            pivot = min(shared) if len(shared) == 2 else next(iter(shared))
        elif pivot not in shared:
            raise GraphError(f"vertex {pivot} is not shared by edges {e1} and {e2}")
        x = g.other_end(e1, pivot)
        y = g.other_end(e2, pivot)
        stripped = g.delete_edges((e1, e2))
        if x == y:
            self.derived = stripped
            created = None
        else:
            self.derived, (created,) = stripped.add_edges([(x, y)], start=self._next_id)
            self._next_id = created + 1
        self.steps.append(LiftStep(pivot, e1, e2, created, x, y))
        return self.derived

    # -- trails ---------------------------------------------------------

    def _made(self) -> dict[EdgeId, LiftStep]:
        return {s.created: s for s in self.steps if s.created is not None}

    def _expand(self, eid: EdgeId, made: dict[EdgeId, LiftStep]) -> tuple[tuple[EdgeId, ...], Vertex, Vertex]:
        if eid not in made:
            u, v = self.base.endpoints(eid)
            return (eid,), u, v
        s = made[eid]
        lseq, ls, _ = self._expand(s.left, made)
        if ls != s.left_end:
            lseq = lseq[::-1]
        rseq, rs, _ = self._expand(s.right, made)
        if rs != s.pivot:
            rseq = rseq[::-1]
        return lseq + rseq, s.left_end, s.right_end

    def trail(self, eid: EdgeId) -> tuple[EdgeId, ...]:
        """Base edges realizing a derived edge, ordered end to end."""
        if not self.derived.has_edge(eid):
            raise GraphError(f"edge {eid} is not in the derived graph")
        return self._expand(eid, self._made())[0]

    def trail_from(self, eid: EdgeId, start: Vertex) -> tuple[EdgeId, ...]:
        """The trail of eid ordered so the walk begins at the given endpoint."""
        seq = self.trail(eid)
        u, v = self.derived.endpoints(eid)
        if start == u:
            return seq
        if start == v:
            return seq[::-1]
        raise GraphError(f"vertex {start} is not an endpoint of edge {eid}")

    def trail_map(self) -> dict[EdgeId, tuple[EdgeId, ...]]:
        made = self._made()
        return {eid: self._expand(eid, made)[0] for eid in self.derived.edge_ids()}

    def annihilated_base_edges(self) -> tuple[EdgeId, ...]:
        """Base edges that belong to no surviving trail."""
        live: set[EdgeId] = set()
        for seq in self.trail_map().values():
            live.update(seq)
        return tuple(e for e in self.base.edge_ids() if e not in live)

    # -- invariants -------------------------------------------------------

    def verify(self) -> None:
        """Replay the steps and re-check every ledger invariant."""
        g = self.base
        nid = self.base.next_edge_id()
        for s in self.steps:
            for eid, end in ((s.left, s.left_end), (s.right, s.right_end)):
                if not g.has_edge(eid) or set(g.endpoints(eid)) != {s.pivot, end}:
                    raise ContractViolation(f"step {s} does not match the replayed graph")
            g = g.delete_edges((s.left, s.right))
            if s.created is not None:
                g, (made,) = g.add_edges([(s.left_end, s.right_end)], start=nid)
                if made != s.created:
                    raise ContractViolation("replay assigned a different edge id")
                nid = made + 1
        if g != self.derived:
            raise ContractViolation("replay does not reproduce the derived graph")
        seen: set[EdgeId] = set()
        for seq in self.trail_map().values():
            for e in seq:
                if e in seen:
                    raise ContractViolation(f"base edge {e} appears in two trails")
                seen.add(e)
        for v in self.base.vertices:
            if (self.base.degree(v) - self.derived.degree(v)) % 2:
                raise ContractViolation(f"odd degree drop at {v}")

    # -- orientation transfer ----------------------------------------------

    def induce_orientation(self, derived_orientation: Orientation) -> Orientation:
        """Pull a total orientation of the derived graph back to the base.

        Each derived edge's direction runs along its trail; an annihilated
        parallel pair gets opposite directions at its pivot. The out-degree
        identity d+_base(v) = d+_derived(v) + (d_base(v) - d_derived(v))/2
        is checked before returning.
        """
        if not derived_orientation.is_total():
            raise GraphError("need a total orientation of the derived graph")
        if set(derived_orientation.assigned_ids()) != set(self.derived.edge_ids()):
            raise GraphError("orientation does not match the derived graph")
        arcs: dict[EdgeId, tuple[Vertex, Vertex]] = {
            e: (derived_orientation.tail(e), derived_orientation.head(e))
            for e in self.derived.edge_ids()
        }
        for s in reversed(self.steps):
            if s.created is None:
                arcs[s.left] = (s.left_end, s.pivot)
                arcs[s.right] = (s.pivot, s.right_end)
                continue
            tail, _ = arcs.pop(s.created)
            if tail == s.left_end:
                arcs[s.left] = (s.left_end, s.pivot)
                arcs[s.right] = (s.pivot, s.right_end)
            else:
                arcs[s.left] = (s.pivot, s.left_end)
                arcs[s.right] = (s.right_end, s.pivot)
        out = Orientation(self.base)
        for eid, (tail, _) in arcs.items():
            out.orient_out_of(eid, tail)
        for v in self.base.vertices:
            d_b, d_d = self.base.degree(v), self.derived.degree(v)
            got = out.out_degree(v)
            want = derived_orientation.out_degree(v) + (d_b - d_d) // 2
            if got != want:
                raise ContractViolation(f"induced out-degree at {v}: {got} != {want}")
        return out


def restricted_ledger(
    ledger: LiftLedger,
    derived_edges,
    *,
    include_annihilated: bool = False,
) -> tuple[LiftLedger, dict[EdgeId, EdgeId]]:
    """Carve the history of some derived edges into a standalone ledger.

    Every step feeds exactly one surviving derived edge (or an annihilated
    pair), so the steps behind the chosen edges form a valid sub-history on
    the base edges of their trails. `include_annihilated` routes the
    annihilated leftovers into the restriction as well; their steps replay
    too, so the restricted derived graph still realizes only the chosen
    edges. Created ids are renumbered; the returned map sends each chosen
    derived id to its stand-in (base ids stay themselves).
    """
    keep = set(derived_edges)
    unknown = keep - set(ledger.derived.edge_ids())
    if unknown:
        raise GraphError(f"not derived edges: {sorted(unknown)}")
    WANT, SKIP, GONE = "want", "skip", "gone"
    owner: dict[EdgeId, str] = {
        e: (WANT if e in keep else SKIP) for e in ledger.derived.edge_ids()
    }
    fate = []
    for s in reversed(ledger.steps):
        f = GONE if s.created is None else owner[s.created]
        owner[s.left] = owner[s.right] = f
        fate.append(f)
    fate.reverse()
    wanted = {WANT, GONE} if include_annihilated else {WANT}
    sub = LiftLedger(
        ledger.base.keep_edges(e for e in ledger.base.edge_ids() if owner[e] in wanted)
    )
    alias = {e: e for e in sub.base.edge_ids()}
    for s, f in zip(ledger.steps, fate):
        if f not in wanted:
            continue
        sub.lift(alias[s.left], alias[s.right], pivot=s.pivot)
        made = sub.steps[-1].created
        if s.created is not None:
            alias[s.created] = made
    rename = {e: alias[e] for e in keep}
    for old, new in rename.items():
        if set(sub.derived.endpoints(new)) != set(ledger.derived.endpoints(old)):
            raise ContractViolation(f"stand-in for {old} has the wrong endpoints")
    if sub.derived.m != len(keep):
        raise ContractViolation("restricted history left extra edges behind")
    return sub, rename


def lift_pair(
    g: MultiGraph,
    e1: EdgeId,
    e2: EdgeId,
    ledger: LiftLedger | None = None,
    pivot: Vertex | None = None,
) -> MultiGraph:
    """Lift one pair of incident edges; records into ledger when given."""
    if ledger is not None:
        if ledger.derived != g:
            raise GraphError("graph is not the ledger's current derived graph")
        return ledger.lift(e1, e2, pivot)
    return LiftLedger(g).lift(e1, e2, pivot)


# -- admissibility ------------------------------------------------------


@dataclass(frozen=True)
class PreserveLambda:
    lam: int


@dataclass(frozen=True)
class PreserveParity:
    m: int
    m_prime: int


@dataclass(frozen=True)
class PreserveSizeParity:
    n: int
    n_prime: int


LiftMode = PreserveLambda | PreserveParity | PreserveSizeParity


def _mode_holds(g: MultiGraph, u: Vertex | None, mode: LiftMode) -> bool:
    """The connectivity condition the mode promises to preserve.

    With u gone from the graph pass u=None: the subset domain over the
    remaining vertices coincides with the excluded-vertex domain.
    """
    if isinstance(mode, PreserveLambda):
        return is_lambda_at_least(g, mode.lam)
    if isinstance(mode, PreserveParity):
        return bool(
            is_parity_edge_connected(g, mode.m, mode.m_prime, CUT_PARITY, excluded_vertex=u)
        )
    return bool(
        is_parity_edge_connected(g, mode.n, mode.n_prime, SET_CARDINALITY, excluded_vertex=u)
    )


def _mode_precondition(g: MultiGraph, u: Vertex, mode: LiftMode) -> bool:
    d = g.degree(u)
    if isinstance(mode, PreserveLambda):
        return mode.lam >= 2 and d >= mode.lam + 2 and is_lambda_at_least(g, mode.lam)
    if isinstance(mode, PreserveParity):
        degree_ok = d % 2 == 0 or d >= 2 * mode.m_prime + 2
        return degree_ok and _mode_holds(g, u, mode)
    degree_ok = d >= 2 * mode.n_prime + 2
    even = all(g.degree(v) % 2 == 0 for v in g.vertices)
    return even and degree_ok and _mode_holds(g, u, mode)


def _candidate_pairs(g: MultiGraph, u: Vertex, fixed: EdgeId | None):
    inc = g.incident(u)
    if fixed is not None:
        if fixed not in inc:
            raise GraphError(f"edge {fixed} is not incident to {u}")
        pairs = [(fixed, e) for e in inc if e != fixed]
    else:
        pairs = [(a, b) for i, a in enumerate(inc) for b in inc[i + 1 :]]
    nonparallel = [p for p in pairs if g.other_end(p[0], u) != g.other_end(p[1], u)]
    parallel = [p for p in pairs if g.other_end(p[0], u) == g.other_end(p[1], u)]
    return nonparallel, parallel


def find_admissible_lift(
    g: MultiGraph,
    u: Vertex,
    mode: LiftMode,
    fixed: EdgeId | None = None,
) -> tuple[EdgeId, EdgeId]:
    """First lift pair at u whose result still satisfies the mode's condition.

    Pairs are tried with the fixed edge first (when given) and partners by
    ascending EdgeId; non-parallel pairs come before parallel ones, and the
    parity modes only fall back to a parallel pair when u has a single
    neighbour. Admissibility is re-verified on the lifted graph, never
    assumed from theory.
    """
    precondition_ok = _mode_precondition(g, u, mode)
    nonparallel, parallel = _candidate_pairs(g, u, fixed)
    candidates = list(nonparallel)
    allow_parallel = isinstance(mode, PreserveLambda) or len(g.neighbors(u)) <= 1
    if allow_parallel:
        candidates += parallel
    for e1, e2 in candidates:
        lifted = lift_pair(g, e1, e2, pivot=u)
        if _mode_holds(lifted, u, mode):
            return e1, e2
    if precondition_ok:
        raise ContractViolation(f"no admissible lift at {u} despite valid preconditions")
    raise PreconditionError(f"mode preconditions fail at {u} and no admissible lift exists")


def _split_invariant(g: MultiGraph, u: Vertex, mode: LiftMode) -> bool:
    """What a complete split-off must maintain while u still has edges.

    For plain edge-connectivity this is pairwise local connectivity among
    the other vertices; the parity conditions are already u-avoiding.
    """
    if isinstance(mode, PreserveLambda):
        floor = pair_connectivity_floor(g, u)
        return floor is None or floor >= mode.lam
    return _mode_holds(g, u, mode)


def split_off_vertex(g: MultiGraph, u: Vertex, mode: LiftMode) -> tuple[MultiGraph, LiftLedger]:
    """Lift away all edges at u (even degree), then drop the vertex.

    The returned graph satisfies the mode's connectivity condition, verified
    on the result rather than trusted. The ledger's derived graph still
    contains u as an isolated vertex.
    """
    if u not in g.vertices:
        raise GraphError(f"unknown vertex {u}")
    if g.degree(u) % 2:
        raise GraphError(f"degree {g.degree(u)} at {u} is odd")
    if isinstance(mode, PreserveLambda) and mode.lam < 2:
        raise PreconditionError("edge-connectivity splitting needs lambda >= 2")
    if not _split_invariant(g, u, mode):
        raise PreconditionError("the mode's condition fails before any lift")
    ledger = LiftLedger(g)
    while ledger.derived.degree(u) > 0:
        cur = ledger.derived
        nonparallel, parallel = _candidate_pairs(cur, u, None)
        candidates = nonparallel + (
            parallel if isinstance(mode, PreserveLambda) or len(cur.neighbors(u)) <= 1 else []
        )
        chosen = None
        for e1, e2 in candidates:
            probe = lift_pair(cur, e1, e2, pivot=u)
            if _split_invariant(probe, u, mode):
                chosen = (e1, e2)
                break
        if chosen is None:
            raise ContractViolation(f"no admissible pair while splitting off {u}")
        ledger.lift(*chosen, pivot=u)
    result = ledger.derived.remove_vertex(u)
    if result.n >= 2 and not _mode_holds(result, None, mode):
        raise ContractViolation("split-off result fails the mode's condition")
    return result, ledger


def split_off_tree_connected(g: MultiGraph, u: Vertex, m: int) -> tuple[MultiGraph, LiftLedger]:
    """Split off u from an m-tree-connected graph using non-parallel lifts.

    Requires d(u) <= 2m; uses at most d(u) - m lifts. Edges at u that no
    lift consumed stay on the ledger's derived graph (they are the
    caller's to orient or discard; `derived.incident(u)` lists them) and
    the returned graph simply omits them along with u.

    The greedy pass works per spanning tree: trees meeting u at least
    twice borrow single-edge trees' u-edges, then pairs joining different
    components are lifted until the tree minus u reconnects. Should the
    greedy pass ever dead-end, an exhaustive search over non-parallel
    pairings takes over.
    """
    from .tree_packing import Packing, spanning_tree_packing

    if u not in g.vertices:
        raise GraphError(f"unknown vertex {u}")
    if g.n < 2:
        raise GraphError("splitting needs another vertex to keep")
    d_u = g.degree(u)
    if d_u > 2 * m:
        raise PreconditionError(f"degree {d_u} at {u} exceeds 2m = {2 * m}")
    packing = spanning_tree_packing(g, m)
    if not isinstance(packing, Packing):
        raise PreconditionError(f"graph is not {m}-tree-connected")
    try:
        ledger = _greedy_tree_split(g, u, packing)
        if len(ledger) > d_u - m:
            raise ContractViolation(f"{len(ledger)} lifts exceed the {d_u - m} bound")
    except ContractViolation:
        ledger = _exhaustive_tree_split(g, u, m)
    result = ledger.derived.remove_vertex(u)
    if not isinstance(spanning_tree_packing(result, m), Packing):
        raise ContractViolation("split-off result is not m-tree-connected")
    return result, ledger


def _greedy_tree_split(g: MultiGraph, u: Vertex, packing) -> LiftLedger:
    trees = [set(t) for t in packing.trees]
    at_u = set(g.incident(u))
    big = [t for t in trees if len(t & at_u) >= 2]
    singles = [t for t in trees if len(t & at_u) == 1]
    spare = sorted(e for t in singles for e in (t & at_u))
    ledger = LiftLedger(g)
    for tree in big:
        need = len(tree & at_u) - 2
        boosted = set(tree) | set(spare[:need])
        spare = spare[need:]
        _reconnect_without(ledger, boosted, u)
    return ledger


def _exhaustive_tree_split(g: MultiGraph, u: Vertex, m: int) -> LiftLedger:
    """Search over sequences of non-parallel lifts at u, shortest first.

    Every probe replays its whole sequence through a fresh ledger so the
    edge ids seen during the search are the ids of the final ledger.
    """
    from .tree_packing import Packing, spanning_tree_packing

    limit = g.degree(u) - m

    def replay(seq: list[tuple[EdgeId, EdgeId]]) -> LiftLedger:
        led = LiftLedger(g)
        for e1, e2 in seq:
            led.lift(e1, e2, pivot=u)
        return led

    def search(seq: list[tuple[EdgeId, EdgeId]]) -> list | None:
        cur = replay(seq).derived
        if isinstance(spanning_tree_packing(cur.remove_vertex(u), m), Packing):
            return seq
        if len(seq) == limit:
            return None
        inc = cur.incident(u)
        for i, e1 in enumerate(inc):
            for e2 in inc[i + 1 :]:
                if cur.other_end(e1, u) == cur.other_end(e2, u):
                    continue
                found = search(seq + [(e1, e2)])
                if found is not None:
                    return found
        return None

    seq = search([])
    if seq is None:
        raise ContractViolation(f"no lift sequence at {u} within {limit} steps")
    return replay(seq)


def _components_without(g: MultiGraph, edge_ids: set[EdgeId], u: Vertex) -> list[set[Vertex]]:
    parent = {v: v for v in g.vertices if v != u}

    def find(x: Vertex) -> Vertex:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in edge_ids:
        a, b = g.endpoints(e)
        if u in (a, b):
            continue
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict[Vertex, set[Vertex]] = {}
    for v in parent:
        comps.setdefault(find(v), set()).add(v)
    return sorted(comps.values(), key=min)


def _reconnect_without(ledger: LiftLedger, edge_ids: set[EdgeId], u: Vertex) -> None:
    """Lift pairs inside one edge set until it is connected avoiding u.

    Each lift takes two u-edges of the set reaching different components,
    so the pair is never parallel. The set is mutated to track consumed
    and created edges.
    """
    while True:
        g = ledger.derived
        comps = _components_without(g, edge_ids, u)
        if len(comps) <= 1:
            return
        by_comp: list[list[EdgeId]] = []
        for comp in comps:
            reaching = sorted(
                e for e in edge_ids if u in g.endpoints(e) and g.other_end(e, u) in comp
            )
            by_comp.append(reaching)
        if len(comps) == 2:
            first, second = by_comp
            if not first or not second:
                raise ContractViolation("a component lost its pivot edges")
        else:
            rich = next((i for i, r in enumerate(by_comp) if len(r) >= 2), None)
            if rich is None:
                raise ContractViolation("no component keeps two pivot edges")
            first = by_comp[rich]
            second = next((r for i, r in enumerate(by_comp) if i != rich and r), None)
            if second is None:
                raise ContractViolation("no second component reaches the pivot")
        e1, e2 = first[0], second[0]
        edge_ids.discard(e1)
        edge_ids.discard(e2)
        ledger.lift(e1, e2, pivot=u)
        created = ledger.steps[-1].created
        if created is not None:
            edge_ids.add(created)


def induce_orientation(ledger: LiftLedger, oriented_derived: Orientation) -> Orientation:
    return ledger.induce_orientation(oriented_derived)
