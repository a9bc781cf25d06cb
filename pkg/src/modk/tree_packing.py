"""Spanning-tree packings, deficiency certificates, and rooted branchings.

The packing routine is a matroid-union augmentation: it returns either m
edge-disjoint spanning trees or a partition of the vertices whose total
boundary is too small for m trees to exist. Exactly one of the two comes
back, never neither. On top of it sit the constrained packing that avoids
a prescribed edge set and the edge-disjoint branchings with chosen root
multiplicities and per-vertex degree caps.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .connectivity import is_lambda_at_least
from .errors import ContractViolation, GraphError, PreconditionError
from .lifting import LiftLedger, LiftStep, PreserveLambda, find_admissible_lift
from .multigraph import EdgeId, MultiGraph, Orientation, Vertex

KIND_OUT = "out"
KIND_IN = "in"


def _is_spanning_tree(g: MultiGraph, eids) -> bool:
    want = max(g.n - 1, 0)
    if len(eids) != want:
        return False
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    merged = 0
    for e in eids:
        a, b = g.endpoints(e)
        ra, rb = find(a), find(b)
        if ra == rb:
            return False
        parent[ra] = rb
        merged += 1
    return merged == want


@dataclass(frozen=True)
class Packing:
    host: MultiGraph
    trees: tuple[frozenset[EdgeId], ...]

    def verify(self) -> None:
        seen: set[EdgeId] = set()
        for t in self.trees:
            for e in t:
                if not self.host.has_edge(e):
                    raise ContractViolation(f"edge {e} is not in the host graph")
                if e in seen:
                    raise ContractViolation(f"edge {e} is in two trees")
                seen.add(e)
            if not _is_spanning_tree(self.host, t):
                raise ContractViolation("a tree of the packing does not span")


@dataclass(frozen=True)
class DeficientPartition:
    """Vertex partition certifying that m edge-disjoint spanning trees
    cannot exist: the total boundary is below 2m(t-1)."""

    parts: tuple[tuple[Vertex, ...], ...]
    boundary_sum: int
    required: int

    def verify(self, g: MultiGraph, m: int) -> None:
        flat = [v for part in self.parts for v in part]
        if sorted(flat) != list(g.vertices):
            raise ContractViolation("parts do not partition the vertices")
        total = sum(g.boundary(part) for part in self.parts)
        if total != self.boundary_sum:
            raise ContractViolation("stored boundary sum is wrong")
        if self.required != 2 * m * (len(self.parts) - 1):
            raise ContractViolation("stored requirement is wrong")
        if total >= self.required:
            raise ContractViolation("partition is not deficient")


def _forest_path(g: MultiGraph, forest: set[EdgeId], s: Vertex, t: Vertex):
    """Edges of the forest on the s..t path, or None when s,t are in
    different forest components (the tested edge is insertable)."""
    via: dict[Vertex, tuple[Vertex, EdgeId] | None] = {s: None}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            break
        for e in g.incident(v):
            if e not in forest:
                continue
            w = g.other_end(e, v)
            if w in via:
                continue
            via[w] = (v, e)
            queue.append(w)
    if t not in via:
        return None
    path = []
    v = t
    while via[v] is not None:
        v, e = via[v]
        path.append(e)
    return path


def _augment(g: MultiGraph, forests: list[set[EdgeId]], e: EdgeId):
    """Try to work e into the forests, moving edges between them along
    exchange chains. Returns (placed, visited-edge-set)."""
    parent: dict[EdgeId, tuple[EdgeId, int] | None] = {e: None}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        a, b = g.endpoints(x)
        for i, forest in enumerate(forests):
            if x in forest:
                continue
            cycle = _forest_path(g, forest, a, b)
            if cycle is None:
                forest.add(x)
                while parent[x] is not None:
                    prev, j = parent[x]
                    forests[j].remove(x)
                    forests[j].add(prev)
                    x = prev
                return True, set()
            for y in cycle:
                if y not in parent:
                    parent[y] = (x, i)
                    queue.append(y)
    return False, set(parent)


def spanning_tree_packing(g: MultiGraph, m: int):
    """m edge-disjoint spanning trees, or the deficient partition refuting
    them. The certificate comes from the blocking structure of the failed
    augmentations and is re-verified arithmetically before returning."""
    if m < 0:
        raise PreconditionError(f"tree count {m} is negative")
    if m == 0:
        return Packing(g, ())
    forests: list[set[EdgeId]] = [set() for _ in range(m)]
    for e in g.edge_ids():
        _augment(g, forests, e)
    target = m * max(g.n - 1, 0)
    if sum(len(f) for f in forests) == target:
        packing = Packing(g, tuple(frozenset(f) for f in forests))
        packing.verify()
        return packing
    placed = set().union(*forests)
    blocked: set[EdgeId] = set()
    for e in g.edge_ids():
        if e in placed or e in blocked:
            continue
        ok, visited = _augment(g, forests, e)
        if ok:
            raise ContractViolation("augmentation succeeded on a second pass")
        blocked |= visited
    comps = _edge_set_components(g, blocked)
    parts = tuple(tuple(sorted(c)) for c in comps)
    cert = DeficientPartition(
        parts,
        sum(g.boundary(p) for p in parts),
        2 * m * (len(parts) - 1),
    )
    cert.verify(g, m)
    return cert


def _edge_set_components(g: MultiGraph, eids: set[EdgeId]) -> list[set[Vertex]]:
    parent = {v: v for v in g.vertices}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in eids:
        a, b = g.endpoints(e)
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
    comps: dict[Vertex, set[Vertex]] = {}
    for v in g.vertices:
        comps.setdefault(find(v), set()).add(v)
    return sorted(comps.values(), key=min)


def is_tree_connected(g: MultiGraph, m: int) -> bool:
    return isinstance(spanning_tree_packing(g, m), Packing)


# -- constrained packings -------------------------------------------------


def _packing_avoiding(g: MultiGraph, m: int, avoid) -> Packing | None:
    res = spanning_tree_packing(g.delete_edges(avoid), m)
    if isinstance(res, Packing):
        packing = Packing(g, res.trees)
        packing.verify()
        return packing
    return None


def _catlin_with_witness(
    g: MultiGraph, m: int, blocked: frozenset[EdgeId], z0: Vertex | None
) -> tuple[Packing, EdgeId | None]:
    """Packing avoiding the blocked edges, and additionally one edge at the
    odd-degree vertex z0 when given; returns that edge too."""
    if z0 is None:
        packing = _packing_avoiding(g, m, blocked)
        if packing is None:
            raise ContractViolation("no packing avoiding the blocked edges")
        return packing, None
    for e in sorted(set(g.incident(z0)) - blocked):
        packing = _packing_avoiding(g, m, blocked | {e})
        if packing is not None:
            return packing, e
    raise ContractViolation(f"no excludable edge at {z0} admits a packing")


def catlin_factor(
    g: MultiGraph,
    m: int,
    M,
    z0: Vertex | None = None,
    e: EdgeId | None = None,
) -> Packing:
    """m edge-disjoint spanning trees avoiding the m-edge set M, plus one
    more edge at an odd-degree vertex when requested.

    An explicit edge e is only promised to work when d(z0) = 2m+1 and all
    of M sits at z0; otherwise pass z0 alone and the edge is chosen.
    """
    blocked = frozenset(M)
    if g.n < 2:
        raise PreconditionError("need at least two vertices")
    if len(blocked) != m:
        raise PreconditionError(f"blocked set has {len(blocked)} edges, expected {m}")
    for x in blocked:
        if not g.has_edge(x):
            raise GraphError(f"unknown edge {x}")
    if not is_lambda_at_least(g, 2 * m):
        raise PreconditionError(f"graph is not {2 * m}-edge-connected")
    if z0 is not None:
        if z0 not in g.vertices:
            raise GraphError(f"unknown vertex {z0}")
        if g.degree(z0) % 2 == 0:
            raise PreconditionError(f"vertex {z0} has even degree")
    if e is not None:
        if z0 is None:
            raise PreconditionError("an explicit excluded edge needs its vertex")
        if e in blocked:
            raise PreconditionError("excluded edge lies in the blocked set")
        if z0 not in g.endpoints(e):
            raise PreconditionError(f"edge {e} is not incident with {z0}")
        packing = _packing_avoiding(g, m, blocked | {e})
        if packing is not None:
            return packing
        forced = g.degree(z0) == 2 * m + 1 and all(
            z0 in g.endpoints(x) for x in blocked
        )
        if forced:
            raise ContractViolation("packing missing in the guaranteed case")
        raise PreconditionError("this edge is outside the existence guarantee")
    return _catlin_with_witness(g, m, blocked, z0)[0]


# -- branchings -----------------------------------------------------------


@dataclass(frozen=True)
class Branching:
    root: Vertex
    edges: frozenset[EdgeId]
    kind: str  # "out" | "in"


@dataclass(frozen=True)
class BranchingSet:
    orientation: Orientation
    branchings: tuple[Branching, ...]

    def verify(self, r=None, z0: Vertex | None = None, kind: str | None = None) -> None:
        g = self.orientation.host
        if not self.orientation.is_total():
            raise ContractViolation("orientation is not total")
        used: set[EdgeId] = set()
        for b in self.branchings:
            if used & b.edges:
                raise ContractViolation("branchings share an edge")
            used |= b.edges
            _check_branching(g, self.orientation, b)
        if r is not None:
            counts = {v: 0 for v in g.vertices}
            for b in self.branchings:
                counts[b.root] += 1
            for v in g.vertices:
                if counts[v] != r.get(v, 0):
                    raise ContractViolation(f"vertex {v} roots {counts[v]} branchings")
        if z0 is not None:
            kinds = {b.kind for b in self.branchings}
            if kind is None:
                if len(kinds) != 1:
                    raise ContractViolation("degree caps need a single kind")
                (kind,) = kinds
            for v in g.vertices:
                deg = (
                    self.orientation.out_degree(v)
                    if kind == KIND_OUT
                    else self.orientation.in_degree(v)
                )
                cap = g.degree(v) // 2 if v == z0 else (g.degree(v) + 1) // 2
                if deg > cap:
                    raise ContractViolation(f"degree cap fails at {v}: {deg} > {cap}")


def _check_branching(g: MultiGraph, orientation: Orientation, b: Branching) -> None:
    if b.kind not in (KIND_OUT, KIND_IN):
        raise ContractViolation(f"unknown kind {b.kind!r}")
    if not _is_spanning_tree(g, b.edges):
        raise ContractViolation("branching is not a spanning tree")
    inward = {v: 0 for v in g.vertices}
    for e in b.edges:
        v = orientation.head(e) if b.kind == KIND_OUT else orientation.tail(e)
        inward[v] += 1
    for v in g.vertices:
        want = 0 if v == b.root else 1
        if inward[v] != want:
            raise ContractViolation(f"branching degree rule fails at {v}")


def _root_factor(g: MultiGraph, roots: list[Vertex]) -> dict[EdgeId, Vertex]:
    """Distinct edges, one per root slot, each incident with its slot's
    vertex. Augmenting-path matching, deterministic by EdgeId order."""
    owner: dict[EdgeId, int] = {}

    def claim(slot: int, tried: set[EdgeId]) -> bool:
        for e in g.incident(roots[slot]):
            if e in tried:
                continue
            tried.add(e)
            if e not in owner or claim(owner[e], tried):
                owner[e] = slot
                return True
        return False

    for slot in range(len(roots)):
        if not claim(slot, set()):
            raise ContractViolation("no edge set realizes the root multiplicities")
    return {e: roots[slot] for e, slot in owner.items()}


def _oriented_tree(g: MultiGraph, tree: frozenset[EdgeId], root: Vertex, kind: str):
    """(eid, tail) pairs orienting the tree away from (out) or toward (in)
    the root."""
    via: dict[Vertex, tuple[Vertex, EdgeId] | None] = {root: None}
    queue = deque([root])
    order = []
    while queue:
        v = queue.popleft()
        for e in g.incident(v):
            if e not in tree:
                continue
            w = g.other_end(e, v)
            if w in via:
                continue
            via[w] = (v, e)
            queue.append(w)
            order.append((e, v if kind == KIND_OUT else w))
    if len(via) != g.n:
        raise ContractViolation("tree does not reach every vertex")
    return order


def _balanced_orientation(g: MultiGraph, z0: Vertex | None = None) -> Orientation:
    """Orientation with every out-degree in {floor(d/2), ceil(d/2)}, and
    out-degree exactly floor at z0. Closed walks over the graph with odd
    vertices paired by dummy edges."""
    odd = [v for v in g.vertices if g.degree(v) % 2]
    aug, _ = g.add_edges(list(zip(odd[::2], odd[1::2])))
    unused = set(aug.edge_ids())
    tails: dict[EdgeId, Vertex] = {}
    while unused:
        start = min(v for v in aug.vertices if any(e in unused for e in aug.incident(v)))
        v = start
        while True:
            e = min((x for x in aug.incident(v) if x in unused), default=None)
            if e is None:
                break
            unused.remove(e)
            tails[e] = v
            v = aug.other_end(e, v)
    flip = (
        z0 is not None
        and g.degree(z0) % 2 == 1
        and sum(1 for e in g.incident(z0) if tails[e] == z0) > g.degree(z0) // 2
    )
    out = Orientation(g)
    for e in g.edge_ids():
        tail = tails[e]
        out.orient_out_of(e, tail if not flip else g.other_end(e, tail))
    return out


def _base_branchings(h: MultiGraph, r, kind: str, z0: Vertex, m: int):
    """Branchings when every degree is at most 2m+1: a root-realizing edge
    set oriented by slot, a constrained packing for the trees, one guarded
    edge at z0 when its degree is odd, and the rest in stored order."""
    roots = [v for v in h.vertices for _ in range(r.get(v, 0))]
    owner = _root_factor(h, roots)
    blocked = frozenset(owner)
    packing, z_edge = _catlin_with_witness(
        h, m, blocked, z0 if h.degree(z0) % 2 == 1 else None
    )
    orientation = Orientation(h)
    for e, root_v in owner.items():
        inward = kind == KIND_OUT
        orientation.orient_out_of(e, h.other_end(e, root_v) if inward else root_v)
    if z_edge is not None:
        tail = h.other_end(z_edge, z0) if kind == KIND_OUT else z0
        orientation.orient_out_of(z_edge, tail)
    branchings = []
    for tree, root_v in zip(packing.trees, roots):
        for e, tail in _oriented_tree(h, tree, root_v, kind):
            orientation.orient_out_of(e, tail)
        branchings.append(Branching(root_v, tree, kind))
    for e in h.edge_ids():
        if e not in orientation.assigned_ids():
            orientation.orient_out_of(e, h.endpoints(e)[0])
    return orientation, tuple(branchings)


def transfer_branchings_across_lift(
    before: MultiGraph,
    step: LiftStep,
    oriented: Orientation,
    branchings: tuple[Branching, ...],
) -> tuple[Orientation, tuple[Branching, ...]]:
    """Pull an orientation plus branchings back across one lift step.

    The created edge's direction runs through the pivot; if some branching
    used that edge it is repaired with the restored edges, keeping its
    root and kind. Everything else is untouched.
    """
    after = oriented.host
    arcs = {e: (oriented.tail(e), oriented.head(e)) for e in after.edge_ids()}
    u = step.pivot
    if step.created is None:
        arcs[step.left] = (step.left_end, u)
        arcs[step.right] = (u, step.right_end)
        repaired = branchings
    else:
        a, b = arcs.pop(step.created)
        if a == step.left_end:
            edge_au, edge_ub = step.left, step.right
        else:
            edge_au, edge_ub = step.right, step.left
        arcs[edge_au] = (a, u)
        arcs[edge_ub] = (u, b)
        repaired = tuple(
            _repair_branching(after, oriented, br, step.created, u, a, b, edge_au, edge_ub)
            for br in branchings
        )
    out = Orientation(before)
    for e, (tail, _) in arcs.items():
        out.orient_out_of(e, tail)
    return out, repaired


def _repair_branching(
    after: MultiGraph,
    oriented: Orientation,
    br: Branching,
    created: EdgeId,
    u: Vertex,
    a: Vertex,
    b: Vertex,
    edge_au: EdgeId,
    edge_ub: EdgeId,
) -> Branching:
    if created not in br.edges:
        return br
    rest = br.edges - {created}
    if br.kind == KIND_OUT:
        if _reaches(after, rest, a, u):
            edges = rest | {edge_ub}
        else:
            (in_arc,) = [e for e in rest if oriented.head(e) == u]
            edges = (rest - {in_arc}) | {edge_ub, edge_au}
    else:
        if _reaches(after, rest, b, u):
            edges = rest | {edge_au}
        else:
            (out_arc,) = [e for e in rest if oriented.tail(e) == u]
            edges = (rest - {out_arc}) | {edge_au, edge_ub}
    return Branching(br.root, edges, br.kind)


def _reaches(g: MultiGraph, eids: frozenset[EdgeId], s: Vertex, t: Vertex) -> bool:
    seen = {s}
    queue = deque([s])
    while queue:
        v = queue.popleft()
        if v == t:
            return True
        for e in g.incident(v):
            if e not in eids:
                continue
            w = g.other_end(e, v)
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return t in seen


def disjoint_branchings(g: MultiGraph, r, kind: str, z0: Vertex) -> BranchingSet:
    """Total orientation plus edge-disjoint branchings where each vertex v
    roots r(v) of them, with out-degree (kind out) or in-degree (kind in)
    capped by half the degree, rounded down at z0.

    High degrees are lifted away first; the flat graph gets its branchings
    directly and each lift is undone with its repair rule.
    """
    if kind not in (KIND_OUT, KIND_IN):
        raise GraphError(f"unknown kind {kind!r}")
    if z0 not in g.vertices:
        raise GraphError(f"unknown vertex {z0}")
    for v, k in r.items():
        if v not in g.vertices:
            raise GraphError(f"unknown vertex {v} in the root table")
        if k < 0:
            raise GraphError(f"negative multiplicity at {v}")
    m = sum(r.values())
    if not is_lambda_at_least(g, 2 * m):
        raise PreconditionError(f"graph is not {2 * m}-edge-connected")
    if m == 0:
        oriented = _balanced_orientation(g, z0)
        if kind == KIND_IN:
            # the in-degree is the capped one, so put the floor there
            rev = Orientation(g)
            for e in g.edge_ids():
                rev.orient_out_of(e, oriented.head(e))
            oriented = rev
        out = BranchingSet(oriented, ())
        out.verify(r, z0, kind)
        return out
    if g.n == 1:
        out = BranchingSet(Orientation(g), tuple(Branching(z0, frozenset(), kind) for _ in range(m)))
        out.verify(r, z0, kind)
        return out
    ledger = LiftLedger(g)
    while True:
        cur = ledger.derived
        u = next((v for v in cur.vertices if cur.degree(v) >= 2 * m + 2), None)
        if u is None:
            break
        ledger.lift(*find_admissible_lift(cur, u, PreserveLambda(2 * m)), pivot=u)
    orientation, branchings = _base_branchings(ledger.derived, r, kind, z0, m)
    stages = [ledger.base]
    for s in ledger.steps:
        nxt = stages[-1].delete_edges((s.left, s.right))
        if s.created is not None:
            nxt, (made,) = nxt.add_edges([(s.left_end, s.right_end)], start=s.created)
            assert made == s.created
        stages.append(nxt)
    for i in reversed(range(len(ledger.steps))):
        orientation, branchings = transfer_branchings_across_lift(
            stages[i], ledger.steps[i], orientation, branchings
        )
    out = BranchingSet(orientation, branchings)
    out.verify(r, z0, kind)
    return out


# -- dense subgraphs ------------------------------------------------------


def tree_connected_subgraph(g: MultiGraph, m: int) -> tuple[Vertex, ...]:
    """Vertex set with at least two vertices inducing an m-tree-connected
    subgraph, found by descending into a part of each deficient partition
    that still has enough internal edges."""
    if g.n < 2:
        raise PreconditionError("need at least two vertices")
    if g.m < m * (g.n - 1):
        raise PreconditionError(f"need at least {m * (g.n - 1)} edges, have {g.m}")
    current = tuple(g.vertices)
    while True:
        sub = g.induced(current)
        res = spanning_tree_packing(sub, m)
        if isinstance(res, Packing):
            return current
        chosen = None
        for part in res.parts:
            if len(part) >= 2 and sub.induced(part).m >= m * (len(part) - 1):
                chosen = part
                break
        if chosen is None:
            raise ContractViolation("no part of the deficient partition is dense")
        current = chosen
