"""Edge-connectivity queries: global, parity-refined, essential, bipartite index.

Everything here is exact. Subset-enumeration checks carry a size guard and
report "unverified" beyond it instead of guessing.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from itertools import combinations

from .errors import GraphError, PreconditionError, SizeGuardExceeded
from .multigraph import EdgeId, MultiGraph, Vertex

SUBSET_GUARD = 20

CUT_PARITY = "cut_parity"
SET_CARDINALITY = "set_cardinality"

ODD_CUT = "odd_cut"
EVEN_CUT = "even_cut"
ODD_CARDINALITY = "odd_cardinality"
EVEN_CARDINALITY = "even_cardinality"


@dataclass(frozen=True)
class CutCertificate:
    witness_set: tuple[Vertex, ...]
    cut_value: int
    parity_tag: str


def _cut_certificate(witness: tuple[Vertex, ...], value: int) -> CutCertificate:
    return CutCertificate(witness, value, ODD_CUT if value % 2 else EVEN_CUT)


@dataclass(frozen=True)
class ParityCheckResult:
    status: str  # "holds" | "violated" | "unverified"
    certificate: CutCertificate | None = None

    def __bool__(self) -> bool:
        return self.status == "holds"


def _weight_matrix(g: MultiGraph) -> dict[Vertex, dict[Vertex, int]]:
    w: dict[Vertex, dict[Vertex, int]] = {v: {} for v in g.vertices}
    for _, u, v in g.edges():
        w[u][v] = w[u].get(v, 0) + 1
        w[v][u] = w[v].get(u, 0) + 1
    return w


def _canonical_side(witness: frozenset[Vertex], all_vertices: tuple[Vertex, ...]) -> tuple[Vertex, ...]:
    a = tuple(sorted(witness))
    b = tuple(sorted(set(all_vertices) - witness))
    return min(a, b)


def edge_connectivity(g: MultiGraph) -> CutCertificate:
    """Global minimum edge cut with a witness side.

    Stoer-Wagner with deterministic tie-breaks; among the minimum cuts the
    algorithm encounters, the lexicographically smallest witness side wins.
    """
    if g.n < 2:
        raise GraphError("edge connectivity needs at least two vertices")
    comps = g.connected_components()
    if len(comps) > 1:
        return _cut_certificate(min(_canonical_side(frozenset(c), g.vertices) for c in comps), 0)
    w = _weight_matrix(g)
    merged: dict[Vertex, frozenset[Vertex]] = {v: frozenset((v,)) for v in g.vertices}
    active = list(g.vertices)
    candidates: list[tuple[int, tuple[Vertex, ...]]] = []
    while len(active) > 1:
        # maximum adjacency order, ties by smallest label
        start = active[0]
        order = [start]
        weight_to = {v: w[start].get(v, 0) for v in active if v != start}
        while weight_to:
            nxt = max(sorted(weight_to), key=lambda v: weight_to[v])
            order.append(nxt)
            del weight_to[nxt]
            for v in weight_to:
                weight_to[v] += w[nxt].get(v, 0)
        t = order[-1]
        s = order[-2]
        cut_value = sum(w[t].get(v, 0) for v in active if v != t)
        candidates.append((cut_value, _canonical_side(merged[t], g.vertices)))
        # merge t into s
        for v, c in list(w[t].items()):
            if v == s:
                continue
            w[s][v] = w[s].get(v, 0) + c
            w[v][s] = w[s][v]
            del w[v][t]
        w[s].pop(t, None)
        del w[t]
        merged[s] = merged[s] | merged[t]
        active.remove(t)
    best = min(c for c, _ in candidates)
    witness = min(side for c, side in candidates if c == best)
    return _cut_certificate(witness, best)


def is_lambda_at_least(g: MultiGraph, lam: int) -> bool:
    """Whether every proper nonempty vertex set has boundary >= lam (vacuous for n <= 1)."""
    if g.n <= 1:
        return True
    if lam <= 0:
        return True
    if not g.is_connected():
        return False
    if lam == 1:
        return True
    if lam == 2:
        return not _has_bridge(g)
    return edge_connectivity(g).cut_value >= lam


def _has_bridge(g: MultiGraph) -> bool:
    # Tarjan low-link over the multigraph; a parallel pair is never a bridge.
    disc: dict[Vertex, int] = {}
    low: dict[Vertex, int] = {}
    timer = 0
    for root in g.vertices:
        if root in disc:
            continue
        stack: list[tuple[Vertex, EdgeId | None, iter]] = [(root, None, iter(g.incident(root)))]
        disc[root] = low[root] = timer
        timer += 1
        while stack:
            v, via, it = stack[-1]
            advanced = False
            for e in it:
                if e == via:
                    continue
                wv = g.other_end(e, v)
                if wv not in disc:
                    disc[wv] = low[wv] = timer
                    timer += 1
                    stack.append((wv, e, iter(g.incident(wv))))
                    advanced = True
                    break
                low[v] = min(low[v], disc[wv])
            if not advanced:
                stack.pop()
                if stack:
                    pv = stack[-1][0]
                    low[pv] = min(low[pv], low[v])
                    if low[v] > disc[pv] and len([x for x in g.incident(v) if g.other_end(x, v) == pv]) == 1:
                        return True
    return False


def max_flow(g: MultiGraph, s: Vertex, t: Vertex) -> tuple[int, tuple[Vertex, ...]]:
    """Integer max flow s->t over edge multiplicities; returns (value, source side)."""
    if s == t:
        raise GraphError("source equals sink")
    cap: dict[Vertex, dict[Vertex, int]] = _weight_matrix(g)
    flow = 0
    while True:
        parent: dict[Vertex, Vertex] = {s: s}
        q = deque([s])
        while q and t not in parent:
            v = q.popleft()
            for u in sorted(cap[v]):
                if u not in parent and cap[v][u] > 0:
                    parent[u] = v
                    q.append(u)
        if t not in parent:
            side = tuple(sorted(parent))
            return flow, side
        # trace back the bottleneck
        path = [t]
        while path[-1] != s:
            path.append(parent[path[-1]])
        path.reverse()
        aug = min(cap[path[i]][path[i + 1]] for i in range(len(path) - 1))
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            cap[a][b] -= aug
            cap[b][a] = cap[b].get(a, 0) + aug
        flow += aug


def pair_connectivity_floor(g: MultiGraph, u: Vertex) -> int | None:
    """Minimum local edge-connectivity over pairs of vertices other than u.

    This is the quantity a split-off at u must not let drop: it survives u
    losing edges, and once u is finally removed it equals the global
    edge-connectivity of what remains. None when fewer than two other
    vertices exist (the condition is vacuous). Local connectivity obeys
    lambda(v,w) >= min(lambda(v,x), lambda(x,w)), so fixing one endpoint
    suffices.
    """
    others = [v for v in g.vertices if v != u]
    if len(others) < 2:
        return None
    v0 = others[0]
    return min(max_flow(g, v0, w)[0] for w in others[1:])


def component_count_without(g: MultiGraph, u: Vertex) -> int:
    return len(g.remove_vertex(u).connected_components())


def is_parity_edge_connected(
    g: MultiGraph,
    m: int,
    m_prime: int,
    mode: str = CUT_PARITY,
    excluded_vertex: Vertex | None = None,
    guard: int = SUBSET_GUARD,
) -> ParityCheckResult:
    """Check the parity-refined connectivity condition by subset enumeration.

    mode=cut_parity: cuts of even value must reach 2m, odd value 2m'+1.
    mode=set_cardinality: sets of even cardinality must have boundary >= 2m,
    odd cardinality >= 2m' (no +1). With excluded_vertex u the sets range
    over nonempty proper subsets of V-{u}, matching the lifting theorems
    (the set V-{u} itself only measures what is left of u's own degree);
    otherwise over nonempty proper subsets of V.
    """
    if mode not in (CUT_PARITY, SET_CARDINALITY):
        raise GraphError(f"unknown mode {mode!r}")
    if not 0 <= m <= m_prime:
        raise PreconditionError(f"need m' >= m >= 0, got m={m}, m'={m_prime}")
    if excluded_vertex is not None:
        if excluded_vertex not in g.vertices:
            raise GraphError(f"unknown vertex {excluded_vertex}")
        universe = tuple(v for v in g.vertices if v != excluded_vertex)
    else:
        universe = g.vertices
    if len(universe) > guard:
        return ParityCheckResult("unverified")
    even_bound = 2 * m
    odd_bound = 2 * m_prime + 1 if mode == CUT_PARITY else 2 * m_prime
    # For cut parity with no exclusion d(A)=d(complement) lets us test one side.
    halve = mode == CUT_PARITY and excluded_vertex is None
    for A in _subset_domain(universe, halve):
        d = g.boundary(A)
        key = d if mode == CUT_PARITY else len(A)
        odd = key % 2 == 1
        bound = odd_bound if odd else even_bound
        if d < bound:
            if mode == CUT_PARITY:
                tag = ODD_CUT if odd else EVEN_CUT
            else:
                tag = ODD_CARDINALITY if odd else EVEN_CARDINALITY
            return ParityCheckResult("violated", CutCertificate(tuple(sorted(A)), d, tag))
    return ParityCheckResult("holds")


def _subset_domain(universe: tuple[Vertex, ...], halve: bool):
    """Nonempty proper subsets of universe; halved by pinning one element out."""
    n = len(universe)
    sources = (universe[1:],) if halve else (universe,)
    for src in sources:
        for r in range(1, n):
            for combo in combinations(src, r):
                yield combo


def essential_edge_connectivity(g: MultiGraph, guard: int = SUBSET_GUARD) -> tuple[int, tuple[Vertex, ...] | None]:
    """Smallest cut whose edges are not all incident to one vertex.

    Returns (value, witness). With no essential cut at all the value is
    capped at |E| and the witness is None.
    """
    if g.n < 3:
        raise GraphError("essential connectivity needs at least three vertices")
    if g.n > guard:
        raise SizeGuardExceeded(f"n={g.n} beyond guard {guard}")
    best_val: int | None = None
    best_wit: tuple[Vertex, ...] | None = None
    universe = g.vertices
    for A in _subset_domain(universe, halve=True):
        cut = g.boundary_edges(A)
        if not cut:
            continue
        common = set(g.endpoints(cut[0]))
        for e in cut[1:]:
            common &= set(g.endpoints(e))
            if not common:
                break
        if common:
            continue
        d = len(cut)
        wit = _canonical_side(frozenset(A), universe)
        if best_val is None or d < best_val or (d == best_val and wit < best_wit):
            best_val, best_wit = d, wit
    if best_val is None:
        return g.m, None
    return best_val, best_wit


def bipartite_index(g: MultiGraph) -> tuple[int, tuple[EdgeId, ...], dict[Vertex, int]]:
    """Fewest edge deletions making g bipartite, with the deleted set.

    Branch and bound over 2-colorings; the first coloring per component is
    pinned to break the flip symmetry. Returns (count, deleted edge ids,
    an optimal coloring).
    """
    best = {"count": g.m + 1, "coloring": None}
    comps = g.connected_components()
    pinned = {c[0] for c in comps}
    order = list(g.vertices)
    coloring: dict[Vertex, int] = {}

    def mono_increase(v: Vertex, color: int) -> int:
        # each edge is charged when its second endpoint gets colored
        inc = 0
        for e in g.incident(v):
            w = g.other_end(e, v)
            if w in coloring and coloring[w] == color:
                inc += 1
        return inc

    def walk(i: int, mono: int) -> None:
        if mono >= best["count"]:
            return
        if i == len(order):
            best["count"] = mono
            best["coloring"] = dict(coloring)
            return
        v = order[i]
        choices = (0,) if v in pinned else (0, 1)
        for color in choices:
            coloring[v] = color
            walk(i + 1, mono + mono_increase(v, color))
            del coloring[v]

    walk(0, 0)
    colors: dict[Vertex, int] = best["coloring"] or {}
    deleted = tuple(
        e for e, u, v in g.edges() if colors.get(u) == colors.get(v)
    )
    return best["count"], deleted, colors


def max_bipartite_factor(g: MultiGraph) -> tuple[MultiGraph, tuple[Vertex, ...], tuple[Vertex, ...]]:
    """Maximum-edge spanning bipartite subgraph, with its two sides."""
    _, deleted, colors = bipartite_index(g)
    factor = g.delete_edges(deleted)
    side_a = tuple(sorted(v for v in g.vertices if colors.get(v, 0) == 0))
    side_b = tuple(sorted(v for v in g.vertices if colors.get(v, 0) == 1))
    return factor, side_a, side_b


def bipartition(g: MultiGraph) -> tuple[tuple[Vertex, ...], tuple[Vertex, ...]] | None:
    """Two-color g if bipartite (side A holds the smallest vertex per component)."""
    colors: dict[Vertex, int] = {}
    for comp in g.connected_components():
        root = comp[0]
        colors[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for e in g.incident(v):
                w = g.other_end(e, v)
                if w not in colors:
                    colors[w] = 1 - colors[v]
                    queue.append(w)
                elif colors[w] == colors[v]:
                    return None
    a = tuple(sorted(v for v, c in colors.items() if c == 0))
    b = tuple(sorted(v for v, c in colors.items() if c == 1))
    return a, b
