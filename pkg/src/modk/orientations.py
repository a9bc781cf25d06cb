"""Modulo-k orientations with bounded out-degrees.

Three routes produce an orientation whose out-degrees hit prescribed
residues inside per-vertex windows. The mod-2 solver is fully
constructive. The backtracking search is exact and backs everything
else as an oracle. The hybrid solver shrinks an instance with lifts at
an anchor vertex, whole-vertex split-offs, and tight-set contractions,
then lets the search finish the remainder.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, replace
from typing import Callable, Iterable, Mapping

from .alpha import ResidueMap, alpha_of_set
from .connectivity import SUBSET_GUARD, is_lambda_at_least
from .errors import ContractViolation, GraphError, PinError, PreconditionError, SizeGuardExceeded
from .lifting import (
    LiftLedger,
    PreserveLambda,
    _candidate_pairs,
    find_admissible_lift,
    split_off_tree_connected,
)
from .multigraph import EdgeId, MultiGraph, Orientation, Vertex
from .tree_packing import _balanced_orientation, is_tree_connected

FOUND = "found"
INFEASIBLE = "infeasible"
EXHAUSTED = "budget exhausted"
CANCELLED = "cancelled"

REGIME_EDGE = "edge_3k3"
REGIME_TREE = "tree_2k2"
REGIME_ODD = "odd_edge"

# consequence shapes for verify_orientation
PM_HALF_K = "pm_half_k"
PM_K = "pm_k"

KIND_INTERVAL = "interval"
KIND_HALF_OFFSET = "half_offset"
KIND_ALPHA_BAND = "alpha_band"
KIND_TREE_BAND = "tree_band"

DEFAULT_BASE_VERTICES = 4
DEFAULT_BUDGET = 2_000_000


def _residue_window(lo: int, hi: int, r: int, k: int) -> tuple[int, int] | None:
    """Smallest and largest values in [lo, hi] congruent to r mod k."""
    if lo > hi:
        return None
    if k == 1:
        return lo, hi
    a = lo + (r - lo) % k
    b = hi - (hi - r) % k
    if a > b:
        return None
    return a, b


@dataclass(frozen=True)
class BoundSpec:
    """Per-vertex windows for out-degrees, in one of four shapes.

    interval carries explicit bounds (a mapping, or one int for every
    vertex). half_offset(c) allows floor(d/2) - c up to ceil(d/2) + c.
    alpha_band allows |d+ - d/2| <= k - 1 + |alpha(v)| and tree_band
    allows k/2 - 1 <= d+ <= d - k/2 + 1; both take k from the residue
    map they are resolved against. A pin narrows one vertex to a single
    plausible value, meaning a value in its window with the right
    residue.
    """

    kind: str
    offset: int | None = None
    lows: Mapping[Vertex, int] | int | None = None
    highs: Mapping[Vertex, int] | int | None = None
    pin: tuple[Vertex, int] | None = None

    @classmethod
    def interval(cls, lows, highs, pin: tuple[Vertex, int] | None = None) -> "BoundSpec":
        return cls(KIND_INTERVAL, None, lows, highs, pin)

    @classmethod
    def half_offset(cls, c: int, pin: tuple[Vertex, int] | None = None) -> "BoundSpec":
        if c < 0:
            raise GraphError("offset must be nonnegative")
        return cls(KIND_HALF_OFFSET, c, None, None, pin)

    @classmethod
    def alpha_band(cls, pin: tuple[Vertex, int] | None = None) -> "BoundSpec":
        return cls(KIND_ALPHA_BAND, None, None, None, pin)

    @classmethod
    def tree_band(cls, pin: tuple[Vertex, int] | None = None) -> "BoundSpec":
        return cls(KIND_TREE_BAND, None, None, None, pin)

    def pinned(self, v: Vertex, target: int) -> "BoundSpec":
        return replace(self, pin=(v, target))

    def _raw(self, g: MultiGraph, p: ResidueMap, v: Vertex) -> tuple[int, int]:
        d = g.degree(v)
        k = p.modulus
        if self.kind == KIND_INTERVAL:
            lo = self.lows[v] if isinstance(self.lows, Mapping) else int(self.lows)
            hi = self.highs[v] if isinstance(self.highs, Mapping) else int(self.highs)
        elif self.kind == KIND_HALF_OFFSET:
            lo = d // 2 - self.offset
            hi = (d + 1) // 2 + self.offset
        elif self.kind == KIND_ALPHA_BAND:
            ad = alpha_of_set(g, p, (v,)).abs_doubled
            lo = (d - 2 * (k - 1) - ad + 1) // 2
            hi = (d + 2 * (k - 1) + ad) // 2
        elif self.kind == KIND_TREE_BAND:
            lo = (k - 1) // 2
            hi = d - (k - 1) // 2
        else:
            raise GraphError(f"unknown bound kind {self.kind!r}")
        return max(lo, 0), min(hi, d)

    def windows(self, g: MultiGraph, p: ResidueMap) -> dict[Vertex, tuple[int, int]]:
        """Resolve to inclusive integer windows, each nonempty mod k."""
        out: dict[Vertex, tuple[int, int]] = {}
        for v in g.vertices:
            lo, hi = self._raw(g, p, v)
            if lo > hi or _residue_window(lo, hi, p.of(v), p.modulus) is None:
                raise PreconditionError(f"empty out-degree window at {v}")
            out[v] = (lo, hi)
        if self.pin is not None:
            z, t = self.pin
            if z not in out:
                raise GraphError(f"pin vertex {z} is not in the graph")
            lo, hi = out[z]
            if not lo <= t <= hi or (t - p.of(z)) % p.modulus:
                raise PinError(f"target {t} at {z} is not a plausible value in [{lo}, {hi}]")
            out[z] = (t, t)
        return out


@dataclass(frozen=True)
class SearchResult:
    outcome: str
    orientation: Orientation | None
    nodes: int

    def __bool__(self) -> bool:
        return self.outcome == FOUND


def orient_mod_k_search(
    g: MultiGraph,
    p: ResidueMap,
    bounds: BoundSpec,
    *,
    fixed: Mapping[EdgeId, Vertex] | None = None,
    budget: int | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> SearchResult:
    """Exact decision for a p-orientation inside the windows.

    Backtracks over edges, always branching on the one whose endpoints
    have the least slack left. Three prunes: each endpoint must still
    reach its window, each vertex must still reach its residue, and the
    residue-achievable windows must be able to sum to |E|. `fixed`
    pre-assigns arcs (EdgeId to tail) the search has to honor.
    Infeasible means the space was exhausted; running out of budget or
    being cancelled are reported as their own outcomes so a cut-off is
    never mistaken for a proof.
    """
    if not p.is_orientation_target(g):
        raise PreconditionError("residues do not sum to |E| mod k")
    k = p.modulus
    win = bounds.windows(g, p)
    out = {v: 0 for v in g.vertices}
    rem = {v: g.degree(v) for v in g.vertices}
    tails: dict[EdgeId, Vertex] = {}
    for eid, tail in sorted((fixed or {}).items()):
        ends = g.endpoints(eid)
        if tail not in ends:
            raise GraphError(f"fixed tail {tail} is not an endpoint of edge {eid}")
        tails[eid] = tail
        out[tail] += 1
        rem[ends[0]] -= 1
        rem[ends[1]] -= 1
    unassigned = set(g.edge_ids()) - set(tails)

    def reach(v: Vertex) -> tuple[int, int] | None:
        lo, hi = win[v]
        return _residue_window(max(lo, out[v]), min(hi, out[v] + rem[v]), p.of(v), k)

    def pruned() -> bool:
        lo_sum = 0
        hi_sum = 0
        for v in g.vertices:
            r = reach(v)
            if r is None:
                return True
            lo_sum += r[0]
            hi_sum += r[1]
        return not lo_sum <= g.m <= hi_sum

    def slack(v: Vertex) -> int:
        lo, hi = win[v]
        return min(hi - out[v], out[v] + rem[v] - lo)

    nodes = 0
    aborted: str | None = None

    def descend() -> bool:
        nonlocal nodes, aborted
        if should_stop is not None and should_stop():
            aborted = CANCELLED
            return False
        if budget is not None and nodes >= budget:
            aborted = EXHAUSTED
            return False
        if pruned():
            return False
        if not unassigned:
            return True
        eid = min(unassigned, key=lambda e: (min(slack(w) for w in g.endpoints(e)), e))
        u, w = g.endpoints(eid)
        unassigned.discard(eid)
        rem[u] -= 1
        rem[w] -= 1
        for tail in (u, w):
            nodes += 1
            tails[eid] = tail
            out[tail] += 1
            if descend():
                return True
            out[tail] -= 1
            del tails[eid]
            if aborted:
                break
        rem[u] += 1
        rem[w] += 1
        unassigned.add(eid)
        return False

    if descend():
        orient = Orientation(g)
        for eid, tail in tails.items():
            orient.orient_out_of(eid, tail)
        for v in g.vertices:
            dplus = orient.out_degree(v)
            lo, hi = win[v]
            if (dplus - p.of(v)) % k or not lo <= dplus <= hi:
                raise ContractViolation(f"search produced a bad out-degree at {v}")
        return SearchResult(FOUND, orient, nodes)
    if aborted:
        return SearchResult(aborted, None, nodes)
    return SearchResult(INFEASIBLE, None, nodes)


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    violations: tuple[str, ...]

    def __bool__(self) -> bool:
        return self.ok


def verify_orientation(
    g: MultiGraph,
    orientation: Orientation,
    p: ResidueMap,
    bounds: BoundSpec,
    consequence: str | None = None,
) -> VerifyReport:
    """Recheck residues and windows, plus an optional consequence shape.

    pm_half_k insists every doubled out-degree is d or d +- k; pm_k
    insists it is d +- 2k exactly.
    """
    if consequence not in (None, PM_HALF_K, PM_K):
        raise GraphError(f"unknown consequence {consequence!r}")
    if not orientation.is_total() or set(orientation.assigned_ids()) != set(g.edge_ids()):
        return VerifyReport(False, ("not a total orientation of this graph",))
    k = p.modulus
    win = bounds.windows(g, p)
    issues = []
    for v in g.vertices:
        dplus = orientation.out_degree(v)
        d = g.degree(v)
        if (dplus - p.of(v)) % k:
            issues.append(f"residue at {v}: {dplus} is not {p.of(v)} mod {k}")
        lo, hi = win[v]
        if not lo <= dplus <= hi:
            issues.append(f"window at {v}: {dplus} outside [{lo}, {hi}]")
        if consequence == PM_HALF_K and 2 * dplus - d not in (0, k, -k):
            issues.append(f"shape at {v}: 2*{dplus} - {d} not in 0, +-{k}")
        if consequence == PM_K and 2 * dplus - d not in (2 * k, -2 * k):
            issues.append(f"shape at {v}: 2*{dplus} - {d} not +-{2 * k}")
    return VerifyReport(not issues, tuple(issues))


# -- the constructive mod-2 route ---------------------------------------


def _parity_orientation(g: MultiGraph, p: ResidueMap) -> Orientation:
    """Orientation of a connected graph with d+(v) = p(v) mod 2.

    Non-tree edges point from their first endpoint; tree edges are then
    fixed leaves first, which forces every vertex except the root, and
    the total-parity hypothesis forces the root.
    """
    if p.modulus != 2:
        raise GraphError("parity orientation works mod 2")
    if not g.is_connected():
        raise PreconditionError("graph is not connected")
    if not p.is_orientation_target(g):
        raise PreconditionError("residues do not sum to |E| mod 2")
    tree = set(g.spanning_forest())
    tails: dict[EdgeId, Vertex] = {}
    for eid in g.edge_ids():
        if eid not in tree:
            tails[eid] = g.endpoints(eid)[0]
    root = g.vertices[0]
    parent: dict[Vertex, EdgeId] = {}
    order = [root]
    seen = {root}
    for v in order:
        for eid in g.incident(v):
            if eid in tree:
                w = g.other_end(eid, v)
                if w not in seen:
                    seen.add(w)
                    parent[w] = eid
                    order.append(w)
    outs = {v: 0 for v in g.vertices}
    for tail in tails.values():
        outs[tail] += 1
    for v in reversed(order[1:]):
        eid = parent[v]
        tail = v if (outs[v] - p.of(v)) % 2 else g.other_end(eid, v)
        tails[eid] = tail
        outs[tail] += 1
    if (outs[root] - p.of(root)) % 2:
        raise ContractViolation("root parity failed after the tree pass")
    orient = Orientation(g)
    for eid, tail in tails.items():
        orient.orient_out_of(eid, tail)
    return orient


def _mod2_window(d: int) -> tuple[int, int]:
    return max(0, d // 2 - 1), min(d, (d + 1) // 2 + 1)


def _pinned_base_orientation(g: MultiGraph, p: ResidueMap, z0: Vertex, target: int) -> Orientation:
    """Base case with max degree 3: hit an exact out-degree at z0.

    One or two edges at z0 (degree even or odd) whose removal keeps the
    graph connected all point the way the target leans; parity then
    forces the last edge at z0, so the target is reached exactly.
    """
    d = g.degree(z0)
    lo, hi = _mod2_window(d)
    if not lo <= target <= hi or (target - p.of(z0)) % 2:
        raise ContractViolation("pin drifted out of its window during lifting")
    if d == 0:
        return _parity_orientation(g, p)
    away = target >= (d + 1) // 2
    need = 1 if d % 2 == 0 else 2
    chosen = None
    for combo in itertools.combinations(sorted(g.incident(z0)), need):
        if g.delete_edges(combo).is_connected():
            chosen = combo
            break
    if chosen is None:
        raise ContractViolation("no connected spanning remainder at the pin")
    tails = {}
    p_rest = p
    for eid in chosen:
        tails[eid] = z0 if away else g.other_end(eid, z0)
        p_rest = p_rest.decremented((tails[eid],))
    inner = _parity_orientation(g.delete_edges(chosen), p_rest)
    orient = Orientation(g)
    for eid in g.edge_ids():
        orient.orient_out_of(eid, tails[eid] if eid in tails else inner.tail(eid))
    if orient.out_degree(z0) != target:
        raise ContractViolation(f"pin landed on {orient.out_degree(z0)}, wanted {target}")
    return orient


def orient_mod2_bounded(
    g: MultiGraph,
    p: ResidueMap,
    z0: Vertex | None = None,
    z0_target: int | None = None,
) -> Orientation:
    """Orientation with d+ = p mod 2 and floor(d/2) - 1 <= d+ <= ceil(d/2) + 1.

    Needs a 2-edge-connected graph and residues summing to |E| mod 2.
    When a target is given the pinned vertex lands exactly on it;
    plausible targets are the values in the window with p's parity.
    Vertices of degree 4 and up are lifted away first (each lift keeps
    2-edge-connectivity and trades one unit of residue at its pivot),
    and the degree <= 3 remainder is solved by the spanning-tree parity
    pass, routed around the pin when there is one.
    """
    if p.modulus != 2:
        raise PreconditionError("this solver works mod 2")
    if not p.is_orientation_target(g):
        raise PreconditionError("residues do not sum to |E| mod 2")
    if z0_target is not None and z0 is None:
        raise GraphError("a pin needs its vertex")
    if z0 is not None and z0 not in g.vertices:
        raise GraphError(f"unknown vertex {z0}")
    if g.n >= 2 and not is_lambda_at_least(g, 2):
        raise PreconditionError("graph is not 2-edge-connected")
    if z0_target is not None:
        lo, hi = _mod2_window(g.degree(z0))
        if not lo <= z0_target <= hi or (z0_target - p.of(z0)) % 2:
            raise PinError(f"target {z0_target} at {z0} is not plausible in [{lo}, {hi}]")

    ledger = LiftLedger(g)
    p_cur = p
    t_cur = z0_target
    while True:
        cur = ledger.derived
        u = next((v for v in cur.vertices if cur.degree(v) >= 4), None)
        if u is None:
            break
        e1, e2 = find_admissible_lift(cur, u, PreserveLambda(2))
        ledger.lift(e1, e2, pivot=u)
        step = ledger.steps[-1]
        hit = [u] + ([step.left_end] if step.created is None else [])
        p_cur = p_cur.decremented(hit)
        if t_cur is not None and z0 in hit:
            t_cur -= 1
        if not is_lambda_at_least(ledger.derived, 2):
            raise ContractViolation("lift broke 2-edge-connectivity")

    base = ledger.derived
    if t_cur is None:
        oriented = _parity_orientation(base, p_cur)
    else:
        oriented = _pinned_base_orientation(base, p_cur, z0, t_cur)
    result = ledger.induce_orientation(oriented)

    spec = BoundSpec.half_offset(1)
    if z0_target is not None:
        spec = spec.pinned(z0, z0_target)
    report = verify_orientation(g, result, p, spec)
    if not report:
        raise ContractViolation("mod-2 result failed: " + "; ".join(report.violations))
    return result


# -- hypothesis checks for the hybrid solver ------------------------------


def _floor_gap(g: MultiGraph, p: ResidueMap, A: Iterable[Vertex]) -> int:
    """d(A) minus the alpha floor 2k - 2 + 2|alpha(A)|."""
    s = set(A)
    return g.boundary(s) - (2 * p.modulus - 2 + alpha_of_set(g, p, s).abs_doubled)


def _refined_floor_ok(
    g: MultiGraph, p: ResidueMap, *, skip_zero_alpha: bool, guard: int
) -> bool | None:
    """The per-set degree floor over proper nonempty sets; None past the guard."""
    if g.n > guard:
        return None
    vs = g.vertices
    for mask in range(1, (1 << g.n) - 1):
        A = [vs[i] for i in range(g.n) if mask >> i & 1]
        if skip_zero_alpha and alpha_of_set(g, p, A).abs_doubled == 0:
            continue
        if _floor_gap(g, p, A) < 0:
            return False
    return True


def _extension_floor_ok(g: MultiGraph, p: ResidueMap, z0: Vertex, guard: int) -> bool | None:
    """Floor over proper nonempty subsets of V minus z0, exempting one
    zero-alpha vertex of smallest degree."""
    others = [v for v in g.vertices if v != z0]
    if len(others) > guard:
        return None
    zeroes = [v for v in others if alpha_of_set(g, p, (v,)).abs_doubled == 0]
    v0 = min(zeroes, key=lambda v: (g.degree(v), v)) if zeroes else None
    for mask in range(1, (1 << len(others)) - 1):
        A = [others[i] for i in range(len(others)) if mask >> i & 1]
        if A == [v0]:
            continue
        if _floor_gap(g, p, A) < 0:
            return False
    return True


def _extension_ok(
    g: MultiGraph, p: ResidueMap, z0: Vertex, pre: Mapping[EdgeId, Vertex], guard: int
) -> bool | None:
    k = p.modulus
    if g.degree(z0) > 2 * k - 2 + alpha_of_set(g, p, (z0,)).abs_doubled:
        return False
    if set(pre) != set(g.incident(z0)):
        return False
    dplus = sum(1 for t in pre.values() if t == z0)
    if (dplus - p.of(z0)) % k:
        return False
    return _extension_floor_ok(g, p, z0, guard)


def _violating_set(
    g: MultiGraph,
    p: ResidueMap,
    *,
    slack: int,
    exclude: Vertex | None,
    avoid: Vertex | None,
    guard: int,
) -> tuple[Vertex, ...] | None:
    """Smallest contractible set whose boundary undercuts the floor plus slack.

    slack 0 finds strict violations, slack 2 also finds exactly tight
    sets. Only sets of size 2 up to n - 2 avoiding `exclude` qualify;
    among the smallest, sets without `avoid` come first.
    """
    if g.n > guard:
        return None
    vs = [v for v in g.vertices if v != exclude]
    limit = g.n - 2
    best: tuple | None = None
    for mask in range(1, (1 << len(vs)) - 1):
        A = tuple(vs[i] for i in range(len(vs)) if mask >> i & 1)
        if not 2 <= len(A) <= limit:
            continue
        if _floor_gap(g, p, A) < slack:
            key = (avoid in A, len(A), A)
            if best is None or key < best[0]:
                best = (key, A)
    return best[1] if best else None


def _contract_pair(g: MultiGraph, p: ResidueMap, A: Iterable[Vertex]):
    """Both contractions of a set, with residues matched to each piece."""
    k = p.modulus
    sA = sorted(set(A))
    comp = [v for v in g.vertices if v not in set(sA)]
    g1, _ = g.contract(sA)
    a_star = min(sA)
    p1 = p.restricted(g1.vertices).replaced(
        a_star, (sum(p.of(v) for v in sA) - g.internal(sA)) % k
    )
    g2, _ = g.contract(comp)
    a_comp = min(comp)
    p2 = p.restricted(g2.vertices).replaced(
        a_comp, (sum(p.of(v) for v in comp) - g.internal(comp)) % k
    )
    for piece, residues in ((g1, p1), (g2, p2)):
        if not residues.is_orientation_target(piece):
            raise ContractViolation("contraction residues do not match the piece")
    return (g1, p1, a_star), (g2, p2, a_comp)


def _stitched(
    g: MultiGraph,
    A: Iterable[Vertex],
    a_star: Vertex,
    d1: Orientation,
    d2: Orientation,
) -> Orientation:
    sA = set(A)
    orient = Orientation(g)
    for eid in g.edge_ids():
        u, w = g.endpoints(eid)
        if u in sA and w in sA:
            orient.orient_out_of(eid, d2.tail(eid))
        elif u not in sA and w not in sA:
            orient.orient_out_of(eid, d1.tail(eid))
        else:
            inner, outer = (u, w) if u in sA else (w, u)
            tail = inner if d1.tail(eid) == a_star else outer
            if (d2.tail(eid) == inner) != (tail == inner):
                raise ContractViolation("cut arcs disagree between the pieces")
            orient.orient_out_of(eid, tail)
    return orient


def _must_find(
    g: MultiGraph,
    p: ResidueMap,
    bounds: BoundSpec,
    budget: int | None,
    *,
    fixed: Mapping[EdgeId, Vertex] | None = None,
    pin_promised: bool = True,
) -> Orientation:
    try:
        res = orient_mod_k_search(g, p, bounds, fixed=fixed, budget=budget)
    except PinError:
        if pin_promised:
            raise ContractViolation("pin drifted out of its window during reduction")
        raise
    if res:
        return res.orientation
    if res.outcome != INFEASIBLE:
        raise SizeGuardExceeded(f"search gave up ({res.outcome}) after {res.nodes} nodes")
    if bounds.pin is not None and not pin_promised:
        raise PinError("no orientation hits the pin")
    raise ContractViolation("search exhausted an instance the hypotheses call feasible")


# -- the hybrid reduction solver ------------------------------------------


def _edge_reduce(
    g: MultiGraph,
    p: ResidueMap,
    z0: Vertex,
    pin_t: int | None,
    pre: dict[EdgeId, Vertex] | None,
    *,
    skip_zero: bool,
    base: int,
    guard: int,
    budget: int | None,
) -> Orientation:
    """Edge-regime recursion: contract tight sets, lift the anchor down
    to its alpha floor, fix the anchor's edges, search what is left."""
    k = p.modulus
    if g.n <= base or g.n > guard:
        if g.n > guard:
            warnings.warn(
                f"{g.n} vertices exceed the subset guard {guard}; "
                "falling back to pure search",
                RuntimeWarning,
                stacklevel=2,
            )
        pin = (z0, pin_t) if pin_t is not None else None
        return _must_find(g, p, BoundSpec.alpha_band(pin), budget, fixed=pre)

    A = _violating_set(g, p, slack=2, exclude=z0, avoid=None, guard=guard)
    if A is not None:
        (g1, p1, a_star), (g2, p2, a_comp) = _contract_pair(g, p, A)
        pre1 = None
        if pre is not None:
            # other ends inside A were contracted onto a_star
            pre1 = {
                eid: (z0 if tail == z0 else g1.other_end(eid, z0)) for eid, tail in pre.items()
            }
        d1 = _edge_reduce(
            g1, p1, z0, pin_t, pre1, skip_zero=skip_zero, base=base, guard=guard, budget=budget
        )
        pre2 = {}
        for eid in g.boundary_edges(A):
            u, w = g.endpoints(eid)
            inner = u if u in set(A) else w
            pre2[eid] = inner if d1.tail(eid) == a_star else a_comp
        if _extension_ok(g2, p2, a_comp, pre2, guard) is False:
            # the minimality argument did not carry over; the cut is
            # still sound, so let the exact search settle the piece
            d2 = _must_find(g2, p2, BoundSpec.alpha_band(), budget, fixed=pre2)
        else:
            d2 = _edge_reduce(
                g2, p2, a_comp, None, pre2,
                skip_zero=skip_zero, base=base, guard=guard, budget=budget,
            )
        return _stitched(g, A, a_star, d1, d2)

    if pre is not None:
        # no reduction left; the anchor is fixed, so search finishes it
        return _must_find(g, p, BoundSpec.alpha_band(), budget, fixed=pre)

    a0 = alpha_of_set(g, p, (z0,)).abs_doubled
    if g.degree(z0) >= 2 * k + a0:
        nonparallel, parallel = _candidate_pairs(g, z0, None)
        candidates = nonparallel if len(g.neighbors(z0)) > 1 else parallel
        for e1, e2 in candidates:
            ledger = LiftLedger(g)
            ledger.lift(e1, e2, pivot=z0)
            step = ledger.steps[-1]
            hit = [z0] + ([step.left_end] if step.created is None else [])
            h = ledger.derived
            p_h = p.decremented(hit)
            if not p_h.is_orientation_target(h):
                raise ContractViolation("lift bookkeeping lost the residue total")
            if _refined_floor_ok(h, p_h, skip_zero_alpha=skip_zero, guard=guard) is False:
                continue
            pin_h = pin_t - 1 if pin_t is not None else None
            inner = _edge_reduce(
                h, p_h, z0, pin_h, None, skip_zero=skip_zero, base=base, guard=guard, budget=budget
            )
            return ledger.induce_orientation(inner)
        raise ContractViolation("no lift at the anchor keeps the degree floor")

    # anchor reached its floor: fix its edges and extend
    d = g.degree(z0)
    lo = max(0, (d - 2 * (k - 1) - a0 + 1) // 2)
    hi = min(d, (d + 2 * (k - 1) + a0) // 2)
    if pin_t is not None:
        if not lo <= pin_t <= hi or (pin_t - p.of(z0)) % k:
            raise ContractViolation("pin drifted out of the anchor window")
        t = pin_t
    else:
        choices = range(lo + (p.of(z0) - lo) % k, hi + 1, k)
        t = min(choices, key=lambda c: (abs(2 * c - d), c))
    ids = sorted(g.incident(z0))
    pre_new = {eid: (z0 if i < t else g.other_end(eid, z0)) for i, eid in enumerate(ids)}
    return _edge_reduce(
        g, p, z0, None, pre_new, skip_zero=skip_zero, base=base, guard=guard, budget=budget
    )


def _tree_split_step(
    g: MultiGraph,
    p: ResidueMap,
    pin: tuple[Vertex, int] | None,
    u: Vertex,
    *,
    base: int,
    guard: int,
    budget: int | None,
) -> Orientation:
    """Split off one low-degree vertex and orient its leftover edges.

    The lifted pairs keep 2k - 2 spanning trees on the rest; of the
    leftover edges at u, t1 leave it so that t1 plus the number of
    lifted pairs matches p(u) mod k, chosen as balanced as the residue
    allows.
    """
    k = p.modulus
    h, ledger = split_off_tree_connected(g, u, 2 * k - 2)
    mid = ledger.derived
    q_ids = sorted(mid.incident(u))
    t = len(ledger.steps)
    floor = (k - 1) // 2
    r0 = (p.of(u) - t) % k
    t1 = None
    for cand in range(r0, len(q_ids) + 1, k):
        if t1 is None or min(cand + t, len(q_ids) - cand + t) > min(t1 + t, len(q_ids) - t1 + t):
            t1 = cand
    if t1 is None or min(t1 + t, len(q_ids) - t1 + t) < floor:
        raise ContractViolation("leftover edges cannot meet the residue and the floor")

    q_tails = {eid: (u if i < t1 else mid.other_end(eid, u)) for i, eid in enumerate(q_ids)}
    p_next = p.restricted(h.vertices)
    pin_next = pin
    for eid in q_ids:
        w = mid.other_end(eid, u)
        if q_tails[eid] == w:
            p_next = p_next.decremented((w,))
            if pin_next is not None and pin_next[0] == w:
                pin_next = (w, pin_next[1] - 1)
    if not p_next.is_orientation_target(h):
        raise ContractViolation("split bookkeeping lost the residue total")

    inner = _tree_solve(h, p_next, pin_next, base=base, guard=guard, budget=budget)
    derived = Orientation(mid)
    for eid in h.edge_ids():
        derived.orient_out_of(eid, inner.tail(eid))
    for eid, tail in q_tails.items():
        derived.orient_out_of(eid, tail)
    return ledger.induce_orientation(derived)


def _tree_solve(
    g: MultiGraph,
    p: ResidueMap,
    pin: tuple[Vertex, int] | None,
    *,
    base: int,
    guard: int,
    budget: int | None,
) -> Orientation:
    """Tree-regime recursion: split off low-degree vertices, contract
    violating sets, and hand dense remainders to the edge machinery."""
    k = p.modulus
    if g.n <= base:
        return _must_find(g, p, BoundSpec.tree_band(pin), budget, pin_promised=False)
    pin_v = pin[0] if pin is not None else None
    low = next((v for v in g.vertices if v != pin_v and g.degree(v) <= 3 * k - 3), None)
    if low is not None:
        return _tree_split_step(g, p, pin, low, base=base, guard=guard, budget=budget)

    A = _violating_set(g, p, slack=0, exclude=None, avoid=pin_v, guard=guard)
    if A is not None:
        if not is_tree_connected(g.contract(A)[0], 2 * k - 2):
            raise ContractViolation("contraction lost the spanning trees")
        (g1, p1, a_star), (g2, p2, a_comp) = _contract_pair(g, p, A)
        pin1 = pin if pin_v is not None and pin_v not in A else None
        d1 = _tree_solve(g1, p1, pin1, base=base, guard=guard, budget=budget)
        pre2 = {}
        for eid in g.boundary_edges(A):
            u, w = g.endpoints(eid)
            inner = u if u in set(A) else w
            pre2[eid] = inner if d1.tail(eid) == a_star else a_comp
        if pin_v is not None and pin_v in set(A):
            # the pinned vertex sits in the piece whose cut is already
            # fixed; the tree theorem makes no promise for exact values
            d2 = _must_find(
                g2, p2, BoundSpec.tree_band(pin), budget, fixed=pre2, pin_promised=False
            )
        else:
            d2 = _edge_reduce(
                g2, p2, a_comp, None, pre2, skip_zero=False, base=base, guard=guard, budget=budget
            )
        return _stitched(g, A, a_star, d1, d2)

    # every unpinned degree exceeds 3k - 3 and no set violates the
    # floor, so the refined edge hypothesis holds away from the pin
    z0 = pin_v if pin_v is not None else max(g.vertices, key=lambda v: (g.degree(v), -v))
    pin_t = pin[1] if pin is not None else None
    if pin is not None:
        d = g.degree(pin_v)
        a0 = alpha_of_set(g, p, (pin_v,)).abs_doubled
        lo = max(0, (d - 2 * (k - 1) - a0 + 1) // 2)
        hi = min(d, (d + 2 * (k - 1) + a0) // 2)
        if d <= 3 * k - 3 or not lo <= pin_t <= hi:
            # the pin falls outside what the edge machinery covers and
            # the tree theorem makes no promise for it: search, honestly
            return _must_find(g, p, BoundSpec.tree_band(pin), budget, pin_promised=False)
    return _edge_reduce(
        g, p, z0, pin_t, None, skip_zero=False, base=base, guard=guard, budget=budget
    )


def _check_regime(g: MultiGraph, p: ResidueMap, regime: str, guard: int) -> None:
    k = p.modulus
    if regime == REGIME_TREE:
        if not is_tree_connected(g, 2 * k - 2):
            raise PreconditionError(f"graph is not {2 * k - 2}-tree-connected")
        return
    if regime == REGIME_EDGE and is_lambda_at_least(g, 3 * k - 3):
        return
    ok = _refined_floor_ok(g, p, skip_zero_alpha=regime == REGIME_ODD, guard=guard)
    if ok is False:
        raise PreconditionError("the per-set degree floor fails")
    if ok is None:
        warnings.warn(
            f"{g.n} vertices exceed the subset guard {guard}; precondition unverified",
            RuntimeWarning,
            stacklevel=3,
        )


def orient_mod_k_bounded(
    g: MultiGraph,
    p: ResidueMap,
    regime: str,
    pin: tuple[Vertex, int] | None = None,
    *,
    base_vertices: int = DEFAULT_BASE_VERTICES,
    guard: int = SUBSET_GUARD,
    budget: int | None = DEFAULT_BUDGET,
) -> Orientation:
    """Constructive solver for the bounded-orientation regimes.

    edge_3k3 wants (3k-3)-edge-connectivity or the per-set floor
    d(A) >= 2k - 2 + 2|alpha(A)|; odd_edge relaxes that floor to sets
    of nonzero alpha; tree_2k2 wants 2k - 2 edge-disjoint spanning
    trees. The output matches the regime's band (alpha_band for the
    edge regimes, tree_band for trees) and is re-verified before it is
    returned. A pin fixes the exact out-degree of one vertex; the edge
    regimes honor any plausible pin, the tree regime only as far as the
    search can realize it. k = 1 needs no residues and k = 2 routes to
    the mod-2 solver.
    """
    if regime not in (REGIME_EDGE, REGIME_TREE, REGIME_ODD):
        raise GraphError(f"unknown regime {regime!r}")
    k = p.modulus
    if not p.is_orientation_target(g):
        raise PreconditionError("residues do not sum to |E| mod k")
    if pin is not None and pin[0] not in g.vertices:
        raise GraphError(f"unknown vertex {pin[0]}")

    bounds = BoundSpec.tree_band(pin) if regime == REGIME_TREE else BoundSpec.alpha_band(pin)
    if k == 1:
        if pin is None:
            result = _balanced_orientation(g)
        else:
            result = _must_find(g, p, bounds, budget, pin_promised=False)
    elif k == 2:
        result = orient_mod2_bounded(
            g, p, pin[0] if pin else None, pin[1] if pin else None
        )
        # the rounding band of the mod-2 solver sits inside both regime bands
        report = verify_orientation(g, result, p, bounds)
        if not report:
            raise ContractViolation("mod-2 route left the band: " + "; ".join(report.violations))
        return result
    else:
        bounds.windows(g, p)  # rejects implausible pins before any reduction
        _check_regime(g, p, regime, guard)
        if regime == REGIME_TREE:
            result = _tree_solve(g, p, pin, base=base_vertices, guard=guard, budget=budget)
        else:
            skip_zero = regime == REGIME_ODD
            if pin is not None:
                z0, pin_t = pin
                if skip_zero and alpha_of_set(g, p, (z0,)).abs_doubled == 0:
                    # a zero-alpha pin is plausible only at d/2, which the
                    # band forces anyway; anchor somewhere useful instead
                    z0, pin_t = _odd_anchor(g, p), None
            else:
                z0 = (
                    _odd_anchor(g, p)
                    if skip_zero
                    else max(g.vertices, key=lambda v: (g.degree(v), -v))
                )
                pin_t = None
            if z0 is None:
                result = _balanced_orientation(g)
            else:
                result = _edge_reduce(
                    g, p, z0, pin_t, None,
                    skip_zero=skip_zero, base=base_vertices, guard=guard, budget=budget,
                )

    report = verify_orientation(g, result, p, bounds)
    if not report:
        raise ContractViolation("result failed verification: " + "; ".join(report.violations))
    return result


def _odd_anchor(g: MultiGraph, p: ResidueMap) -> Vertex | None:
    """Highest-degree vertex of nonzero alpha; None when alpha vanishes
    everywhere (then all degrees are even and balancing suffices)."""
    with_alpha = [v for v in g.vertices if alpha_of_set(g, p, (v,)).abs_doubled]
    if not with_alpha:
        return None
    return max(with_alpha, key=lambda v: (g.degree(v), -v))


# -- search-only probes for the open questions ----------------------------


@dataclass(frozen=True)
class QuestionProbe:
    """One scan of the even-degree question: does an orientation with
    every out-degree at d/2 - k or d/2 + k exist under the hypothesis?"""

    hypothesis_met: bool
    result: SearchResult

    @property
    def counterexample(self) -> bool:
        return self.hypothesis_met and self.result.outcome == INFEASIBLE


def probe_balanced_escape(
    g: MultiGraph,
    k: int,
    *,
    odd_sets_only: bool = False,
    guard: int = SUBSET_GUARD,
    budget: int | None = None,
    should_stop: Callable[[], bool] | None = None,
) -> QuestionProbe:
    """Search for an orientation with d+(v) in {d/2 - k, d/2 + k}.

    The hypothesis asks for even order, even degrees, and boundary at
    least 4k - 2: globally when odd_sets_only is false, else only on
    odd-size vertex sets. A met hypothesis plus an infeasible search is
    a reportable counterexample.
    """
    if k < 1:
        raise GraphError("k must be positive")
    shape_ok = g.n % 2 == 0 and all(d % 2 == 0 for d in g.degrees().values())
    if not odd_sets_only:
        hypothesis = shape_ok and is_lambda_at_least(g, 4 * k - 2)
    else:
        if g.n > guard:
            raise SizeGuardExceeded(f"{g.n} vertices exceed the subset guard {guard}")
        vs = g.vertices
        hypothesis = shape_ok and all(
            g.boundary([vs[i] for i in range(g.n) if mask >> i & 1]) >= 4 * k - 2
            for mask in range(1, (1 << g.n) - 1)
            if bin(mask).count("1") % 2
        )
    p = ResidueMap(2 * k, {v: (g.degree(v) // 2 - k) % (2 * k) for v in g.vertices})
    lows = {v: max(0, g.degree(v) // 2 - k) for v in g.vertices}
    highs = {v: min(g.degree(v), g.degree(v) // 2 + k) for v in g.vertices}
    bounds = BoundSpec.interval(lows, highs)
    if not p.is_orientation_target(g):
        return QuestionProbe(hypothesis, SearchResult(INFEASIBLE, None, 0))
    res = orient_mod_k_search(g, p, bounds, budget=budget, should_stop=should_stop)
    return QuestionProbe(hypothesis, res)
