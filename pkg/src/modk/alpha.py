"""Residue targets and the half-integer imbalance function on vertex sets.

For a target map p into Z_k and a vertex set A, the imbalance is the
half-integer alpha in {0, +-1/2, ..., +-k/2} congruent mod k to
p(A) - d(A)/2, where p(A) = sum of p over A minus the edges inside A.
All arithmetic works on doubled values (2*alpha), which are exact
integers; nothing here touches floats.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .errors import GraphError
from .multigraph import MultiGraph, Vertex


@dataclass(frozen=True)
class ResidueMap:
    """A vertex -> Z_k target map."""

    modulus: int
    values: Mapping[Vertex, int]

    def __post_init__(self):
        if self.modulus < 1:
            raise GraphError(f"modulus must be >= 1, got {self.modulus}")
        object.__setattr__(
            self, "values", {v: x % self.modulus for v, x in self.values.items()}
        )

    @classmethod
    def uniform(cls, g: MultiGraph, k: int, value: int) -> "ResidueMap":
        return cls(k, {v: value for v in g.vertices})

    def of(self, v: Vertex) -> int:
        return self.values[v]

    def total(self, vs: Iterable[Vertex]) -> int:
        return sum(self.values[v] for v in vs) % self.modulus

    def is_orientation_target(self, g: MultiGraph) -> bool:
        """Sum of residues must match |E| mod k for any out-degree target."""
        return self.total(g.vertices) == g.m % self.modulus

    def decremented(self, vs: Iterable[Vertex]) -> "ResidueMap":
        """Subtract one at each listed vertex (with multiplicity)."""
        vals = dict(self.values)
        for v in vs:
            vals[v] = (vals[v] - 1) % self.modulus
        return ResidueMap(self.modulus, vals)

    def replaced(self, v: Vertex, value: int) -> "ResidueMap":
        vals = dict(self.values)
        vals[v] = value % self.modulus
        return ResidueMap(self.modulus, vals)

    def restricted(self, vs: Iterable[Vertex]) -> "ResidueMap":
        keep = set(vs)
        return ResidueMap(self.modulus, {v: x for v, x in self.values.items() if v in keep})


@dataclass(frozen=True)
class AlphaValue:
    """2*alpha, normalized into [-k, k]; two-valued exactly at +-k/2."""

    modulus: int
    doubled: tuple[int, ...]

    @property
    def abs_doubled(self) -> int:
        return abs(self.doubled[0])

    @property
    def is_two_valued(self) -> bool:
        return len(self.doubled) == 2


def _normalize_doubled(residue: int, k: int) -> tuple[int, ...]:
    r = residue % (2 * k)
    if r == k:
        return (-k, k)
    if r > k:
        return (r - 2 * k,)
    return (r,)


def alpha_residue(g: MultiGraph, p: ResidueMap, A: Iterable[Vertex]) -> int:
    """2*(p(A) - d(A)/2) as a residue mod 2k."""
    s = set(A)
    k = p.modulus
    p_of_A = sum(p.of(v) for v in s) - g.internal(s)
    return (2 * p_of_A - g.boundary(s)) % (2 * k)


def alpha_of_set(g: MultiGraph, p: ResidueMap, A: Iterable[Vertex]) -> AlphaValue:
    s = set(A)
    if not s <= set(g.vertices):
        raise GraphError("alpha wants a subset of the vertices")
    k = p.modulus
    return AlphaValue(k, _normalize_doubled(alpha_residue(g, p, s), k))


# -- exhaustive property verification ----------------------------------


@dataclass(frozen=True)
class AlphaFailure:
    property_id: int
    subsets: tuple[tuple[Vertex, ...], ...]
    detail: str


@dataclass
class AlphaReport:
    holds: bool
    failures: tuple[AlphaFailure, ...] = ()
    subsets_checked: int = 0


def _mask_tables(g: MultiGraph, p: ResidueMap):
    """Per-bitmask residue and |2 alpha| tables over all vertex subsets."""
    verts = g.vertices
    n = len(verts)
    idx = {v: i for i, v in enumerate(verts)}
    k = p.modulus
    adj = [[0] * n for _ in range(n)]
    deg = [0] * n
    for _, u, v in g.edges():
        adj[idx[u]][idx[v]] += 1
        adj[idx[v]][idx[u]] += 1
        deg[idx[u]] += 1
        deg[idx[v]] += 1
    pv = [p.of(v) for v in verts]
    size = 1 << n
    sum_p = [0] * size
    internal = [0] * size
    deg_sum = [0] * size
    for mask in range(1, size):
        low = (mask & -mask).bit_length() - 1
        rest = mask & (mask - 1)
        sum_p[mask] = sum_p[rest] + pv[low]
        deg_sum[mask] = deg_sum[rest] + deg[low]
        into = 0
        r = rest
        while r:
            w = (r & -r).bit_length() - 1
            into += adj[low][w]
            r &= r - 1
        internal[mask] = internal[rest] + into
    mod = 2 * k
    residue = [0] * size
    abs2 = [0] * size
    for mask in range(size):
        d = deg_sum[mask] - 2 * internal[mask]
        r = (2 * (sum_p[mask] - internal[mask]) - d) % mod
        residue[mask] = r
        abs2[mask] = k if r == k else (r if r < k else 2 * k - r)
    return verts, residue, abs2, deg_sum, internal


def check_alpha_properties(g: MultiGraph, p: ResidueMap, guard: int = 16) -> AlphaReport:
    """Exhaustively verify the six structural facts about alpha.

    1. congruent values have equal absolute value; 2. additivity over
    disjoint sets; 3. |alpha(A)| = |alpha(complement)|; 4. adding a
    zero-alpha vertex keeps |alpha|; 5. cuts of value >= 3k-3 satisfy
    d(A) >= 2k-2+2|alpha(A)|; 6. d(A) - 2|alpha(A)| is even.
    Failures come back as counterexample subsets.
    """
    if g.n > guard:
        raise GraphError(f"subset enumeration beyond guard ({g.n} > {guard})")
    if not p.is_orientation_target(g):
        raise GraphError("sum of residues must match |E| mod k")
    k = p.modulus
    mod = 2 * k
    verts, residue, abs2, deg_sum, internal = _mask_tables(g, p)
    n = len(verts)
    size = 1 << n
    full = size - 1

    def unmask(mask: int) -> tuple[Vertex, ...]:
        return tuple(verts[i] for i in range(n) if mask >> i & 1)

    failures: list[AlphaFailure] = []

    def fail(pid: int, masks: Iterable[int], detail: str) -> None:
        failures.append(AlphaFailure(pid, tuple(unmask(m) for m in masks), detail))

    # 1: group by the +-residue class; equal class forces equal |2 alpha|
    by_class: dict[int, int] = {}
    for mask in range(size):
        r = residue[mask]
        cls = min(r, mod - r) if r else 0
        if cls in by_class:
            other = by_class[cls]
            if abs2[other] != abs2[mask]:
                fail(1, (other, mask), f"{abs2[other]} vs {abs2[mask]}")
        else:
            by_class[cls] = mask

    # 2: additivity over disjoint pairs (submask walk of each complement)
    for a in range(1, size):
        rest = full ^ a
        b = rest
        while b:
            if (residue[a] + residue[b] - residue[a | b]) % mod:
                fail(2, (a, b), "residues not additive")
            b = (b - 1) & rest

    for mask in range(size):
        d = deg_sum[mask] - 2 * internal[mask]
        # 3: complement symmetry
        if abs2[mask] != abs2[full ^ mask]:
            fail(3, (mask, full ^ mask), f"{abs2[mask]} vs {abs2[full ^ mask]}")
        # 5: large cuts absorb the alpha correction
        if d >= 3 * k - 3 and d < 2 * k - 2 + abs2[mask]:
            fail(5, (mask,), f"d={d} < {2 * k - 2 + abs2[mask]}")
        # 6: parity
        if (d - abs2[mask]) % 2:
            fail(6, (mask,), f"d={d}, 2|alpha|={abs2[mask]}")

    # 4: absorbing a zero-alpha vertex keeps |alpha|
    for i in range(n):
        if abs2[1 << i]:
            continue
        for mask in range(size):
            if mask >> i & 1:
                continue
            if abs2[mask | 1 << i] != abs2[mask]:
                fail(4, (1 << i, mask), "absorption changed |alpha|")

    return AlphaReport(not failures, tuple(failures), size)


def check_alpha_lift_invariance(
    g: MultiGraph, p: ResidueMap, e1: int, e2: int, pivot: Vertex
) -> AlphaReport:
    """|alpha| of every subset survives lifting e1,e2 at the pivot.

    The lifted graph replaces the pair by one edge between the far ends
    (or nothing when they coincide); the target map drops by one at the
    pivot, and also at the far end for a parallel pair.
    """
    x = g.other_end(e1, pivot)
    y = g.other_end(e2, pivot)
    stripped = g.delete_edges((e1, e2))
    if x == y:
        lifted = stripped
        p2 = p.decremented((pivot, x))
    else:
        lifted, _ = stripped.add_edges([(x, y)])
        p2 = p.decremented((pivot,))
    _, _, abs_before, _, _ = _mask_tables(g, p)
    _, _, abs_after, _, _ = _mask_tables(lifted, p2)
    verts = g.vertices
    n = len(verts)
    failures = []
    for mask in range(1 << n):
        if abs_before[mask] != abs_after[mask]:
            subset = tuple(verts[i] for i in range(n) if mask >> i & 1)
            failures.append(
                AlphaFailure(0, (subset,), f"{abs_before[mask]} -> {abs_after[mask]}")
            )
    return AlphaReport(not failures, tuple(failures), 1 << n)
