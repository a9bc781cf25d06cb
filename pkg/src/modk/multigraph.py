"""Loopless multigraphs with stable edge identities.

Parallel edges are first class: every edge has an integer EdgeId that
survives deletion, contraction and subgraph extraction, so ledgers and
orientations can refer to edges without guessing among parallels.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Iterator, Mapping

from .errors import GraphError

EdgeId = int
Vertex = int


class MultiGraph:
    """An undirected loopless multigraph over integer vertex labels.

    Instances are treated as immutable; every mutator returns a new graph.
    Edge endpoints keep their stored order (used by orientations).
    """

    __slots__ = ("_vertices", "_edges", "__dict__")

    def __init__(self, vertices: Iterable[Vertex], edges: Mapping[EdgeId, tuple[Vertex, Vertex]]):
        self._vertices: tuple[Vertex, ...] = tuple(sorted(set(vertices)))
        vset = set(self._vertices)
        cleaned: dict[EdgeId, tuple[Vertex, Vertex]] = {}
        for eid in sorted(edges):
            u, v = edges[eid]
            if u == v:
                raise GraphError(f"loop at vertex {u} (edge {eid})")
            if u not in vset or v not in vset:
                raise GraphError(f"edge {eid} endpoint outside vertex set")
            cleaned[int(eid)] = (u, v)
        self._edges = cleaned

    @classmethod
    def from_edges(cls, n_or_vertices: int | Iterable[Vertex], pairs: Iterable[tuple[Vertex, Vertex]]) -> "MultiGraph":
        """Build a graph assigning EdgeIds 0.. in the order pairs are given."""
        if isinstance(n_or_vertices, int):
            vertices: Iterable[Vertex] = range(n_or_vertices)
        else:
            vertices = n_or_vertices
        return cls(vertices, {i: (u, v) for i, (u, v) in enumerate(pairs)})

    # -- basic views ---------------------------------------------------

    @property
    def vertices(self) -> tuple[Vertex, ...]:
        return self._vertices

    @property
    def n(self) -> int:
        return len(self._vertices)

    @property
    def m(self) -> int:
        return len(self._edges)

    def edge_ids(self) -> tuple[EdgeId, ...]:
        return tuple(self._edges)

    def endpoints(self, eid: EdgeId) -> tuple[Vertex, Vertex]:
        return self._edges[eid]

    def has_edge(self, eid: EdgeId) -> bool:
        return eid in self._edges

    def edges(self) -> Iterator[tuple[EdgeId, Vertex, Vertex]]:
        for eid, (u, v) in self._edges.items():
            yield eid, u, v

    def other_end(self, eid: EdgeId, v: Vertex) -> Vertex:
        a, b = self._edges[eid]
        if v == a:
            return b
        if v == b:
            return a
        raise GraphError(f"vertex {v} not an endpoint of edge {eid}")

    @cached_property
    def _incidence(self) -> dict[Vertex, tuple[EdgeId, ...]]:
        inc: dict[Vertex, list[EdgeId]] = {v: [] for v in self._vertices}
        for eid, (u, v) in self._edges.items():
            inc[u].append(eid)
            inc[v].append(eid)
        return {v: tuple(ids) for v, ids in inc.items()}

    def incident(self, v: Vertex) -> tuple[EdgeId, ...]:
        """EdgeIds incident to v, ascending."""
        return self._incidence[v]

    def degree(self, v: Vertex) -> int:
        return len(self._incidence[v])

    def degrees(self) -> dict[Vertex, int]:
        return {v: len(ids) for v, ids in self._incidence.items()}

    def max_degree(self) -> int:
        return max((len(ids) for ids in self._incidence.values()), default=0)

    def min_degree(self) -> int:
        return min((len(ids) for ids in self._incidence.values()), default=0)

    def neighbors(self, v: Vertex) -> tuple[Vertex, ...]:
        return tuple(sorted({self.other_end(e, v) for e in self._incidence[v]}))

    def parallel_edges(self, u: Vertex, v: Vertex) -> tuple[EdgeId, ...]:
        key = (min(u, v), max(u, v))
        return tuple(e for e, (a, b) in self._edges.items() if (min(a, b), max(a, b)) == key)

    def next_edge_id(self) -> EdgeId:
        return max(self._edges, default=-1) + 1

    # -- cut and subset counts ----------------------------------------

    def boundary(self, A: Iterable[Vertex]) -> int:
        """Number of edges with exactly one end in A (the cut d(A))."""
        s = set(A)
        return sum(1 for (u, v) in self._edges.values() if (u in s) != (v in s))

    def boundary_edges(self, A: Iterable[Vertex]) -> tuple[EdgeId, ...]:
        s = set(A)
        return tuple(e for e, (u, v) in self._edges.items() if (u in s) != (v in s))

    def internal(self, A: Iterable[Vertex]) -> int:
        """Number of edges with both ends inside A."""
        s = set(A)
        return sum(1 for (u, v) in self._edges.values() if u in s and v in s)

    def between(self, A: Iterable[Vertex], B: Iterable[Vertex]) -> int:
        sa, sb = set(A), set(B)
        if sa & sb:
            raise GraphError("between() wants disjoint vertex sets")
        return sum(
            1
            for (u, v) in self._edges.values()
            if (u in sa and v in sb) or (u in sb and v in sa)
        )

    # -- derived graphs ------------------------------------------------

    def delete_edges(self, eids: Iterable[EdgeId]) -> "MultiGraph":
        drop = set(eids)
        missing = drop - set(self._edges)
        if missing:
            raise GraphError(f"unknown edge ids {sorted(missing)}")
        return MultiGraph(self._vertices, {e: uv for e, uv in self._edges.items() if e not in drop})

    def keep_edges(self, eids: Iterable[EdgeId]) -> "MultiGraph":
        """Spanning subgraph with exactly the given edges (all vertices kept)."""
        keep = set(eids)
        missing = keep - set(self._edges)
        if missing:
            raise GraphError(f"unknown edge ids {sorted(missing)}")
        return MultiGraph(self._vertices, {e: self._edges[e] for e in keep})

    def add_edges(
        self, pairs: Iterable[tuple[Vertex, Vertex]], start: EdgeId | None = None
    ) -> tuple["MultiGraph", tuple[EdgeId, ...]]:
        """Add edges with fresh ascending EdgeIds; returns them in order.

        start shifts where the fresh ids begin; it may not collide with
        an id already in use (gaps are fine).
        """
        edges = dict(self._edges)
        nid = self.next_edge_id()
        if start is not None:
            if start < nid:
                raise GraphError(f"start id {start} collides with existing edges")
            nid = start
        new_ids = []
        for u, v in pairs:
            edges[nid] = (u, v)
            new_ids.append(nid)
            nid += 1
        return MultiGraph(self._vertices, edges), tuple(new_ids)

    def remove_vertex(self, v: Vertex) -> "MultiGraph":
        """Drop v and every edge at v."""
        if v not in self._incidence:
            raise GraphError(f"unknown vertex {v}")
        return MultiGraph(
            (w for w in self._vertices if w != v),
            {e: uv for e, uv in self._edges.items() if v not in uv},
        )

    def induced(self, A: Iterable[Vertex]) -> "MultiGraph":
        s = set(A)
        return MultiGraph(s, {e: (u, v) for e, (u, v) in self._edges.items() if u in s and v in s})

    def contract(self, A: Iterable[Vertex]) -> tuple["MultiGraph", dict[Vertex, Vertex]]:
        """Contract vertex set A to a single vertex (the minimum label of A).

        Edges inside A disappear; edges crossing A keep their EdgeId with
        the A-side endpoint renamed. Returns the graph and the full
        old-vertex -> new-vertex map.
        """
        s = set(A)
        if not s or not s <= set(self._vertices):
            raise GraphError("contract() wants a nonempty subset of the vertices")
        a = min(s)
        vmap = {v: (a if v in s else v) for v in self._vertices}
        edges = {}
        for e, (u, v) in self._edges.items():
            nu, nv = vmap[u], vmap[v]
            if nu != nv:
                edges[e] = (nu, nv)
        return MultiGraph(sorted(set(vmap.values())), edges), vmap

    # -- connectivity basics -------------------------------------------

    def connected_components(self) -> list[tuple[Vertex, ...]]:
        seen: set[Vertex] = set()
        comps = []
        for start in self._vertices:
            if start in seen:
                continue
            stack = [start]
            comp = {start}
            seen.add(start)
            while stack:
                v = stack.pop()
                for e in self._incidence[v]:
                    w = self.other_end(e, v)
                    if w not in comp:
                        comp.add(w)
                        seen.add(w)
                        stack.append(w)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self) -> bool:
        return len(self.connected_components()) <= 1

    def spanning_forest(self) -> tuple[EdgeId, ...]:
        """A forest hitting every component, greedy by ascending EdgeId."""
        parent = {v: v for v in self._vertices}

        def find(x: Vertex) -> Vertex:
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        picked = []
        for e in sorted(self._edges):
            u, v = self._edges[e]
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
                picked.append(e)
        return tuple(picked)

    # -- Eulerian tours -------------------------------------------------

    def eulerian_tour(self, start: Vertex | None = None, first_edge: EdgeId | None = None) -> tuple[EdgeId, ...]:
        """Closed Eulerian tour of the component containing `start`.

        Requires every vertex of that component to have even degree.
        Ties are broken by ascending EdgeId; `first_edge` forces the
        initial step. Returns the edge sequence (empty if start isolated).
        """
        if self.m == 0:
            return ()
        if start is None:
            start = min(u for _, u, v in self.edges() for u in (u, v))
        comp = next(c for c in self.connected_components() if start in c)
        for v in comp:
            if self.degree(v) % 2 != 0:
                raise GraphError(f"odd degree {self.degree(v)} at {v}: no Eulerian tour")
        remaining: dict[Vertex, list[EdgeId]] = {
            v: sorted(self._incidence[v], reverse=True) for v in comp
        }
        if first_edge is not None:
            if start not in self._edges[first_edge]:
                raise GraphError("first_edge is not incident to start")
            remaining[start].remove(first_edge)
            remaining[start].append(first_edge)
        used: set[EdgeId] = set()
        # Hierholzer, stack based; vertex stack entries carry the edge used to reach them.
        tour: list[EdgeId] = []
        stack: list[tuple[Vertex, EdgeId | None]] = [(start, None)]
        while stack:
            v, via = stack[-1]
            inc = remaining[v]
            while inc and inc[-1] in used:
                inc.pop()
            if inc:
                e = inc.pop()
                used.add(e)
                stack.append((self.other_end(e, v), e))
            else:
                stack.pop()
                if via is not None:
                    tour.append(via)
        tour.reverse()
        if len(tour) != sum(len(self._incidence[v]) for v in comp) // 2:
            raise GraphError("component is not connected through its edges")
        return tuple(tour)

    # -- dunder ----------------------------------------------------------

    def __repr__(self) -> str:
        return f"MultiGraph(n={self.n}, m={self.m})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MultiGraph):
            return NotImplemented
        return self._vertices == other._vertices and self._edges == other._edges


class Orientation:
    """A (possibly partial) assignment of directions to a graph's edges.

    Direction +1 means the edge points from its stored tail to its stored
    head (the endpoint order of the host graph); -1 is the reverse.
    """

    FORWARD = 1
    BACKWARD = -1

    def __init__(self, host: MultiGraph, direction: Mapping[EdgeId, int] | None = None):
        self.host = host
        self._dir: dict[EdgeId, int] = {}
        if direction:
            for e, d in direction.items():
                self.assign(e, d)

    def assign(self, eid: EdgeId, direction: int) -> None:
        if direction not in (self.FORWARD, self.BACKWARD):
            raise GraphError(f"direction must be +1 or -1, got {direction}")
        if not self.host.has_edge(eid):
            raise GraphError(f"unknown edge {eid}")
        self._dir[eid] = direction

    def orient_out_of(self, eid: EdgeId, tail: Vertex) -> None:
        """Point eid away from the given vertex."""
        u, v = self.host.endpoints(eid)
        if tail == u:
            self.assign(eid, self.FORWARD)
        elif tail == v:
            self.assign(eid, self.BACKWARD)
        else:
            raise GraphError(f"vertex {tail} not on edge {eid}")

    def direction(self, eid: EdgeId) -> int | None:
        return self._dir.get(eid)

    def tail(self, eid: EdgeId) -> Vertex:
        u, v = self.host.endpoints(eid)
        return u if self._dir[eid] == self.FORWARD else v

    def head(self, eid: EdgeId) -> Vertex:
        u, v = self.host.endpoints(eid)
        return v if self._dir[eid] == self.FORWARD else u

    def is_total(self) -> bool:
        return len(self._dir) == self.host.m

    def assigned_ids(self) -> tuple[EdgeId, ...]:
        return tuple(sorted(self._dir))

    def out_degree(self, v: Vertex) -> int:
        return sum(1 for e in self.host.incident(v) if e in self._dir and self.tail(e) == v)

    def in_degree(self, v: Vertex) -> int:
        return sum(1 for e in self.host.incident(v) if e in self._dir and self.head(e) == v)

    def out_degrees(self) -> dict[Vertex, int]:
        out = {v: 0 for v in self.host.vertices}
        for e in self._dir:
            out[self.tail(e)] += 1
        return out

    def out_edges(self, v: Vertex) -> tuple[EdgeId, ...]:
        return tuple(e for e in self.host.incident(v) if e in self._dir and self.tail(e) == v)

    def in_edges(self, v: Vertex) -> tuple[EdgeId, ...]:
        return tuple(e for e in self.host.incident(v) if e in self._dir and self.head(e) == v)

    def restricted_to(self, host: MultiGraph) -> "Orientation":
        """The same directions on a graph sharing (a subset of) the edges."""
        return Orientation(host, {e: d for e, d in self._dir.items() if host.has_edge(e)})

    def copy(self) -> "Orientation":
        return Orientation(self.host, dict(self._dir))

    def as_dict(self) -> dict[EdgeId, int]:
        return dict(self._dir)

    def directed_eulerian_tour(self, start: Vertex | None = None, first_edge: EdgeId | None = None) -> tuple[EdgeId, ...]:
        """Closed directed Eulerian tour; needs out-degree == in-degree everywhere.

        Covers the whole edge set (host must be connected on its edge support).
        """
        if not self.is_total():
            raise GraphError("directed tour wants a total orientation")
        host = self.host
        if host.m == 0:
            return ()
        outs = self.out_degrees()
        for v in host.vertices:
            if outs[v] != self.in_degree(v):
                raise GraphError(f"unbalanced vertex {v}")
        if first_edge is not None:
            start = self.tail(first_edge)
        if start is None:
            start = min(u for e in host.edge_ids() for u in host.endpoints(e))
        remaining: dict[Vertex, list[EdgeId]] = {v: [] for v in host.vertices}
        for e in sorted(host.edge_ids(), reverse=True):
            remaining[self.tail(e)].append(e)
        if first_edge is not None:
            remaining[start].remove(first_edge)
            remaining[start].append(first_edge)
        tour: list[EdgeId] = []
        stack: list[tuple[Vertex, EdgeId | None]] = [(start, None)]
        while stack:
            v, via = stack[-1]
            if remaining[v]:
                e = remaining[v].pop()
                stack.append((self.head(e), e))
            else:
                stack.pop()
                if via is not None:
                    tour.append(via)
        tour.reverse()
        if len(tour) != host.m:
            raise GraphError("directed tour does not cover every edge")
        return tuple(tour)


def induced_out_degree_identity(base: MultiGraph, lifted: MultiGraph, base_orientation: Orientation, lifted_orientation: Orientation, v: Vertex) -> bool:
    """Check d+_G(v) == d+_L(v) + (d_G(v) - d_L(v)) / 2 for an induced orientation."""
    dg, dl = base.degree(v), lifted.degree(v) if v in lifted.vertices else 0
    dplus_l = lifted_orientation.out_degree(v) if v in lifted.vertices else 0
    return base_orientation.out_degree(v) == dplus_l + (dg - dl) // 2
