"""Shared hypothesis strategies for graph-shaped test data."""

from __future__ import annotations

from hypothesis import strategies as st

from modk.multigraph import MultiGraph


@st.composite
def multigraphs(draw, min_n=1, max_n=6, max_m=10):
    n = draw(st.integers(min_n, max_n))
    pairs = []
    if n >= 2:
        m = draw(st.integers(0, max_m))
        for _ in range(m):
            u = draw(st.integers(0, n - 1))
            v = draw(st.integers(0, n - 2))
            if v >= u:
                v += 1
            pairs.append((u, v))
    return MultiGraph.from_edges(n, pairs)


@st.composite
def graph_and_subset(draw):
    g = draw(multigraphs(min_n=2))
    size = draw(st.integers(1, g.n - 1))
    A = draw(st.permutations(g.vertices))[:size]
    return g, tuple(A)
