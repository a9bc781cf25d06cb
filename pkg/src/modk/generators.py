"""Deterministic graph families and seeded random ensembles.

Randomness only ever comes from an explicit seed; the same (seed, params)
pair always yields the same graphs. Ensembles that declare a connectivity
level verify it on every emitted graph and regenerate on failure.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator

from .connectivity import is_lambda_at_least
from .errors import GraphError
from .multigraph import MultiGraph, Vertex


def cycle_graph(n: int) -> MultiGraph:
    if n < 3:
        raise GraphError("cycles need at least 3 vertices")
    return MultiGraph.from_edges(n, [(i, (i + 1) % n) for i in range(n)])


def path_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n: int) -> MultiGraph:
    return MultiGraph.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def complete_bipartite(a: int, b: int) -> MultiGraph:
    return MultiGraph.from_edges(a + b, [(i, a + j) for i in range(a) for j in range(b)])


def star_graph(leaves: int) -> MultiGraph:
    return MultiGraph.from_edges(leaves + 1, [(0, i + 1) for i in range(leaves)])


def circulant(n: int, connections: tuple[int, ...] | list[int] | set[int]) -> MultiGraph:
    """Circulant graph: i adjacent to i+s (mod n) for each step s."""
    steps = sorted(set(connections))
    if any(s < 1 or 2 * s > n for s in steps):
        raise GraphError("connection steps must lie in [1, n/2]")
    pairs = []
    for s in steps:
        count = n // 2 if 2 * s == n else n
        for i in range(count):
            pairs.append((i, (i + s) % n))
    return MultiGraph.from_edges(n, pairs)


def cartesian_cycle_complete(cycle_len: int, complete_order: int) -> MultiGraph:
    """Cartesian product of a cycle and a complete graph.

    Vertex (i, j) is encoded as i * complete_order + j.
    """
    if cycle_len < 3 or complete_order < 1:
        raise GraphError("need cycle_len >= 3 and complete_order >= 1")
    b = complete_order

    def enc(i: int, j: int) -> int:
        return i * b + j

    pairs = []
    for i in range(cycle_len):
        for j in range(b):
            pairs.append((enc(i, j), enc((i + 1) % cycle_len, j)))
    for i in range(cycle_len):
        for j in range(b):
            for j2 in range(j + 1, b):
                pairs.append((enc(i, j), enc(i, j2)))
    return MultiGraph.from_edges(cycle_len * b, pairs)


def scaled(g: MultiGraph, copies: int) -> MultiGraph:
    """Replace every edge by `copies` parallel edges (fresh ids, grouped)."""
    if copies < 1:
        raise GraphError("copies must be positive")
    pairs = []
    for eid in sorted(g.edge_ids()):
        u, v = g.endpoints(eid)
        pairs.extend([(u, v)] * copies)
    return MultiGraph(g.vertices, {i: p for i, p in enumerate(pairs)})


def union_of_hamiltonian_cycles(n: int, count: int, rng: random.Random) -> MultiGraph:
    """Union of `count` uniformly random Hamiltonian cycles (a 2*count-regular multigraph)."""
    if n < 3:
        raise GraphError("need at least 3 vertices")
    pairs = []
    for _ in range(count):
        perm = list(range(n))
        rng.shuffle(perm)
        pairs.extend((perm[i], perm[(i + 1) % n]) for i in range(n))
    return MultiGraph.from_edges(n, pairs)


def random_multigraph(n: int, m: int, rng: random.Random) -> MultiGraph:
    if n < 2 and m > 0:
        raise GraphError("cannot place edges on fewer than 2 vertices")
    pairs = []
    for _ in range(m):
        u = rng.randrange(n)
        v = rng.randrange(n - 1)
        if v >= u:
            v += 1
        pairs.append((u, v))
    return MultiGraph.from_edges(n, pairs)


def random_lambda_connected(n: int, m: int, min_lambda: int, rng: random.Random, max_tries: int = 2000) -> MultiGraph:
    """Random multigraph with edge connectivity at least min_lambda, by rejection."""
    for _ in range(max_tries):
        g = random_multigraph(n, m, rng)
        if is_lambda_at_least(g, min_lambda):
            return g
    raise GraphError(f"no {min_lambda}-edge-connected graph with n={n}, m={m} found in {max_tries} tries")


GENERATORS = {
    "cycle": lambda params, rng: cycle_graph(int(params["n"])),
    "path": lambda params, rng: path_graph(int(params["n"])),
    "complete": lambda params, rng: complete_graph(int(params["n"])),
    "complete_bipartite": lambda params, rng: complete_bipartite(int(params["a"]), int(params["b"])),
    "circulant": lambda params, rng: circulant(int(params["n"]), params["steps"]),
    "cartesian": lambda params, rng: cartesian_cycle_complete(int(params["cycle"]), int(params["complete"])),
    "ham_union": lambda params, rng: union_of_hamiltonian_cycles(int(params["n"]), int(params["count"]), rng),
    "random": lambda params, rng: random_multigraph(int(params["n"]), int(params["m"]), rng),
}


@dataclass
class Ensemble:
    """A reproducible stream of graphs from one generator.

    Optional fields modify each draw: `scale` multiplies edges, and
    `min_lambda` rejects draws below the declared connectivity.
    """

    generator: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    count: int = 1
    scale: int = 1
    min_lambda: int = 0

    def __iter__(self) -> Iterator[MultiGraph]:
        if self.generator not in GENERATORS:
            raise GraphError(f"unknown generator {self.generator!r}")
        make = GENERATORS[self.generator]
        rng = random.Random(self.seed)
        produced = 0
        attempts = 0
        while produced < self.count:
            attempts += 1
            if attempts > 200 * self.count + 200:
                raise GraphError(f"ensemble {self.generator} failed to meet its connectivity target")
            g = make(self.params, rng)
            if self.scale > 1:
                g = scaled(g, self.scale)
            if self.min_lambda and not is_lambda_at_least(g, self.min_lambda):
                continue
            produced += 1
            yield g
