"""Graphs on ``[n] = {0, ..., n-1}`` stored as bitsets over edge slots.

Edge slots are ordered lexicographically on ``(min(u, v), max(u, v))``;
``edge_index`` and ``edge_pairs`` are the two directions of that bijection.
Vertices are 0-based in the API and 1-based in the text format.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import combinations

import numpy as np

from .errors import FormatError, ParameterError


def num_slots(n: int) -> int:
    return n * (n - 1) // 2


def edge_index(u: int, v: int, n: int) -> int:
    if u == v:
        raise ParameterError("self-loops are not edges")
    if u > v:
        u, v = v, u
    if u < 0 or v >= n:
        raise ParameterError(f"edge ({u}, {v}) outside [{n}]")
    return u * (2 * n - u - 1) // 2 + (v - u - 1)


@lru_cache(maxsize=64)
def edge_pairs(n: int) -> np.ndarray:
    """``(C(n,2), 2)`` array; row ``s`` is the vertex pair of slot ``s``."""
    if n < 2:
        return np.zeros((0, 2), dtype=np.int64)
    iu = np.triu_indices(n, k=1)
    out = np.stack(iu, axis=1).astype(np.int64)
    out.flags.writeable = False
    return out


def clique_slots(vertices, n: int) -> list[int]:
    vs = sorted(set(vertices))
    return [edge_index(u, v, n) for u, v in combinations(vs, 2)]


def mask_of(vertices) -> int:
    m = 0
    for v in vertices:
        m |= 1 << int(v)
    return m


def members(mask: int) -> list[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


class Graph:
    """Simple undirected graph as a boolean vector over the ``C(n,2)`` edge slots."""

    __slots__ = ("n", "edges")

    def __init__(self, n: int, edges=None):
        if n < 0:
            raise ParameterError("n must be non-negative")
        self.n = int(n)
        if edges is None:
            edges = np.zeros(num_slots(n), dtype=bool)
        edges = np.asarray(edges, dtype=bool)
        if edges.shape != (num_slots(n),):
            raise ParameterError(f"edge vector must have length {num_slots(n)}")
        self.edges = edges

    @classmethod
    def from_edges(cls, n: int, pairs) -> "Graph":
        e = np.zeros(num_slots(n), dtype=bool)
        for u, v in pairs:
            e[edge_index(u, v, n)] = True
        return cls(n, e)

    @classmethod
    def complete(cls, n: int) -> "Graph":
        return cls(n, np.ones(num_slots(n), dtype=bool))

    @classmethod
    def empty(cls, n: int) -> "Graph":
        return cls(n)

    @classmethod
    def clique_on(cls, n: int, vertices) -> "Graph":
        e = np.zeros(num_slots(n), dtype=bool)
        e[clique_slots(vertices, n)] = True
        return cls(n, e)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.edges[edge_index(u, v, self.n)])

    @property
    def edge_count(self) -> int:
        return int(self.edges.sum())

    def edge_list(self) -> list[tuple[int, int]]:
        return [tuple(map(int, p)) for p in edge_pairs(self.n)[self.edges]]

    def adjacency_masks(self) -> list[int]:
        adj = [0] * self.n
        for u, v in self.edge_list():
            adj[u] |= 1 << v
            adj[v] |= 1 << u
        return adj

    def is_subgraph_of(self, other: "Graph") -> bool:
        return self.n == other.n and not np.any(self.edges & ~other.edges)

    def union(self, other: "Graph") -> "Graph":
        if self.n != other.n:
            raise ParameterError("vertex-count mismatch")
        return Graph(self.n, self.edges | other.edges)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.edge_count})"

    def to_text(self) -> str:
        lines = [f"GRAPH n={self.n}"]
        lines += [f"{u + 1} {v + 1}" for u, v in self.edge_list()]
        return "\n".join(lines) + "\n\n"


def parse_graph(text: str) -> Graph:
    """Parse the ``GRAPH n=<n>`` format; loops and duplicate edges are rejected."""
    lines = text.splitlines()
    if not lines or not lines[0].startswith("GRAPH n="):
        raise FormatError("expected header 'GRAPH n=<n>'", 1)
    try:
        n = int(lines[0][len("GRAPH n="):].strip())
    except ValueError:
        raise FormatError("bad vertex count", 1) from None
    g = Graph(n)
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            break
        parts = line.split()
        if len(parts) != 2:
            raise FormatError("expected 'u v'", lineno)
        try:
            u, v = int(parts[0]) - 1, int(parts[1]) - 1
        except ValueError:
            raise FormatError("non-integer vertex", lineno) from None
        if u == v:
            raise FormatError("self-loop", lineno)
        if not (0 <= u < n and 0 <= v < n):
            raise FormatError("vertex out of range", lineno)
        s = edge_index(u, v, n)
        if g.edges[s]:
            raise FormatError("duplicate edge", lineno)
        g.edges[s] = True
    return g


def contains_clique(g: Graph, k: int) -> bool:
    """Exact test for a ``k``-clique (bitset branch and bound)."""
    if k < 1 or k > max(g.n, 1):
        raise ParameterError("need 1 <= k <= n")
    if k == 1:
        return g.n >= 1
    adj = g.adjacency_masks()
    # k-core pruning: a vertex in a k-clique has degree >= k-1
    alive = (1 << g.n) - 1
    changed = True
    while changed:
        changed = False
        for v in members(alive):
            if (adj[v] & alive).bit_count() < k - 1:
                alive &= ~(1 << v)
                changed = True
    if alive.bit_count() < k:
        return False
    adj = [a & alive for a in adj]

    def search(cand: int, need: int) -> bool:
        if need == 0:
            return True
        while cand and cand.bit_count() >= need:
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            if search(cand & adj[v], need - 1):
                return True
        return False

    return search(alive, k)
