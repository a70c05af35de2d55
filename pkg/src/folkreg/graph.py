"""Dense graphs, vertex sets and edge-coloured multipartite hosts."""

from __future__ import annotations

from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class GraphError(ValueError):
    """Bad arguments to a graph operation."""


class ColoringMissing(RuntimeError):
    """An operation needed an edge colouring the host does not carry."""


def as_fraction(x) -> Fraction:
    """Exact rational from an int, Fraction, float or "num/den" string.

    Floats go through their shortest repr, so 0.3 becomes 3/10 rather than
    the binary expansion.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, (float, np.floating)):
        return Fraction(repr(float(x)))
    return Fraction(str(x).strip())


def frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


class VertexSet:
    """An immutable set of global vertex indices.

    Stored as a sorted index array; the equivalent bitmask is built on
    demand for serialisation.
    """

    def __init__(self, vertices: Iterable[int] | np.ndarray = ()):
        arr = np.unique(np.asarray(list(vertices) if not isinstance(vertices, np.ndarray) else vertices, dtype=np.int64))
        if arr.size and arr[0] < 0:
            raise GraphError("negative vertex index")
        arr.setflags(write=False)
        self.indices = arr

    @classmethod
    def from_mask(cls, mask: int) -> "VertexSet":
        out = []
        v = 0
        while mask:
            if mask & 1:
                out.append(v)
            mask >>= 1
            v += 1
        return cls(out)

    @classmethod
    def from_range(cls, start: int, stop: int) -> "VertexSet":
        return cls(np.arange(start, stop, dtype=np.int64))

    @cached_property
    def mask(self) -> int:
        m = 0
        for v in self.indices.tolist():
            m |= 1 << v
        return m

    def __len__(self) -> int:
        return int(self.indices.size)

    def __iter__(self):
        return iter(self.indices.tolist())

    def __contains__(self, v) -> bool:
        i = np.searchsorted(self.indices, v)
        return bool(i < self.indices.size and self.indices[i] == v)

    def __eq__(self, other) -> bool:
        if not isinstance(other, VertexSet):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)

    def __hash__(self) -> int:
        return hash(self.indices.tobytes())

    def __repr__(self) -> str:
        return f"VertexSet({self.indices.tolist()})"

    def isdisjoint(self, other: "VertexSet") -> bool:
        return np.intersect1d(self.indices, other.indices, assume_unique=True).size == 0

    def __and__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(np.intersect1d(self.indices, other.indices, assume_unique=True))

    def __or__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(np.union1d(self.indices, other.indices))

    def __sub__(self, other: "VertexSet") -> "VertexSet":
        return VertexSet(np.setdiff1d(self.indices, other.indices, assume_unique=True))

    def hex(self) -> str:
        return format(self.mask, "x")


class DenseGraph:
    """Simple undirected graph on ``0..n-1`` backed by a boolean matrix."""

    def __init__(self, n: int, edges: Iterable[tuple[int, int]] = (), *, adjacency: np.ndarray | None = None):
        if n < 0:
            raise GraphError("negative vertex count")
        if adjacency is not None:
            adj = np.array(adjacency, dtype=bool)
            if adj.shape != (n, n):
                raise GraphError(f"adjacency shape {adj.shape} != ({n}, {n})")
            if not np.array_equal(adj, adj.T):
                raise GraphError("adjacency not symmetric")
            if adj.diagonal().any():
                raise GraphError("loops are not allowed")
        else:
            adj = np.zeros((n, n), dtype=bool)
            for u, v in edges:
                u, v = int(u), int(v)
                if u == v:
                    raise GraphError(f"loop at {u}")
                if not (0 <= u < n and 0 <= v < n):
                    raise GraphError(f"edge ({u}, {v}) out of range for n={n}")
                if adj[u, v]:
                    raise GraphError(f"repeated edge ({u}, {v})")
                adj[u, v] = adj[v, u] = True
        adj.setflags(write=False)
        self.n = n
        self.adj = adj

    @cached_property
    def m(self) -> int:
        return int(self.adj.sum()) // 2

    def edges(self) -> list[tuple[int, int]]:
        us, vs = np.nonzero(np.triu(self.adj, 1))
        return list(zip(us.tolist(), vs.tolist()))

    def neighbors(self, v: int) -> np.ndarray:
        return np.nonzero(self.adj[v])[0]

    def degree(self, v: int) -> int:
        return int(self.adj[v].sum())

    @cached_property
    def max_degree(self) -> int:
        return int(self.adj.sum(axis=1).max()) if self.n else 0

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.adj[u, v])

    def edge_count(self, X: VertexSet, Y: VertexSet) -> int:
        return int(self.adj[np.ix_(X.indices, Y.indices)].sum())

    def __eq__(self, other) -> bool:
        return isinstance(other, DenseGraph) and self.n == other.n and np.array_equal(self.adj, other.adj)

    def __repr__(self) -> str:
        return f"DenseGraph(n={self.n}, m={self.m})"


def density(g: DenseGraph, X: VertexSet, Y: VertexSet) -> Fraction:
    """Exact edge density e(X, Y) / (|X| |Y|) of a disjoint pair."""
    if not len(X) or not len(Y):
        raise GraphError("density of an empty set")
    if not X.isdisjoint(Y):
        raise GraphError("density needs disjoint sets")
    return Fraction(g.edge_count(X, Y), len(X) * len(Y))


class PartiteHost:
    """A p-partite graph with contiguous parts and an optional r-colouring.

    ``colors`` is an n x n int8 matrix holding the colour of each edge and
    -1 elsewhere.
    """

    def __init__(self, part_sizes: Sequence[int], graph: DenseGraph, colors: np.ndarray | None = None, r: int | None = None):
        sizes = [int(s) for s in part_sizes]
        if len(sizes) < 2:
            raise GraphError("a partite host needs at least two parts")
        if any(s < 1 for s in sizes):
            raise GraphError("empty part")
        if sum(sizes) != graph.n:
            raise GraphError(f"part sizes sum to {sum(sizes)}, graph has {graph.n} vertices")
        self.part_sizes = tuple(sizes)
        self.offsets = tuple(np.concatenate([[0], np.cumsum(sizes)]).tolist())
        self.graph = graph
        part_of = np.repeat(np.arange(len(sizes)), sizes)
        same = part_of[:, None] == part_of[None, :]
        if (graph.adj & same).any():
            raise GraphError("edge inside a part")
        self.part_of = part_of
        if colors is not None:
            colors = np.array(colors, dtype=np.int8)
            if r is None:
                r = int(colors.max()) + 1 if graph.m else 1
            if colors.shape != graph.adj.shape:
                raise GraphError("colour matrix shape mismatch")
            if not np.array_equal(colors, colors.T):
                raise GraphError("colour matrix not symmetric")
            on_edges = colors[graph.adj]
            if (on_edges < 0).any() or (on_edges >= r).any():
                raise GraphError(f"edge colours must lie in 0..{r - 1}")
            if (colors[~graph.adj] != -1).any():
                raise GraphError("colour on a non-edge")
            colors.setflags(write=False)
        self.colors = colors
        self.r = r

    @property
    def p(self) -> int:
        return len(self.part_sizes)

    @property
    def n(self) -> int:
        return self.graph.n

    def part(self, s: int) -> VertexSet:
        return VertexSet.from_range(self.offsets[s], self.offsets[s + 1])

    def part_range(self, s: int) -> range:
        return range(self.offsets[s], self.offsets[s + 1])

    def is_complete(self) -> bool:
        return self.graph.m == (self.n * self.n - sum(s * s for s in self.part_sizes)) // 2

    def color_adjacency(self, color: int) -> np.ndarray:
        if self.colors is None:
            raise ColoringMissing("host carries no edge colouring")
        if not 0 <= color < self.r:
            raise GraphError(f"colour {color} outside 0..{self.r - 1}")
        return self.colors == color

    def __repr__(self) -> str:
        return f"PartiteHost(parts={list(self.part_sizes)}, m={self.graph.m}, r={self.r})"


def monochrome_subgraph(host: PartiteHost, color: int) -> DenseGraph:
    """The spanning subgraph of edges carrying ``color``."""
    return DenseGraph(host.n, adjacency=host.color_adjacency(color))


def complete_multipartite(part_sizes: Sequence[int]) -> DenseGraph:
    part_of = np.repeat(np.arange(len(part_sizes)), part_sizes)
    adj = part_of[:, None] != part_of[None, :]
    return DenseGraph(len(part_of), adjacency=adj)


def random_host(p: int, part_size: int, r: int, seed: int) -> PartiteHost:
    """Complete p-partite host with every cross edge coloured uniformly at random."""
    if p < 2 or part_size < 1 or r < 1:
        raise GraphError("need p >= 2, part_size >= 1, r >= 1")
    g = complete_multipartite([part_size] * p)
    rng = np.random.default_rng(seed)
    n = g.n
    upper = np.triu(rng.integers(0, r, size=(n, n), dtype=np.int8), 1)
    colors = np.where(g.adj, upper + upper.T, -1).astype(np.int8)
    return PartiteHost([part_size] * p, g, colors, r)


def random_bounded_degree_graph(n: int, delta: int, seed: int, *, attempts: int | None = None) -> DenseGraph:
    """Random graph on n vertices with maximum degree at most ``delta``.

    Candidate edges are visited in a random order and kept while both
    endpoints have spare degree.
    """
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    order = rng.permutation(len(pairs))
    deg = [0] * n
    edges = []
    for i in order[: attempts or len(pairs)]:
        u, v = pairs[i]
        if deg[u] < delta and deg[v] < delta and rng.random() < 0.5:
            edges.append((u, v))
            deg[u] += 1
            deg[v] += 1
    return DenseGraph(n, edges)
