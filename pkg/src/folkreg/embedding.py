"""Greedy embedding of bounded-degree graphs into dense cluster tuples."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .graph import DenseGraph, GraphError, VertexSet, as_fraction


class ColoringInfeasible(ValueError):
    """The target graph has no proper colouring with the allowed colours."""


class EmbeddingStateError(RuntimeError):
    """Embedding called with a missing or improper vertex colouring."""


def _components(G: DenseGraph) -> list[list[int]]:
    seen = [False] * G.n
    comps = []
    for v in range(G.n):
        if seen[v]:
            continue
        stack, comp = [v], []
        seen[v] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in G.neighbors(u).tolist():
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(sorted(comp))
    return comps


def _obstruction(G: DenseGraph, delta: int) -> str:
    for comp in _components(G):
        size = len(comp)
        sub = G.adj[np.ix_(comp, comp)]
        m = int(sub.sum()) // 2
        if size == delta + 1 and m == size * (size - 1) // 2:
            return f"component {comp} is a complete graph K_{size}"
        if delta == 2 and size % 2 == 1 and size >= 3 and m == size and (sub.sum(axis=1) == 2).all():
            return f"component {comp} is an odd cycle C_{size}"
    return f"chromatic number exceeds {delta}"


def proper_coloring(G: DenseGraph, delta: int) -> list[int]:
    """Colour vertices with 0..delta-1 by exact backtracking.

    Vertices are taken in ascending order and each gets the lowest colour
    that still extends to a full colouring, so the result is deterministic.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if G.max_degree > delta:
        raise ColoringInfeasible(f"maximum degree {G.max_degree} exceeds {delta}")
    n = G.n
    colour = [-1] * n
    nbrs = [G.neighbors(v).tolist() for v in range(n)]

    def place(v: int) -> bool:
        if v == n:
            return True
        taken = {colour[w] for w in nbrs[v] if colour[w] >= 0}
        for c in range(delta):
            if c not in taken:
                colour[v] = c
                if place(v + 1):
                    return True
        colour[v] = -1
        return False

    if not place(0):
        raise ColoringInfeasible(f"no proper {delta}-colouring: {_obstruction(G, delta)}")
    return colour


def is_proper(G: DenseGraph, phi: Sequence[int]) -> bool:
    return len(phi) == G.n and all(phi[u] != phi[v] for u, v in G.edges())


@dataclass
class TargetGraph:
    graph: DenseGraph
    delta: int
    phi: list[int]

    @classmethod
    def from_graph(cls, G: DenseGraph, delta: int) -> "TargetGraph":
        return cls(G, delta, proper_coloring(G, delta))

    @property
    def n(self) -> int:
        return self.graph.n


def good_vertex_set(g, A: VertexSet, Y: VertexSet, d, eps) -> VertexSet:
    """Vertices of A with at least (d - eps)|Y| neighbours in Y."""
    adj = g.adj if isinstance(g, DenseGraph) else np.asarray(g, dtype=bool)
    if not A.isdisjoint(Y):
        raise GraphError("good_vertex_set needs disjoint sets")
    thr = as_fraction(d) - as_fraction(eps)
    deg = adj[np.ix_(A.indices, Y.indices)].sum(axis=1).astype(np.int64)
    keep = deg * thr.denominator >= thr.numerator * len(Y)
    return VertexSet(A.indices[keep])


@dataclass
class LedgerRow:
    step: int
    embedded_neighbors: int
    future_neighbors: int
    size: int
    initial: int
    paper_bound: Fraction
    lemma_bound: Fraction
    lemma_applies: bool

    @property
    def paper_holds(self) -> bool:
        return self.size >= self.paper_bound

    @property
    def lemma_holds(self) -> bool:
        return self.size >= self.lemma_bound


@dataclass
class EmbeddingState:
    clusters: list[VertexSet]
    phi: list[int]
    target_sets: list[VertexSet]
    images: list[Optional[int]]
    step: int = 0
    restrictions: list[int] = field(default_factory=list)
    ledger: list[LedgerRow] = field(default_factory=list)

    @property
    def complete(self) -> bool:
        return all(v is not None for v in self.images)


@dataclass
class FailureTrace:
    step: int
    starved: int
    target_sizes: list[int]
    state: EmbeddingState = field(repr=False)


def embed(
    T: TargetGraph,
    g,
    clusters: Sequence[VertexSet],
    eps,
    d_floor,
    *,
    choice: str = "lowest",
    seed: int | None = None,
    certified: bool = False,
) -> EmbeddingState | FailureTrace:
    """Place u_0..u_{n-1} one at a time inside their colour's cluster.

    At each step the image is drawn from the vertices of the current target
    set that keep at least (d_floor - eps) of every future neighbour's target
    set in their neighbourhood; those target sets then shrink to the chosen
    vertex's neighbourhood. A chosen vertex is deleted at once from every
    other target set in its cluster.

    With ``certified=True`` (caller vouches that every cluster pair is
    eps-regular with density >= d_floor) the per-step size bound that
    follows from the good-vertex lemma is asserted:
    (d_floor - eps)^d1 |C| - d2 floor(eps |C|) - (images already in C).
    """
    adj = g.adj if isinstance(g, DenseGraph) else np.asarray(g, dtype=bool)
    G = T.graph
    n = G.n
    phi = list(T.phi)
    if len(phi) != n or not is_proper(G, phi):
        raise EmbeddingStateError("target colouring missing or improper")
    clusters = list(clusters)
    if max(phi, default=-1) >= len(clusters):
        raise GraphError(f"colouring uses {max(phi) + 1} colours but only {len(clusters)} clusters given")
    for a in range(len(clusters)):
        for b in range(a + 1, len(clusters)):
            if not clusters[a].isdisjoint(clusters[b]):
                raise GraphError(f"clusters {a} and {b} overlap")
    eps = as_fraction(eps)
    d_floor = as_fraction(d_floor)
    rng = np.random.default_rng(seed) if choice == "random" else None

    paper_sets = [clusters[phi[i]] for i in range(n)]
    images: list[Optional[int]] = [None] * n
    restrictions = [0] * n
    lemma_ok = [True] * n
    ledger: list[LedgerRow] = []
    nbrs = [set(G.neighbors(v).tolist()) for v in range(n)]

    def state(step: int) -> EmbeddingState:
        targets = [paper_sets[j] if images[j] is None else VertexSet([images[j]]) for j in range(n)]
        return EmbeddingState(clusters, phi, targets, list(images), step, list(restrictions), list(ledger))

    for i in range(n):
        future = sorted(j for j in nbrs[i] if j > i)
        past = sum(1 for j in nbrs[i] if j < i)
        good = paper_sets[i]
        applies = lemma_ok[i]
        c_i = len(clusters[phi[i]])
        for j in future:
            if len(paper_sets[j]) <= eps * len(clusters[phi[j]]):
                applies = False
            good = good & good_vertex_set(adj, paper_sets[i], paper_sets[j], d_floor, eps)

        base = (d_floor - eps) ** past
        paper_bound = (1 - len(future) * eps) * base * c_i
        in_cluster = sum(1 for j in range(i) if phi[j] == phi[i])
        lemma_bound = base * c_i - len(future) * math.floor(eps * c_i) - in_cluster
        row = LedgerRow(i, past, len(future), len(good), c_i, paper_bound, Fraction(lemma_bound), applies)
        ledger.append(row)
        if certified and applies and not row.lemma_holds:
            raise AssertionError(f"step {i}: target set {len(good)} below lemma bound {lemma_bound}")

        candidates = good.indices.tolist()
        if not candidates:
            st = state(i)
            return FailureTrace(i, i, [len(s) for s in st.target_sets], st)
        v = candidates[0] if rng is None else candidates[int(rng.integers(len(candidates)))]
        images[i] = v
        gone = VertexSet([v])
        for j in range(i + 1, n):
            if phi[j] == phi[i]:
                paper_sets[j] = paper_sets[j] - gone
        nv = VertexSet(np.nonzero(adj[v])[0])
        for j in future:
            if not applies:
                lemma_ok[j] = False
            paper_sets[j] = paper_sets[j] & nv
            restrictions[j] += 1
    return state(n)


def verify_embedding(T: TargetGraph, state, g, clusters: Sequence[VertexSet] | None = None) -> bool:
    """Check an embedding from raw adjacency only.

    ``state`` may be an EmbeddingState or a plain list of images.
    """
    adj = g.adj if isinstance(g, DenseGraph) else np.asarray(g, dtype=bool)
    images = state.images if isinstance(state, EmbeddingState) else list(state)
    if clusters is None and isinstance(state, EmbeddingState):
        clusters = state.clusters
    if len(images) != T.n or any(v is None for v in images):
        raise GraphError("embedding is incomplete")
    if len(set(images)) != len(images):
        return False
    if any(not 0 <= v < adj.shape[0] for v in images):
        return False
    if clusters is not None:
        for i, v in enumerate(images):
            if v not in clusters[T.phi[i]]:
                return False
    return all(adj[images[u], images[w]] for u, w in T.graph.edges())


def admissible_epsilon(delta: int, r: int, m: int, eps) -> bool:
    """(1 - delta*eps)(1/r - eps)^delta * m >= 1, exactly."""
    eps = as_fraction(eps)
    return (1 - delta * eps) * (Fraction(1, r) - eps) ** delta * m >= 1
