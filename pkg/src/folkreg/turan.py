"""Transversal cliques in multipartite cluster graphs and the K_p-free edge bound."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Optional

import numpy as np

from . import _kernels
from .regularity import CapacityError

Node = tuple[int, int]  # (part, class), classes numbered from 1
ORACLE_EDGE_CAP = 24


@dataclass
class ReducedGraph:
    """Cluster graph on p parts of k nodes each.

    ``labels[(u, v)]`` (with u < v in node order) holds per-colour densities
    and the regular flag for every edge present.
    """

    p: int
    k: int
    labels: dict[tuple[Node, Node], dict] = field(default_factory=dict)

    def nodes(self, part: int) -> list[Node]:
        return [(part, i) for i in range(1, self.k + 1)]

    def add_edge(self, u: Node, v: Node, densities=(), regular: bool = True) -> None:
        if u[0] == v[0]:
            raise ValueError(f"edge {u}-{v} inside a part")
        key = (u, v) if u < v else (v, u)
        self.labels[key] = {"densities": tuple(densities), "regular": regular}

    def has_edge(self, u: Node, v: Node) -> bool:
        return ((u, v) if u < v else (v, u)) in self.labels

    def label(self, u: Node, v: Node) -> dict:
        return self.labels[(u, v) if u < v else (v, u)]

    @property
    def edge_count(self) -> int:
        return len(self.labels)

    def edges(self) -> list[tuple[Node, Node]]:
        return sorted(self.labels)


def turan_bound(p: int, k: int) -> int:
    """Most edges in a K_p-free subgraph of K_p(k): (C(p,2) - 1) k^2."""
    if p < 2 or k < 1:
        raise ValueError("need p >= 2 and k >= 1")
    return (math.comb(p, 2) - 1) * k * k


def _kp_edges(p: int, k: int) -> list[tuple[Node, Node]]:
    return [
        ((s, i), (t, j))
        for s, t in itertools.combinations(range(p), 2)
        for i in range(1, k + 1)
        for j in range(1, k + 1)
    ]


def max_kp_free_oracle(p: int, k: int) -> int:
    """Exact maximum size of a K_p-free edge subset of K_p(k), by search.

    Branch and bound over edges: a branch dies as soon as an included edge
    completes a transversal K_p, or when even taking every remaining edge
    cannot beat the best found.
    """
    if p < 2 or k < 1:
        raise ValueError("need p >= 2 and k >= 1")
    edges = _kp_edges(p, k)
    if len(edges) > ORACLE_EDGE_CAP:
        raise CapacityError(f"K_{p}({k}) has {len(edges)} edges; oracle cap is {ORACLE_EDGE_CAP}")
    eid = {e: x for x, e in enumerate(edges)}
    by_edge: list[list[int]] = [[] for _ in edges]
    n_cliques = 0
    for choice in itertools.product(range(1, k + 1), repeat=p):
        nodes = [(s, choice[s]) for s in range(p)]
        for u, v in itertools.combinations(nodes, 2):
            by_edge[eid[(u, v)]].append(n_cliques)
        n_cliques += 1
    ptr = np.zeros(len(edges) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(b) for b in by_edge])
    idx = np.array([q for b in by_edge for q in b], dtype=np.int64)
    return int(_kernels.kp_free_max(len(edges), math.comb(p, 2), n_cliques, ptr, idx))


def complete_reduced_graph(p: int, k: int) -> ReducedGraph:
    F = ReducedGraph(p, k)
    for u, v in _kp_edges(p, k):
        F.add_edge(u, v)
    return F


def extremal_construction(p: int, k: int) -> ReducedGraph:
    """K_p(k) with every edge between parts 0 and 1 removed."""
    if p < 2 or k < 1:
        raise ValueError("need p >= 2 and k >= 1")
    F = ReducedGraph(p, k)
    for u, v in _kp_edges(p, k):
        if {u[0], v[0]} != {0, 1}:
            F.add_edge(u, v)
    return F


EdgeFilter = Callable[[Node, Node, dict], bool]


def iter_cluster_cliques(F: ReducedGraph, edge_filter: Optional[EdgeFilter] = None) -> Iterator[list[Node]]:
    """All transversal cliques, one node per part, in lexicographic order."""
    def ok(u, v):
        if not F.has_edge(u, v):
            return False
        return edge_filter is None or edge_filter(u, v, F.label(u, v))

    chosen: list[Node] = []

    def extend(part: int):
        if part == F.p:
            yield list(chosen)
            return
        for node in F.nodes(part):
            if all(ok(c, node) for c in chosen):
                chosen.append(node)
                yield from extend(part + 1)
                chosen.pop()

    yield from extend(0)


def find_cluster_clique(F: ReducedGraph, edge_filter: Optional[EdgeFilter] = None) -> Optional[list[Node]]:
    """First transversal clique in ascending node order, or None."""
    return next(iter_cluster_cliques(F, edge_filter), None)


def has_transversal_clique(F: ReducedGraph) -> bool:
    return find_cluster_clique(F) is not None
