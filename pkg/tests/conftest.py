import itertools
from fractions import Fraction

import numpy as np
import pytest

from folkreg.graph import DenseGraph, PartiteHost, VertexSet


def block_host() -> PartiteHost:
    """8x8 bipartite host with two perfect 4x4 blocks and nothing else."""
    edges = [(u, 8 + v) for u in range(8) for v in range(8) if u // 4 == v // 4]
    g = DenseGraph(16, edges)
    colors = np.where(g.adj, 0, -1).astype(np.int8)
    return PartiteHost([8, 8], g, colors, 1)


def random_bipartite(a: int, b: int, density: float, seed: int) -> tuple[DenseGraph, VertexSet, VertexSet]:
    rng = np.random.default_rng(seed)
    edges = [(u, a + v) for u in range(a) for v in range(b) if rng.random() < density]
    return DenseGraph(a + b, edges), VertexSet(range(a)), VertexSet(range(a, a + b))


def brute_regular(adj: np.ndarray, A, B, eps: Fraction) -> tuple[bool, Fraction]:
    """Naive oracle: enumerate every admissible sub-pair. Returns (regular, max deviation)."""
    A, B = list(A), list(B)
    d = Fraction(int(adj[np.ix_(A, B)].sum()), len(A) * len(B))
    best = Fraction(0)
    for x in range(1, len(A) + 1):
        if not x > eps * len(A):
            continue
        for X in itertools.combinations(A, x):
            for y in range(1, len(B) + 1):
                if not y > eps * len(B):
                    continue
                for Y in itertools.combinations(B, y):
                    dev = abs(Fraction(int(adj[np.ix_(X, Y)].sum()), x * y) - d)
                    best = max(best, dev)
    return best <= eps, best


@pytest.fixture
def block():
    return block_host()
