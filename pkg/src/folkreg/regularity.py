"""Regular-pair testing, the partition index, and the analytic lemmas as checks."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import DenseGraph, GraphError, PartiteHost, VertexSet, as_fraction

EXHAUSTIVE_CAP = 14


class CapacityError(ValueError):
    """Instance too large for an exhaustive routine."""


class Verdict(enum.Enum):
    REGULAR = "R"
    IRREGULAR = "I"
    PROBABLY_REGULAR = "P"


@dataclass(frozen=True)
class PairStats:
    density: Fraction
    verdict: Verdict
    witness: tuple[VertexSet, VertexSet] | None = None
    deviation: Fraction | None = None

    @property
    def irregular(self) -> bool:
        return self.verdict is Verdict.IRREGULAR


@dataclass(frozen=True)
class RegularityParams:
    """Knobs for the refinement loop.

    ``split`` is the number of chunks each class is cut into per practical
    round; ``exhaustive`` selects exact pair checks whenever both sides fit
    under ``exhaustive_cap``, sampled checks otherwise.
    """

    epsilon: Fraction
    m: int = 1
    max_rounds: int = 8
    class_size_floor: int = 1
    mode: str = "practical"
    sample_trials: int = 64
    exhaustive: bool = True
    exhaustive_cap: int = EXHAUSTIVE_CAP
    split: int = 2
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        eps = as_fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not 0 < eps <= Fraction(1, 2):
            raise ValueError(f"epsilon must lie in (0, 1/2], got {eps}")
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.mode not in ("faithful", "practical"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.split < 2:
            raise ValueError("split must be >= 2")


def _check_pair_args(A: VertexSet, B: VertexSet) -> None:
    if not len(A) or not len(B):
        raise GraphError("pair sides must be nonempty")
    if not A.isdisjoint(B):
        raise GraphError("pair sides must be disjoint")


def _adjacency(g) -> np.ndarray:
    return g.adj if isinstance(g, DenseGraph) else np.asarray(g, dtype=bool)


def deviation(adj: np.ndarray, A: VertexSet, B: VertexSet, X: VertexSet, Y: VertexSet) -> Fraction:
    """|d(X, Y) - d(A, B)| from raw adjacency."""
    dab = Fraction(int(adj[np.ix_(A.indices, B.indices)].sum()), len(A) * len(B))
    dxy = Fraction(int(adj[np.ix_(X.indices, Y.indices)].sum()), len(X) * len(Y))
    return abs(dxy - dab)


def is_witness(adj: np.ndarray, A: VertexSet, B: VertexSet, X: VertexSet, Y: VertexSet, eps) -> bool:
    """Independent re-check of an irregularity witness."""
    eps = as_fraction(eps)
    if not (len(X) and len(Y)):
        return False
    if not (set(X) <= set(A) and set(Y) <= set(B)):
        return False
    if not (len(X) > eps * len(A) and len(Y) > eps * len(B)):
        return False
    return deviation(adj, A, B, X, Y) > eps


def check_pair_exhaustive(g, A: VertexSet, B: VertexSet, eps, *, cap: int = EXHAUSTIVE_CAP) -> PairStats:
    """Decide eps-regularity of (A, B) exactly.

    Admissible sub-pairs must strictly exceed the eps-fractions and a witness
    must deviate by strictly more than eps. The witness returned has the
    largest deviation; ties go to the larger sub-pair.
    """
    _check_pair_args(A, B)
    if len(A) > cap or len(B) > cap:
        raise CapacityError(f"exhaustive check capped at {cap} per side, got {len(A)}x{len(B)}")
    eps = as_fraction(eps)
    adj = _adjacency(g)
    sub = adj[np.ix_(A.indices, B.indices)].astype(np.int64)
    a, b = sub.shape
    E = int(sub.sum())
    d = Fraction(E, a * b)
    D = math.lcm(*range(1, a + 1)) * math.lcm(*range(1, b + 1))
    found, _, xmask, t, side = _kernels.gray_scan(sub, E, D, eps.numerator, eps.denominator)
    if not found:
        return PairStats(d, Verdict.REGULAR)
    xmask, t, side = int(xmask), int(t), int(side)
    xloc = np.array([i for i in range(a) if (xmask >> i) & 1], dtype=np.int64)
    counts = sub[xloc].sum(axis=0)
    order = np.argsort(-counts if side == 0 else counts, kind="stable")[:t]
    X = VertexSet(A.indices[xloc])
    Y = VertexSet(B.indices[np.sort(order)])
    return PairStats(d, Verdict.IRREGULAR, (X, Y), deviation(adj, A, B, X, Y))


def _split_by_degree(sub: np.ndarray, cols: np.ndarray, E: int, a: int, b: int, eps: Fraction):
    """Rows of ``sub`` whose degree into ``cols`` is far above / below d(A, B)."""
    t = cols.size
    deg = sub[:, cols].sum(axis=1)
    # deg/t - E/(ab) compared against +-eps, cleared of denominators
    lhs = (deg * a * b - E * t) * eps.denominator
    bound = eps.numerator * a * b * t
    return np.nonzero(lhs > bound)[0], np.nonzero(lhs < -bound)[0]


def check_pair_sampled(g, A: VertexSet, B: VertexSet, eps, trials: int = 64, seed: int = 0) -> PairStats:
    """One-sided randomized regularity test.

    Candidates are degree splits against the whole opposite side,
    neighbourhood splits around random pivots, and random admissible
    sub-pairs. Every candidate is re-checked exactly, so an Irregular
    verdict always carries a genuine witness; otherwise the pair is only
    ProbablyRegular.
    """
    _check_pair_args(A, B)
    eps = as_fraction(eps)
    adj = _adjacency(g)
    sub = adj[np.ix_(A.indices, B.indices)].astype(np.int64)
    a, b = sub.shape
    E = int(sub.sum())
    d = Fraction(E, a * b)
    smin = math.floor(eps * a) + 1
    tmin = math.floor(eps * b) + 1
    rng = np.random.default_rng(seed)

    best = None  # (deviation, area, xloc, yloc)

    def consider(xloc: np.ndarray, yloc: np.ndarray) -> None:
        nonlocal best
        s, t = xloc.size, yloc.size
        if s < smin or t < tmin:
            return
        dev = abs(Fraction(int(sub[np.ix_(xloc, yloc)].sum()), s * t) - d)
        if dev <= eps:
            return
        if best is None or (dev, s * t) > (best[0], best[1]):
            best = (dev, s * t, np.sort(xloc), np.sort(yloc))

    all_a = np.arange(a)
    all_b = np.arange(b)
    for rows in _split_by_degree(sub, all_b, E, a, b, eps):
        consider(rows, all_b)
    for cols in _split_by_degree(sub.T, all_a, E, a, b, eps):
        consider(all_a, cols)

    for trial in range(trials):
        if trial % 2 == 0:
            # neighbourhood split around a pivot on either side
            if rng.integers(2) == 0:
                v = rng.integers(a)
                nb = np.nonzero(sub[v])[0]
                for cols in (nb, np.setdiff1d(all_b, nb)):
                    if cols.size >= tmin:
                        for rows in _split_by_degree(sub, cols, E, a, b, eps):
                            consider(rows, cols)
            else:
                v = rng.integers(b)
                nb = np.nonzero(sub[:, v])[0]
                for rows in (nb, np.setdiff1d(all_a, nb)):
                    if rows.size >= smin:
                        for cols in _split_by_degree(sub.T, rows, E, a, b, eps):
                            consider(rows, cols)
        else:
            s = int(rng.integers(smin, a + 1))
            t = int(rng.integers(tmin, b + 1))
            consider(rng.choice(a, size=s, replace=False), rng.choice(b, size=t, replace=False))

    if best is None:
        return PairStats(d, Verdict.PROBABLY_REGULAR)
    X = VertexSet(A.indices[best[2]])
    Y = VertexSet(B.indices[best[3]])
    return PairStats(d, Verdict.IRREGULAR, (X, Y), best[0])


def check_pair(g, A: VertexSet, B: VertexSet, eps, *, exhaustive: bool = True, cap: int = EXHAUSTIVE_CAP, trials: int = 64, seed: int = 0) -> PairStats:
    """Exhaustive when allowed and small enough, sampled otherwise."""
    if exhaustive and len(A) <= cap and len(B) <= cap:
        return check_pair_exhaustive(g, A, B, eps, cap=cap)
    return check_pair_sampled(g, A, B, eps, trials=trials, seed=seed)


# --------------------------------------------------------------------------
# index
# --------------------------------------------------------------------------


def _labels(host: PartiteHost, P) -> tuple[np.ndarray, np.ndarray, int]:
    """Global class label per vertex (-1 for exceptional) and class sizes."""
    labels = np.full(host.n, -1, dtype=np.int64)
    sizes = []
    g = 0
    for s in range(host.p):
        for cls in P.classes[s]:
            labels[cls.indices] = g
            sizes.append(len(cls))
            g += 1
    return labels, np.array(sizes, dtype=np.int64), g


def class_pair_counts(adj: np.ndarray, labels: np.ndarray, nclass: int) -> np.ndarray:
    return np.asarray(_kernels.class_pair_counts(np.ascontiguousarray(adj, dtype=np.bool_), labels, nclass))


def _color_adjacencies(host: PartiteHost, color) -> list[np.ndarray]:
    if color is None:
        if host.colors is None:
            return [host.graph.adj]
        return [host.color_adjacency(c) for c in range(host.r)]
    return [host.color_adjacency(int(color))]


def index(host: PartiteHost, P, color: int | None = None) -> Fraction:
    """Mean squared density over cross-part class pairs, scaled by 1/k^2.

    With ``color=None`` on a coloured host the per-colour indices are
    summed; on an uncoloured host the host graph itself is used.
    Exceptional classes do not contribute.
    """
    if not P.is_equitable():
        raise GraphError("index needs an equitable partition")
    labels, sizes, nclass = _labels(host, P)
    part_of_class = np.repeat(np.arange(host.p), [len(P.classes[s]) for s in range(host.p)])
    cross = np.triu(part_of_class[:, None] < part_of_class[None, :])
    total = Fraction(0)
    for adj in _color_adjacencies(host, color):
        counts = class_pair_counts(adj, labels, nclass)
        total += _sum_sq_density(counts, sizes, cross)
    return total / (P.k * P.k)


def _sum_sq_density(counts: np.ndarray, sizes: np.ndarray, cross: np.ndarray) -> Fraction:
    # exact: group pairs by their (|X|, |Y|) so each group shares a denominator
    area = sizes[:, None] * sizes[None, :]
    sq = counts.astype(object) ** 2
    out = Fraction(0)
    for val in np.unique(area[cross]):
        sel = cross & (area == val)
        out += Fraction(int(sq[sel].sum()), int(val) * int(val))
    return out


# --------------------------------------------------------------------------
# analytic lemmas as executable checks
# --------------------------------------------------------------------------


def defect_cauchy_schwarz_check(d: Sequence, t: int, delta) -> bool:
    """Check mean(d^2) >= mean(d)^2 + t*delta^2/(s-t).

    ``delta`` must equal mean(d) - mean(d[:t]) to within 1e-12; the exact
    implied value is then used so that float inputs do not break equality
    cases.
    """
    vals = [as_fraction(x) for x in d]
    s = len(vals)
    if not s > t >= 1:
        raise ValueError(f"need len(d) > t >= 1, got len={s}, t={t}")
    mean = sum(vals, Fraction(0)) / s
    implied = mean - sum(vals[:t], Fraction(0)) / t
    if abs(implied - as_fraction(delta)) > Fraction(1, 10**12):
        raise ValueError(f"delta {delta} inconsistent with data (implied {implied})")
    lhs = sum((x * x for x in vals), Fraction(0)) / s
    rhs = mean * mean + t * implied * implied / (s - t)
    return lhs >= rhs


def le_cont_check(g, X: VertexSet, Y: VertexSet, Xs: VertexSet, Ys: VertexSet, delta) -> tuple[bool, bool]:
    """Density continuity under removal of a small fraction.

    For X' in X, Y' in Y with |X'| > (1-delta)|X| and |Y'| > (1-delta)|Y|,
    returns whether |d' - d| < 2 delta and |d'^2 - d^2| < 4 delta.
    """
    delta = as_fraction(delta)
    if not (len(Xs) > (1 - delta) * len(X) and len(Ys) > (1 - delta) * len(Y)):
        raise ValueError("subsets too small for the continuity bound")
    adj = _adjacency(g)
    d = Fraction(int(adj[np.ix_(X.indices, Y.indices)].sum()), len(X) * len(Y))
    ds = Fraction(int(adj[np.ix_(Xs.indices, Ys.indices)].sum()), len(Xs) * len(Ys))
    return abs(ds - d) < 2 * delta, abs(ds * ds - d * d) < 4 * delta
