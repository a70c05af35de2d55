"""Equitable partitions of multipartite hosts and energy-increment refinement."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable

import numpy as np

from .graph import GraphError, PartiteHost, VertexSet
from .regularity import RegularityParams, check_pair, index

log = logging.getLogger(__name__)

PairKey = tuple  # (s, i, t, j, color) with s < t, classes numbered from 1


class PreconditionError(ValueError):
    """Faithful-mode refinement called outside its proven regime."""


class RefinementStalled(RuntimeError):
    """No refinement with a larger class count keeps the index from dropping."""


class MissingStats(RuntimeError):
    """A pair verdict needed by refinement or reduction was not supplied."""


@dataclass(frozen=True)
class Partition:
    """Per-part class lists plus an optional exceptional class per part.

    ``classes[s][i - 1]`` is class i of part s. Style ``"exc"`` carries
    exceptional classes and equal class sizes within a part; ``"near"`` has
    no exceptional class and sizes within a part differ by at most one.
    """

    classes: tuple[tuple[VertexSet, ...], ...]
    exceptional: tuple[VertexSet, ...] | None
    style: str = "exc"

    def __post_init__(self):
        if self.style not in ("exc", "near"):
            raise ValueError(f"unknown partition style {self.style!r}")
        ks = {len(c) for c in self.classes}
        if len(ks) != 1:
            raise GraphError(f"class count differs between parts: {sorted(ks)}")
        if self.style == "near" and self.exceptional is not None:
            raise GraphError("near-equitable partitions have no exceptional class")
        if self.style == "exc" and self.exceptional is None:
            object.__setattr__(self, "exceptional", tuple(VertexSet() for _ in self.classes))

    @property
    def p(self) -> int:
        return len(self.classes)

    @property
    def k(self) -> int:
        return len(self.classes[0])

    def class_sizes(self, s: int) -> list[int]:
        return [len(c) for c in self.classes[s]]

    def exceptional_size(self, s: int) -> int:
        return len(self.exceptional[s]) if self.exceptional is not None else 0

    def is_equitable(self) -> bool:
        for s in range(self.p):
            sizes = self.class_sizes(s)
            if self.style == "exc" and len(set(sizes)) > 1:
                return False
            if self.style == "near" and max(sizes) - min(sizes) > 1:
                return False
        return True

    def validate(self, host: PartiteHost) -> None:
        """Raise unless classes are disjoint, cover each part, and are equitable."""
        if self.p != host.p:
            raise GraphError(f"partition has {self.p} parts, host has {host.p}")
        for s in range(self.p):
            pieces = list(self.classes[s])
            if self.exceptional is not None:
                pieces.append(self.exceptional[s])
            allv = np.concatenate([c.indices for c in pieces]) if pieces else np.array([], dtype=np.int64)
            if allv.size != np.unique(allv).size:
                raise GraphError(f"classes overlap in part {s}")
            if not np.array_equal(np.sort(allv), np.arange(host.offsets[s], host.offsets[s + 1])):
                raise GraphError(f"classes do not cover part {s}")
            if any(len(c) == 0 for c in self.classes[s]):
                raise GraphError(f"empty class in part {s}")
        if not self.is_equitable():
            raise GraphError("partition is not equitable")

    def pair_keys(self) -> Iterable[tuple[int, int, int, int]]:
        for s in range(self.p):
            for t in range(s + 1, self.p):
                for i in range(1, self.k + 1):
                    for j in range(1, self.k + 1):
                        yield s, i, t, j

    def cls(self, s: int, i: int) -> VertexSet:
        return self.classes[s][i - 1] if i else self.exceptional[s]


@dataclass
class RoundRow:
    k_before: int
    k_after: int
    q_before: Fraction
    q_after: Fraction
    irregular_pairs: int
    regular: bool
    strategy: str = ""


@dataclass
class RefinementReport:
    rounds: int = 0
    q_history: list[Fraction] = field(default_factory=list)
    q_history_per_color: list[list[Fraction]] = field(default_factory=list)
    irregular_pair_count: list[int] = field(default_factory=list)
    k_history: list[int] = field(default_factory=list)
    final_k: int = 0
    regular: bool = False
    stop_reason: str = ""
    final_stats: dict | None = field(default=None, repr=False)


def resolve_colors(host: PartiteHost, colors) -> list:
    if colors is None:
        return list(range(host.r)) if host.colors is not None else [None]
    return list(colors)


def _adj_for(host: PartiteHost, color) -> np.ndarray:
    return host.graph.adj if color is None else host.color_adjacency(color)


def initial_partition(host: PartiteHost, m: int) -> Partition:
    """m equal classes per part in input order, the remainder exceptional."""
    if m < 1:
        raise GraphError("m must be >= 1")
    classes, exc = [], []
    for s in range(host.p):
        size = host.part_sizes[s]
        if size < m:
            raise GraphError(f"part {s} has {size} vertices, fewer than m={m}")
        c = size // m
        start = host.offsets[s]
        classes.append(tuple(VertexSet.from_range(start + i * c, start + (i + 1) * c) for i in range(m)))
        exc.append(VertexSet.from_range(start + m * c, start + size))
    return Partition(tuple(classes), tuple(exc), "exc")


def compute_verdicts(host: PartiteHost, P: Partition, params: RegularityParams, colors=None, salt: int = 0) -> dict:
    """PairStats for every cross pair of classes and every colour."""
    colors = resolve_colors(host, colors)
    adjs = {c: _adj_for(host, c) for c in colors}
    jobs = [(s, i, t, j, c) for (s, i, t, j) in P.pair_keys() for c in colors]

    def run(key):
        s, i, t, j, c = key
        seed = [params.seed, salt, s, i, t, j, -1 if c is None else c]
        return check_pair(
            adjs[c], P.cls(s, i), P.cls(t, j), params.epsilon,
            exhaustive=params.exhaustive, cap=params.exhaustive_cap,
            trials=params.sample_trials, seed=seed,
        )

    if params.threads > 1:
        with ThreadPoolExecutor(params.threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(key) for key in jobs]
    return dict(zip(jobs, results))


def multicolor_index(host: PartiteHost, P: Partition, colors) -> tuple[Fraction, list[Fraction]]:
    per = [index(host, P, c) for c in resolve_colors(host, colors)]
    return sum(per, Fraction(0)), per


def _atoms(cls: VertexSet, cutting: list[VertexSet]) -> list[np.ndarray]:
    """Cells of ``cls`` under membership in each cutting set, ordered by least vertex."""
    verts = cls.indices
    if not cutting:
        return [verts]
    sig = np.stack([np.isin(verts, w.indices) for w in cutting], axis=1)
    _, inverse = np.unique(sig, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    groups: dict[int, list[int]] = {}
    for v, g in zip(verts.tolist(), inverse.tolist()):
        groups.setdefault(g, []).append(v)
    return sorted((np.array(g, dtype=np.int64) for g in groups.values()), key=lambda a: int(a[0]))


def _chunks_atomwise(atoms: list[np.ndarray], d: int) -> list[np.ndarray]:
    out = []
    for atom in atoms:
        for h in range(atom.size // d):
            out.append(atom[h * d:(h + 1) * d])
    return out


def _cut(host: PartiteHost, P: Partition, atoms, strategy: str, h: int | None, faithful_k: int | None = None, floor: int = 1):
    """Cut every class into equal chunks; return (classes, exceptional) or None."""
    classes, exceptional = [], []
    for s in range(P.p):
        c = len(P.classes[s][0])
        if faithful_k is not None:
            d = c // 4 ** faithful_k
            if d < 1:
                return None
        elif strategy == "atoms":
            d = 0
            for cand in range(c // h, max(floor, 1) - 1, -1):
                if all(sum(a.size // cand for a in atoms[s][i]) >= h for i in range(P.k)):
                    d = cand
                    break
            if d == 0:
                return None
        else:
            d = c // h
            if d < max(floor, 1):
                return None
        new_cls, bin_ = [], [P.exceptional[s].indices]
        for i in range(P.k):
            if strategy == "atoms":
                pieces = _chunks_atomwise(atoms[s][i], d)
            else:
                flat = np.concatenate(atoms[s][i])
                pieces = [flat[x * d:(x + 1) * d] for x in range(flat.size // d)]
            if len(pieces) < h:
                raise PreconditionError(
                    f"part {s} class {i + 1}: only {len(pieces)} chunks of size {d}, need {h}"
                )
            kept = pieces[:h]
            new_cls.extend(VertexSet(x) for x in kept)
            used = np.concatenate(kept)
            bin_.append(np.setdiff1d(P.classes[s][i].indices, used))
        classes.append(tuple(new_cls))
        exceptional.append(VertexSet(np.concatenate(bin_)))
    return tuple(classes), tuple(exceptional)


def refine_step(host: PartiteHost, P: Partition, params: RegularityParams, colors=None, stats: dict | None = None):
    """One refinement round driven by the irregularity witnesses in ``stats``.

    Returns ``(P', RoundRow)``. ``P'`` is ``P`` itself when no pair is
    irregular. Raises RefinementStalled when no candidate cut keeps the
    index from decreasing.
    """
    if P.style != "exc":
        raise GraphError("refine_step needs a partition with exceptional classes")
    colors = resolve_colors(host, colors)
    if stats is None:
        raise MissingStats("refine_step needs pair verdicts")
    for s, i, t, j in P.pair_keys():
        for c in colors:
            if (s, i, t, j, c) not in stats:
                raise MissingStats(f"no verdict for pair {(s, i, t, j)} colour {c}")

    q_before, _ = multicolor_index(host, P, colors)
    irregular = [(key, st) for key, st in stats.items() if key[4] in colors and st.irregular]
    if not irregular:
        return P, RoundRow(P.k, P.k, q_before, q_before, 0, True, "none")

    cutting = [[[] for _ in range(P.k)] for _ in range(P.p)]
    for (s, i, t, j, _c), st in irregular:
        X, Y = st.witness
        cutting[s][i - 1].append(X)
        cutting[t][j - 1].append(Y)
    atoms = [[_atoms(P.classes[s][i], cutting[s][i]) for i in range(P.k)] for s in range(P.p)]

    if params.mode == "faithful":
        return _refine_faithful(host, P, params, colors, atoms, q_before, len(irregular))

    candidates = []
    for strategy in ("atoms", "span"):
        cut = _cut(host, P, atoms, strategy, params.split, floor=params.class_size_floor)
        if cut is None:
            continue
        Q = Partition(cut[0], cut[1], "exc")
        q_after, _ = multicolor_index(host, Q, colors)
        if q_after < q_before - Fraction(1, 10**12):
            log.debug("strategy %s lowers q (%s -> %s)", strategy, q_before, q_after)
            continue
        exc_ok = all(Q.exceptional_size(s) <= params.epsilon * host.part_sizes[s] for s in range(P.p))
        candidates.append((exc_ok, q_after, strategy == "atoms", strategy, Q))
    if not candidates:
        raise RefinementStalled(f"no admissible refinement of k={P.k} with split {params.split}")
    candidates.sort(key=lambda x: (x[0], x[1], x[2]), reverse=True)
    _, q_after, _, strategy, Q = candidates[0]
    assert all(Q.exceptional[s].indices.size >= P.exceptional[s].indices.size for s in range(P.p))
    return Q, RoundRow(P.k, Q.k, q_before, q_after, len(irregular), False, strategy)


def faithful_applicable(P: Partition, epsilon: Fraction) -> tuple[bool, bool]:
    """(size precondition holds, increment precondition holds) for faithful mode."""
    k = P.k
    sizes_ok = all(len(P.classes[s][0]) >= 2 ** (3 * k) for s in range(P.p))
    increment_ok = Fraction(2**k) >= 16 / epsilon**5
    return sizes_ok, increment_ok


def _refine_faithful(host, P, params, colors, atoms, q_before, n_irregular):
    k = P.k
    sizes_ok, increment_ok = faithful_applicable(P, params.epsilon)
    if not sizes_ok:
        raise PreconditionError(
            f"faithful refinement needs class sizes >= 2^(3k) = {2 ** (3 * k)} for k={k}; "
            f"got {[len(P.classes[s][0]) for s in range(P.p)]}"
        )
    H = 4**k - 2**k
    cut = _cut(host, P, atoms, "atoms", H, faithful_k=k)
    if cut is None:
        raise PreconditionError("chunk size floor(c / 4^k) is zero")
    Q = Partition(cut[0], cut[1], "exc")
    for s in range(P.p):
        growth = Q.exceptional_size(s) - P.exceptional_size(s)
        if growth * 2 ** (k - 1) > host.part_sizes[s]:
            raise AssertionError(f"exceptional growth {growth} in part {s} exceeds n/2^(k-1)")
    q_after, _ = multicolor_index(host, Q, colors)
    if increment_ok and len(colors) == 1:
        if q_after < q_before + params.epsilon**5 / 4:
            raise AssertionError(f"index increment below eps^5/4: {q_before} -> {q_after}")
    elif q_after < q_before - Fraction(1, 10**12):
        raise RefinementStalled(f"faithful cut lowered q from {q_before} to {q_after}")
    return Q, RoundRow(k, Q.k, q_before, q_after, n_irregular, False, "faithful")


def irregular_threshold(P: Partition, epsilon: Fraction, ncolors: int) -> Fraction:
    """Allowed number of (pair, colour) irregularities: eps k^2 C(p,2) per colour."""
    return epsilon * P.k**2 * math.comb(P.p, 2) * ncolors


def iterate_to_regular(host: PartiteHost, params: RegularityParams, colors=None):
    """Refine until few enough pairs are irregular in any colour.

    One partition serves every colour; witnesses from all colours are
    pooled when cutting. Returns ``(partition, report)``; running out of
    rounds or stalling gives ``report.regular == False`` rather than an
    exception.
    """
    colors = resolve_colors(host, colors)
    for s, size in enumerate(host.part_sizes):
        if size < max(params.class_size_floor, params.m):
            raise GraphError(f"part {s} has {size} vertices, below the floor")
    P = initial_partition(host, params.m)
    report = RefinementReport()
    for rnd in range(params.max_rounds + 1):
        stats = compute_verdicts(host, P, params, colors, salt=rnd)
        q, per = multicolor_index(host, P, colors)
        bad = sum(1 for st in stats.values() if st.irregular)
        report.q_history.append(q)
        report.q_history_per_color.append(per)
        report.irregular_pair_count.append(bad)
        report.k_history.append(P.k)
        report.final_stats = stats
        if bad <= irregular_threshold(P, params.epsilon, len(colors)):
            report.regular = True
            report.stop_reason = "regular"
            break
        if rnd == params.max_rounds:
            report.stop_reason = "max_rounds"
            break
        try:
            Q, row = refine_step(host, P, params, colors, stats)
        except (RefinementStalled, PreconditionError) as exc:
            report.stop_reason = f"stalled: {exc}"
            break
        log.info("round %d: k %d -> %d, q %s -> %s, irregular %d", rnd, row.k_before, row.k_after, row.q_before, row.q_after, bad)
        P = Q
        report.rounds += 1
    report.final_k = P.k
    return P, report


def absorb_exceptional(P: Partition) -> Partition:
    """Deal each exceptional class round-robin onto its part's classes."""
    if P.style != "exc":
        raise GraphError("absorb_exceptional needs a partition with exceptional classes")
    classes = []
    for s in range(P.p):
        extra = [[] for _ in range(P.k)]
        for x, v in enumerate(P.exceptional[s].indices.tolist()):
            extra[x % P.k].append(v)
        classes.append(tuple(
            VertexSet(np.concatenate([c.indices, np.array(e, dtype=np.int64)])) for c, e in zip(P.classes[s], extra)
        ))
    return Partition(tuple(classes), None, "near")


def with_epsilon(params: RegularityParams, epsilon) -> RegularityParams:
    return replace(params, epsilon=epsilon)
