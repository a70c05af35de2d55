"""End-to-end pipeline: regular partition -> cluster clique -> colour step -> embedding."""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .embedding import (
    ColoringInfeasible,
    EmbeddingState,
    FailureTrace,
    TargetGraph,
    embed,
    proper_coloring,
    verify_embedding,
)
from .graph import DenseGraph, GraphError, PartiteHost, VertexSet, as_fraction, random_bounded_degree_graph
from .partition import (
    MissingStats,
    Partition,
    RefinementReport,
    absorb_exceptional,
    compute_verdicts,
    iterate_to_regular,
    multicolor_index,
    resolve_colors,
)
from .regularity import RegularityParams
from .turan import Node, ReducedGraph, iter_cluster_cliques

# R_r(K_s) values small enough to be useful here, keyed by (r, s)
KNOWN_RAMSEY = {(1, 3): 3, (2, 3): 6, (2, 4): 18, (3, 3): 17}


class NoMonochromaticClique(LookupError):
    """The pair colouring of the cluster clique has no monochromatic K_delta."""

    def __init__(self, msg: str, pair_colors: dict):
        super().__init__(msg)
        self.pair_colors = pair_colors


class InfeasibleEpsilon(ValueError):
    pass


def feasible_epsilon(delta: int, r: int, m: int, p: int | None = None) -> Fraction:
    """Largest eps = 2^-j (j = 1..20) with (1 - delta eps)(1/r - eps)^delta m >= 1.

    When ``p`` is given eps is also capped at min(1/p^2, 1/m).
    """
    if delta < 3 or r < 2 or m < 1:
        raise ValueError("need delta >= 3, r >= 2, m >= 1")
    cap = min(Fraction(1, p * p), Fraction(1, m)) if p is not None else None
    for j in range(1, 21):
        eps = Fraction(1, 2**j)
        if cap is not None and eps > cap:
            continue
        if (1 - delta * eps) * (Fraction(1, r) - eps) ** delta * m >= 1:
            return eps
    raise InfeasibleEpsilon(
        f"no eps in 2^-1..2^-20 satisfies the size condition for delta={delta}, r={r}, m={m}; "
        f"m must exceed r^delta = {r**delta}"
    )


def random_target(n: int, delta: int, seed: int, *, tries: int = 100) -> DenseGraph:
    """Random max-degree-``delta`` graph that is properly ``delta``-colourable.

    Draws come from seeds (seed, 0), (seed, 1), ... until one has no
    K_{delta+1} component (or odd cycle when delta = 2).
    """
    for x in range(tries):
        G = random_bounded_degree_graph(n, delta, [seed, x])
        try:
            proper_coloring(G, delta)
        except ColoringInfeasible:
            continue
        return G
    raise ColoringInfeasible(f"no {delta}-colourable draw in {tries} tries")


def reduced_graph(host: PartiteHost, P: Partition, stats: dict, colors=None) -> ReducedGraph:
    """Cluster graph whose edges are the pairs not irregular in any colour.

    Edges carry the per-colour densities taken from ``stats``.
    """
    colors = resolve_colors(host, colors)
    F = ReducedGraph(P.p, P.k)
    for s, i, t, j in P.pair_keys():
        per = []
        for c in colors:
            st = stats.get((s, i, t, j, c))
            if st is None:
                raise MissingStats(f"no verdict for pair {(s, i, t, j)} colour {c}")
            per.append(st)
        if not any(st.irregular for st in per):
            F.add_edge((s, i), (t, j), [st.density for st in per], True)
    return F


def mono_clique(pair_colors: dict, nodes: Sequence, size: int, r: int) -> Optional[tuple[int, tuple]]:
    """Lexicographically first monochromatic ``size``-subset, lowest colour first."""
    for combo in itertools.combinations(range(len(nodes)), size):
        for a in range(r):
            if all(pair_colors[(nodes[x], nodes[y])] == a for x, y in itertools.combinations(combo, 2)):
                return a, tuple(nodes[x] for x in combo)
    return None


def density_color_clique(clique: Sequence[Node], densities: dict, delta: int, r: int) -> tuple[int, list[Node]]:
    """Colour each clique pair by the lowest colour of density >= 1/r, then find a mono K_delta.

    ``densities[(u, v)]`` (u before v in ``clique``) lists the pair's density
    in every colour.
    """
    clique = list(clique)
    if r == 1:
        return 0, clique[:delta]
    pair_colors = {}
    thr = Fraction(1, r)
    for x, y in itertools.combinations(range(len(clique)), 2):
        u, v = clique[x], clique[y]
        ds = densities[(u, v)]
        col = next((a for a in range(r) if ds[a] >= thr), None)
        if col is None:
            raise GraphError(f"pair {u}-{v} has no colour of density >= 1/{r}: {ds}")
        pair_colors[(u, v)] = pair_colors[(v, u)] = col
    found = mono_clique(pair_colors, clique, delta, r)
    if found is None:
        raise NoMonochromaticClique(f"no monochromatic K_{delta} among {len(clique)} clusters", pair_colors)
    a, nodes = found
    return a, list(nodes)


@dataclass
class PipelineConfig:
    delta: int = 3
    r: int = 2
    p: int = 6
    epsilon: Fraction = Fraction(1, 10)
    m: int = 2
    part_size: int = 48
    mode: str = "practical"
    exhaustive: bool = True
    sample_trials: int = 64
    max_rounds: int = 6
    clique_retries: int = 3
    paper_strict: bool = False
    class_size_floor: int = 1
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        self.epsilon = as_fraction(self.epsilon)
        if self.delta < 1 or self.r < 1 or self.p < 2 or self.m < 1:
            raise ValueError("delta, r, m must be positive and p >= 2")
        if self.paper_strict and self.epsilon > min(Fraction(1, self.p**2), Fraction(1, self.m)):
            raise ValueError(f"paper-strict run needs epsilon <= min(1/p^2, 1/m), got {self.epsilon}")

    def regularity_params(self) -> RegularityParams:
        return RegularityParams(
            epsilon=self.epsilon, m=self.m, max_rounds=self.max_rounds,
            class_size_floor=self.class_size_floor, mode=self.mode,
            sample_trials=self.sample_trials, exhaustive=self.exhaustive,
            seed=self.seed, threads=self.threads,
        )


@dataclass
class Stage:
    name: str
    ok: bool
    ms: int
    message: str = ""


@dataclass
class PipelineReport:
    config: PipelineConfig
    target: DenseGraph
    stages: list[Stage] = field(default_factory=list)
    refinement: Optional[RefinementReport] = None
    partition: Optional[Partition] = None
    absorbed: Optional[Partition] = None
    absorbed_q: Fraction = Fraction(0)
    reduced: Optional[ReducedGraph] = None
    clique: Optional[list[Node]] = None
    cliques_tried: int = 0
    pair_colors: Optional[dict] = None
    color: Optional[int] = None
    mono_nodes: Optional[list[Node]] = None
    clusters: Optional[list[VertexSet]] = None
    target_graph: Optional[TargetGraph] = None
    embedding: Optional[EmbeddingState] = None
    failure: Optional[FailureTrace] = None
    verified: bool = False

    @property
    def success(self) -> bool:
        return self.verified

    @property
    def failed_stage(self) -> Optional[str]:
        return next((s.name for s in self.stages if not s.ok), None)

    def to_text(self, timings: bool = True) -> str:
        from .formats import format_report

        return format_report(self, timings=timings)


class _Timer:
    def __init__(self, report: PipelineReport, name: str):
        self.report, self.name = report, name

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def done(self, ok: bool, message: str = "") -> None:
        ms = int(round((time.perf_counter() - self.t0) * 1000))
        self.report.stages.append(Stage(self.name, ok, ms, message))

    def __exit__(self, *exc):
        return False


def _check_inputs(host: PartiteHost, G: DenseGraph, cfg: PipelineConfig) -> None:
    if host.colors is None:
        raise GraphError("pipeline needs an edge-coloured host")
    if host.r != cfg.r:
        raise GraphError(f"host has {host.r} colours, config says {cfg.r}")
    if host.p != cfg.p:
        raise GraphError(f"host has {host.p} parts, config says {cfg.p}")
    if len(set(host.part_sizes)) != 1:
        raise GraphError("pipeline needs equal part sizes")
    if not host.is_complete():
        raise GraphError("pipeline needs a complete multipartite host")
    if G.max_degree > cfg.delta:
        raise GraphError(f"target maximum degree {G.max_degree} exceeds delta={cfg.delta}")


def run_pipeline(host: PartiteHost, G: DenseGraph, cfg: PipelineConfig) -> PipelineReport:
    """Look for a verified monochromatic copy of G in the coloured host.

    Stages: partition, absorb, reduce, clique, ramsey, coloring, embed.
    Precondition violations raise; a stage that fails is recorded and the
    report is returned with ``success == False``.
    """
    _check_inputs(host, G, cfg)
    rep = PipelineReport(cfg, G)
    colors = list(range(host.r))
    params = cfg.regularity_params()

    with _Timer(rep, "partition") as tm:
        P, refinement = iterate_to_regular(host, params, colors)
        rep.partition, rep.refinement = P, refinement
        tm.done(True, "regular" if refinement.regular else refinement.stop_reason)

    with _Timer(rep, "absorb") as tm:
        rep.absorbed = absorb_exceptional(P)
        rep.absorbed.validate(host)
        rep.absorbed_q, _ = multicolor_index(host, rep.absorbed, colors)
        tm.done(True)

    with _Timer(rep, "reduce") as tm:
        stats = compute_verdicts(host, rep.absorbed, params, colors, salt=10**6)
        rep.reduced = reduced_graph(host, rep.absorbed, stats, colors)
        tm.done(True)

    cliques = iter_cluster_cliques(rep.reduced)
    for attempt in range(cfg.clique_retries + 1):
        with _Timer(rep, "clique") as tm:
            clique = next(cliques, None)
            if clique is None:
                msg = "no transversal clique of regular pairs" if attempt == 0 else "no further cluster cliques"
                tm.done(False, msg)
                return rep
            rep.clique = clique
            rep.cliques_tried = attempt + 1
            tm.done(True, f"attempt {attempt + 1}")

        with _Timer(rep, "ramsey") as tm:
            densities = {}
            for u, v in itertools.combinations(clique, 2):
                densities[(u, v)] = rep.reduced.label(u, v)["densities"]
            _assert_pigeonhole(host, rep.absorbed, clique, densities)
            try:
                a, nodes = density_color_clique(clique, densities, cfg.delta, host.r)
            except NoMonochromaticClique as exc:
                rep.pair_colors = exc.pair_colors
                tm.done(False, str(exc))
                continue
            rep.color, rep.mono_nodes = a, nodes
            _recheck_densities(host, rep.absorbed, nodes, a)
            tm.done(True)

        if rep.target_graph is None:
            with _Timer(rep, "coloring") as tm:
                try:
                    rep.target_graph = TargetGraph.from_graph(G, cfg.delta)
                except ColoringInfeasible as exc:
                    tm.done(False, str(exc))
                    return rep
                tm.done(True)
        T = rep.target_graph

        with _Timer(rep, "embed") as tm:
            clusters = [rep.absorbed.cls(s, i) for s, i in nodes]
            rep.clusters = clusters
            mono = host.color_adjacency(a)
            out = embed(T, mono, clusters, cfg.epsilon, Fraction(1, host.r))
            if isinstance(out, FailureTrace):
                rep.failure, rep.embedding = out, None
                tm.done(False, f"starved at step {out.step}")
                continue
            rep.failure = None
            rep.embedding = out
            rep.verified = verify_embedding(T, out.images, mono, clusters)
            tm.done(rep.verified, "" if rep.verified else "verification failed")
            return rep
    return rep


def _pair_density(adj: np.ndarray, X: VertexSet, Y: VertexSet) -> Fraction:
    return Fraction(int(adj[np.ix_(X.indices, Y.indices)].sum()), len(X) * len(Y))


def _assert_pigeonhole(host: PartiteHost, P: Partition, clique, densities) -> None:
    thr = Fraction(1, host.r)
    for (u, v), ds in densities.items():
        if max(ds) < thr:
            raise AssertionError(f"pair {u}-{v}: no colour reaches density 1/{host.r}")


def _recheck_densities(host: PartiteHost, P: Partition, nodes, a: int) -> None:
    adj = host.color_adjacency(a)
    for u, v in itertools.combinations(nodes, 2):
        if _pair_density(adj, P.cls(*u), P.cls(*v)) < Fraction(1, host.r):
            raise AssertionError(f"pair {u}-{v} below density 1/{host.r} in colour {a}")
