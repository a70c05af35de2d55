"""Acceptance gate. Each test prints one ``C<n> PASS|FAIL ...`` line."""

import itertools
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import block_host, random_bipartite
from folkreg.embedding import good_vertex_set, verify_embedding
from folkreg.graph import VertexSet, random_host
from folkreg.harness import NoMonochromaticClique, PipelineConfig, density_color_clique, random_target, run_pipeline
from folkreg.partition import Partition, compute_verdicts, initial_partition, irregular_threshold, iterate_to_regular, refine_step
from folkreg.regularity import (
    RegularityParams,
    Verdict,
    check_pair_exhaustive,
    check_pair_sampled,
    defect_cauchy_schwarz_check,
    index,
    is_witness,
)
from folkreg.turan import max_kp_free_oracle, turan_bound

TOL = Fraction(1, 10**12)
TIME_LIMIT = 60.0


@pytest.fixture
def verdict(capsys):
    def emit(cid: int, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\nC{cid} {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail

    return emit


def test_c01_turan_agreement(verdict):
    cases = [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (4, 1), (4, 2)]
    bad, slow = [], 0.0
    for p, k in cases:
        t0 = time.perf_counter()
        o = max_kp_free_oracle(p, k)
        dt = time.perf_counter() - t0
        if (p, k) == (4, 2):
            slow = dt
        if o != turan_bound(p, k):
            bad.append((p, k, o, turan_bound(p, k)))
    ok = not bad and turan_bound(3, 2) == 8 and slow < TIME_LIMIT
    verdict(1, ok, f"turan oracle == bound on {len(cases)} cases, t_3(2)={turan_bound(3, 2)}, (4,2) in {slow:.2f}s, mismatches={bad}")


def _random_refinement(P: Partition, rng) -> Partition:
    c = len(P.classes[0][0])
    j = int(rng.choice([d for d in range(2, c + 1) if c % d == 0]))
    classes = []
    for part in P.classes:
        row = []
        for cl in part:
            row += [VertexSet(chunk) for chunk in np.split(rng.permutation(cl.indices), j)]
        classes.append(tuple(row))
    return Partition(tuple(classes), P.exceptional, "exc")


def test_c02_index_monotone(verdict):
    worst = Fraction(0)
    for seed in range(200):
        rng = np.random.default_rng(seed)
        m = int(rng.integers(1, 3))
        size = m * int(rng.choice([2, 3, 4, 6]))
        h = random_host(2, size, int(rng.integers(1, 4)), seed)
        P = initial_partition(h, m)
        Q = _random_refinement(P, rng)
        for c in range(h.r):
            worst = min(worst, index(h, Q, c) - index(h, P, c))
    verdict(2, worst >= -TOL, f"200 random refinements, most negative index change {worst}")


def test_c03_block_increment(verdict):
    h = block_host()
    params = RegularityParams(epsilon=Fraction(3, 10))
    P = initial_partition(h, 1)
    Q, row = refine_step(h, P, params, None, compute_verdicts(h, P, params))
    ok = row.q_before == Fraction(1, 4) and row.q_after == Fraction(1, 2) == index(h, Q)
    verdict(3, ok, f"block instance q {row.q_before} -> {row.q_after}")


def test_c04_iteration_bound(verdict):
    problems, regular_runs = [], 0
    for seed in range(50):
        rng = np.random.default_rng(1000 + seed)
        p = int(rng.choice([2, 3]))
        size = int(rng.integers(8, 201))
        r = int(rng.integers(1, 3))
        eps = Fraction(int(rng.choice([20, 25, 30, 50])), 100)
        h = random_host(p, size, r, seed)
        params = RegularityParams(epsilon=eps, m=int(rng.integers(1, 4)), max_rounds=4, seed=seed)
        P, rep = iterate_to_regular(h, params)
        qs = rep.q_history
        if any(b < a - TOL for a, b in zip(qs, qs[1:])):
            problems.append((seed, "q decreased"))
        if max(qs) > r * math.comb(p, 2):
            problems.append((seed, "q above r*C(p,2)"))
        if rep.regular:
            regular_runs += 1
            if rep.irregular_pair_count[-1] > irregular_threshold(P, eps, r):
                problems.append((seed, "too many irregular pairs"))
    verdict(4, not problems, f"50 runs terminated, {regular_runs} flagged regular, problems={problems}")


def test_c05_sampler_soundness(verdict):
    contradictions, bad_witness, checked = 0, 0, 0
    for seed, (a, b) in enumerate(itertools.product(range(1, 11), repeat=2)):
        g, A, B = random_bipartite(a, b, float(np.random.default_rng(seed).uniform(0.1, 0.9)), seed)
        for eps in (Fraction(1, 10), Fraction(1, 5), Fraction(3, 10)):
            ex = check_pair_exhaustive(g, A, B, eps)
            sa = check_pair_sampled(g, A, B, eps, trials=32, seed=seed)
            checked += 1
            if ex.verdict is Verdict.REGULAR and sa.verdict is Verdict.IRREGULAR:
                contradictions += 1
            for st_ in (ex, sa):
                if st_.witness is not None and not is_witness(g.adj, A, B, *st_.witness, eps):
                    bad_witness += 1
    ok = contradictions == 0 and bad_witness == 0
    verdict(5, ok, f"{checked} pair checks, sampled-vs-exhaustive contradictions={contradictions}, bad witnesses={bad_witness}")


def test_c06_good_vertex_lemma(verdict):
    violations, certified, ys = 0, 0, 0
    for seed in range(50):
        rng = np.random.default_rng(seed)
        a, b = int(rng.integers(2, 13)), int(rng.integers(2, 13))
        # near-empty or near-complete pairs are the ones that certify at these eps
        dens = float(rng.choice([0.03, 0.08, 0.5, 0.92, 0.97]))
        g, A, B = random_bipartite(a, b, dens, seed)
        sub = g.adj[np.ix_(A.indices, B.indices)].astype(np.int64)
        for eps in (Fraction(1, 5), Fraction(3, 10)):
            st_ = check_pair_exhaustive(g, A, B, eps)
            if st_.verdict is not Verdict.REGULAR:
                continue
            certified += 1
            masks = np.array([[(y >> j) & 1 for j in range(b)] for y in range(1, 1 << b)], dtype=np.int64)
            sizes = masks.sum(axis=1)
            masks, sizes = masks[sizes >= eps * b], sizes[sizes >= eps * b]
            thr = st_.density - eps
            deg = sub @ masks.T  # a x |Ys|
            good = (deg * thr.denominator >= thr.numerator * sizes[None, :]).sum(axis=0)
            ys += len(sizes)
            violations += int((good < (1 - eps) * a).sum())
            # spot-check the vectorised count against the library call
            Y = VertexSet(B.indices[np.nonzero(masks[-1])[0]])
            assert len(good_vertex_set(g, A, Y, st_.density, eps)) == good[-1]
    ok = violations == 0 and certified > 0
    verdict(6, ok, f"{certified} certified-regular pairs, {ys} sets Y checked, violations={violations}")


def test_c07_ramsey_step(verdict):
    nodes = [(s, 1) for s in range(6)]
    pairs = list(itertools.combinations(nodes, 2))
    tri = list(itertools.combinations(range(6), 3))
    pair_idx = {pq: x for x, pq in enumerate(itertools.combinations(range(6), 2))}
    failures = 0
    for mask in range(1 << 15):
        dens = {pq: (Fraction(1), Fraction(0)) if (mask >> x) & 1 == 0 else (Fraction(0), Fraction(1)) for x, pq in enumerate(pairs)}
        try:
            a, found = density_color_clique(nodes, dens, 3, 2)
        except NoMonochromaticClique:
            failures += 1
            continue
        # independent check of the returned triangle
        ids = [s for s, _ in found]
        cols = {(mask >> pair_idx[(x, y)]) & 1 for x, y in itertools.combinations(ids, 2)}
        if cols != {a} or not any(set(t) == set(ids) for t in tri):
            failures += 1
    five = nodes[:5]
    pent = {}
    for x, y in itertools.combinations(range(5), 2):
        pent[(five[x], five[y])] = (Fraction(1), Fraction(0)) if (y - x) % 5 in (1, 4) else (Fraction(0), Fraction(1))
    try:
        density_color_clique(five, pent, 3, 2)
        c5_ok = False
    except NoMonochromaticClique:
        c5_ok = True
    verdict(7, failures == 0 and c5_ok, f"2^15 colourings of K_6: failures={failures}; C_5 colouring of K_5 has none: {c5_ok}")


def _pipeline_runs(r: int, p: int, part_size: int, delta: int, eps: Fraction, m: int, seeds):
    rows = []
    for seed in seeds:
        host = random_host(p, part_size, r, seed)
        G = random_target(8, delta, seed)
        cfg = PipelineConfig(delta=delta, r=r, p=p, epsilon=eps, m=m, part_size=part_size, seed=seed)
        t0 = time.perf_counter()
        rep = run_pipeline(host, G, cfg)
        dt = time.perf_counter() - t0
        ok = rep.success and verify_embedding(rep.target_graph, rep.embedding.images, host.color_adjacency(rep.color), rep.clusters)
        rows.append((seed, rep, ok, dt))
    return rows


@pytest.mark.slow
def test_c08_end_to_end(verdict):
    rows = _pipeline_runs(2, 6, 48, 3, Fraction(1, 10), 2, range(20))
    wins = sum(ok for _, _, ok, _ in rows)
    unsound = sum(rep.success and not ok for _, rep, ok, _ in rows)
    slowest = max(dt for *_, dt in rows)
    stages = sorted({rep.failed_stage for _, rep, ok, _ in rows if not ok})
    ks = sorted({rep.refinement.final_k for _, rep, _, _ in rows})
    ok = wins >= 18 and unsound == 0 and slowest < TIME_LIMIT
    verdict(8, ok, f"{wins}/20 verified successes (need 18), unsound={unsound}, slowest {slowest:.1f}s, "
                   f"failed stages {stages}, final k {ks}")


def test_c09_multicolor_smoke(verdict):
    problems = []
    eps = Fraction(1, 10)
    for seed in range(3):
        host = random_host(17, 8, 3, seed)
        G = random_target(8, 3, seed)
        cfg = PipelineConfig(delta=3, r=3, p=17, epsilon=eps, m=2, part_size=8, seed=seed, max_rounds=3)
        rep = run_pipeline(host, G, cfg)
        try:
            rep.partition.validate(host)
            rep.absorbed.validate(host)
            for (s, i, t, j, c), st_ in rep.refinement.final_stats.items():
                if st_.witness is not None and not is_witness(host.color_adjacency(c), rep.partition.cls(s, i), rep.partition.cls(t, j), *st_.witness, eps):
                    problems.append((seed, "bad witness"))
            for u, v in rep.reduced.edges():
                X, Y = rep.absorbed.cls(*u), rep.absorbed.cls(*v)
                raw = [Fraction(int(host.color_adjacency(c)[np.ix_(X.indices, Y.indices)].sum()), len(X) * len(Y)) for c in range(3)]
                if list(rep.reduced.label(u, v)["densities"]) != raw:
                    problems.append((seed, "reduced label"))
            if rep.clique is not None:
                if not all(rep.reduced.has_edge(u, v) for u, v in itertools.combinations(rep.clique, 2)):
                    problems.append((seed, "clique not adjacent"))
            if rep.mono_nodes is not None:
                adj = host.color_adjacency(rep.color)
                for u, v in itertools.combinations(rep.mono_nodes, 2):
                    X, Y = rep.absorbed.cls(*u), rep.absorbed.cls(*v)
                    if Fraction(int(adj[np.ix_(X.indices, Y.indices)].sum()), len(X) * len(Y)) < Fraction(1, 3):
                        problems.append((seed, "density below 1/3"))
            if rep.success and not verify_embedding(rep.target_graph, rep.embedding.images, host.color_adjacency(rep.color), rep.clusters):
                problems.append((seed, "embedding"))
        except Exception as exc:  # a stage artifact that does not re-validate
            problems.append((seed, repr(exc)))
    verdict(9, not problems, f"r=3, p=17, part_size=8 smoke over 3 seeds, problems={problems}")


def test_c10_defect_cauchy_schwarz(verdict):
    rng = np.random.default_rng(2024)
    failures = 0
    for _ in range(1000):
        s = int(rng.integers(2, 16))
        d = [Fraction(int(x), int(y)) for x, y in zip(rng.integers(0, 50, s), rng.integers(1, 50, s))]
        t = int(rng.integers(1, s))
        delta = sum(d, Fraction(0)) / s - sum(d[:t], Fraction(0)) / t
        failures += not defect_cauchy_schwarz_check(d, t, delta)
    lhs = Fraction(0 + 1, 2)
    rhs = Fraction(1, 2) ** 2 + 1 * Fraction(1, 2) ** 2 / (2 - 1)
    equality = defect_cauchy_schwarz_check([0, 1], 1, Fraction(1, 2)) and lhs == rhs
    verdict(10, failures == 0 and equality, f"1000 random vectors, failures={failures}; (0,1), t=1 equality exact: {equality}")
