from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import block_host, brute_regular, random_bipartite
from folkreg.graph import DenseGraph, PartiteHost, VertexSet, complete_multipartite
from folkreg.partition import Partition, initial_partition
from folkreg.regularity import (
    CapacityError,
    RegularityParams,
    Verdict,
    check_pair,
    check_pair_exhaustive,
    check_pair_sampled,
    defect_cauchy_schwarz_check,
    deviation,
    index,
    is_witness,
    le_cont_check,
)

A8, B8 = VertexSet(range(8)), VertexSet(range(8, 16))


def test_complete_and_empty_pairs_regular():
    g = complete_multipartite([5, 6])
    A, B = VertexSet(range(5)), VertexSet(range(5, 11))
    for eps in (Fraction(1, 10), Fraction(1, 2)):
        assert check_pair_exhaustive(g, A, B, eps).verdict is Verdict.REGULAR
        assert check_pair_sampled(g, A, B, eps, 50, seed=1).verdict is Verdict.PROBABLY_REGULAR
    assert check_pair_exhaustive(DenseGraph(11), A, B, Fraction(1, 10)).verdict is Verdict.REGULAR


def test_block_pair_exhaustive_witness():
    g = block_host().graph
    st_ = check_pair_exhaustive(g, A8, B8, Fraction(3, 10))
    assert st_.verdict is Verdict.IRREGULAR
    assert st_.density == Fraction(1, 2)
    assert st_.deviation == Fraction(1, 2)
    X, Y = st_.witness
    assert {tuple(X), tuple(Y)} <= {(0, 1, 2, 3), (4, 5, 6, 7), (8, 9, 10, 11), (12, 13, 14, 15)}
    assert (X.indices[0] < 4) == (Y.indices[0] < 12)  # aligned halves


def test_block_pair_sampled_finds_witness():
    g = block_host().graph
    a = check_pair_sampled(g, A8, B8, Fraction(3, 10), 200, seed=3)
    b = check_pair_sampled(g, A8, B8, Fraction(3, 10), 200, seed=3)
    assert a.verdict is Verdict.IRREGULAR
    assert is_witness(g.adj, A8, B8, *a.witness, Fraction(3, 10))
    assert a.witness == b.witness


def test_exhaustive_cap():
    g = complete_multipartite([15, 3])
    with pytest.raises(CapacityError):
        check_pair_exhaustive(g, VertexSet(range(15)), VertexSet(range(15, 18)), Fraction(1, 4))
    # dispatcher falls back to sampling
    st_ = check_pair(g, VertexSet(range(15)), VertexSet(range(15, 18)), Fraction(1, 4))
    assert st_.verdict is Verdict.PROBABLY_REGULAR


def test_threshold_strictness():
    # |A| = |B| = 5, eps = 1/5: single vertices are not admissible (1 > 1 fails)
    g = DenseGraph(10, [(0, 5)])
    A, B = VertexSet(range(5)), VertexSet(range(5, 10))
    regular, best = brute_regular(g.adj, A, B, Fraction(1, 5))
    st_ = check_pair_exhaustive(g, A, B, Fraction(1, 5))
    assert (st_.verdict is Verdict.REGULAR) == regular
    # deviation exactly eps is not a witness: d = 1/4 on 2x2, sub-pair 2x2 only admissible
    g = DenseGraph(4, [(0, 2)])
    st_ = check_pair_exhaustive(g, VertexSet([0, 1]), VertexSet([2, 3]), Fraction(1, 2))
    assert st_.verdict is Verdict.REGULAR


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 6), st.integers(1, 6), st.sampled_from([0.2, 0.3, 0.5]), st.floats(0.1, 0.9), st.integers(0, 10**6))
def test_exhaustive_matches_naive_oracle(a, b, eps, dens, seed):
    g, A, B = random_bipartite(a, b, dens, seed)
    eps = Fraction(eps)
    regular, best = brute_regular(g.adj, A, B, eps)
    st_ = check_pair_exhaustive(g, A, B, eps)
    assert (st_.verdict is Verdict.REGULAR) == regular
    if not regular:
        assert st_.deviation == best
        assert is_witness(g.adj, A, B, *st_.witness, eps)


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.sampled_from([0.1, 0.2, 0.3]), st.integers(0, 10**6))
def test_sampled_witnesses_always_verify(a, b, eps, seed):
    g, A, B = random_bipartite(a, b, 0.5, seed)
    st_ = check_pair_sampled(g, A, B, eps, trials=24, seed=seed)
    assert st_.verdict in (Verdict.IRREGULAR, Verdict.PROBABLY_REGULAR)
    if st_.verdict is Verdict.IRREGULAR:
        assert is_witness(g.adj, A, B, *st_.witness, eps)
        X, Y = st_.witness
        assert deviation(g.adj, A, B, X, Y) > Fraction(eps).limit_denominator(1000)


def test_index_examples():
    full = PartiteHost([3, 3], complete_multipartite([3, 3]))
    P = initial_partition(full, 1)
    assert index(full, P) == 1
    empty = PartiteHost([3, 3], DenseGraph(6))
    assert index(empty, P) == 0
    half = PartiteHost([2, 2], DenseGraph(4, [(0, 2), (1, 3)]))
    assert index(half, initial_partition(half, 1)) == Fraction(1, 4)


def test_index_relabel_invariant():
    h = block_host()
    P = initial_partition(h, 2)
    flipped = Partition(tuple(c[::-1] for c in P.classes), P.exceptional, "exc")
    assert index(h, P) == index(h, flipped) == Fraction(1, 2)


def test_index_rejects_non_equitable():
    h = block_host()
    bad = Partition(((VertexSet([0]), VertexSet(range(1, 8))), (VertexSet(range(8, 12)), VertexSet(range(12, 16)))), None, "near")
    with pytest.raises(ValueError):
        index(h, bad)


def test_defect_cauchy_schwarz_examples():
    assert defect_cauchy_schwarz_check([0, 1], 1, Fraction(1, 2))
    lhs = Fraction(1, 2)
    assert lhs == Fraction(1, 4) + Fraction(1, 4)  # equality case
    assert defect_cauchy_schwarz_check([Fraction(1, 3)] * 5, 2, 0)
    with pytest.raises(ValueError):
        defect_cauchy_schwarz_check([0, 1], 1, Fraction(1, 3))
    with pytest.raises(ValueError):
        defect_cauchy_schwarz_check([0, 1], 2, 0)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=50), min_size=2, max_size=12), st.data())
def test_defect_cauchy_schwarz_property(d, data):
    t = data.draw(st.integers(1, len(d) - 1))
    delta = sum(d, Fraction(0)) / len(d) - sum(d[:t], Fraction(0)) / t
    assert defect_cauchy_schwarz_check(d, t, delta)


@settings(max_examples=60, deadline=None)
@given(st.integers(3, 12), st.integers(3, 12), st.sampled_from([Fraction(1, 10), Fraction(1, 4), Fraction(1, 3)]), st.integers(0, 10**6))
def test_le_cont_property(a, b, delta, seed):
    g, X, Y = random_bipartite(a, b, 0.5, seed)
    rng = np.random.default_rng(seed)
    keep_x = max(1, min(a, int((1 - delta) * a) + 1))
    keep_y = max(1, min(b, int((1 - delta) * b) + 1))
    Xs = VertexSet(rng.choice(X.indices, keep_x, replace=False))
    Ys = VertexSet(rng.choice(Y.indices, keep_y, replace=False))
    assert le_cont_check(g, X, Y, Xs, Ys, delta) == (True, True)


def test_params_validation():
    with pytest.raises(ValueError):
        RegularityParams(epsilon=Fraction(3, 5))
    with pytest.raises(ValueError):
        RegularityParams(epsilon=0)
    assert RegularityParams(epsilon=0.1).epsilon == Fraction(1, 10)
