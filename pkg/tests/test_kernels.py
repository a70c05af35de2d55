import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folkreg import _kernels as K

needs_numba = pytest.mark.skipif(not K.HAVE_NUMBA, reason="numba not available")


def _scan_args(a, b, seed, eps=(3, 10)):
    rng = np.random.default_rng(seed)
    adj = rng.random((a, b)) < rng.uniform(0.1, 0.9)
    E = int(adj.sum())
    D = math.lcm(*range(1, a + 1)) * math.lcm(*range(1, b + 1))
    return adj.astype(np.bool_), E, D, eps[0], eps[1]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 8), st.integers(0, 10**6), st.sampled_from([(1, 10), (1, 5), (3, 10), (1, 2)]))
def test_gray_scan_numpy_matches_reference(a, b, seed, eps):
    args = _scan_args(a, b, seed, eps)
    assert tuple(K.gray_scan_numpy(*args)) == tuple(K._gray_scan_py(*args))


@needs_numba
@settings(max_examples=60, deadline=None)
@given(st.integers(1, 10), st.integers(1, 10), st.integers(0, 10**6))
def test_gray_scan_numba_matches_numpy(a, b, seed):
    args = _scan_args(a, b, seed)
    assert tuple(K.gray_scan_numba(*args)) == tuple(K.gray_scan_numpy(*args))


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 30), st.integers(1, 6), st.integers(0, 10**6))
def test_class_pair_counts_backends(n, nclass, seed):
    rng = np.random.default_rng(seed)
    upper = np.triu(rng.random((n, n)) < 0.5, 1)
    adj = upper | upper.T
    labels = rng.integers(-1, nclass, size=n).astype(np.int64)
    want = np.zeros((nclass, nclass), np.int64)
    for u in range(n):
        for v in range(n):
            if adj[u, v] and labels[u] >= 0 and labels[v] >= 0:
                want[labels[u], labels[v]] += 1
    assert (K.class_pair_counts_numpy(adj, labels, nclass) == want).all()
    if K.HAVE_NUMBA:
        assert (K.class_pair_counts_numba(adj, labels, nclass) == want).all()


@needs_numba
def test_kp_free_backends_agree():
    from folkreg.turan import max_kp_free_oracle

    for p, k in [(2, 2), (3, 1), (3, 2), (4, 1)]:
        orig = K.kp_free_max
        try:
            K.kp_free_max = K.kp_free_max_numpy
            slow = max_kp_free_oracle(p, k)
        finally:
            K.kp_free_max = orig
        assert slow == max_kp_free_oracle(p, k)


def test_env_flag_selects_numpy():
    env = dict(os.environ, FOLKREG_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c", "from folkreg import _kernels as K; print(K.backend())"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "numpy"
