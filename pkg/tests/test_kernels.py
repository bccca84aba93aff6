"""The compiled kernels and the numpy fallback must agree."""

import os
import subprocess
import sys
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgelatency import _pycore, kernels
from edgelatency.fountain import robust_soliton, sample_rows
from edgelatency.placement import cyclic_assignment

_core = pytest.importorskip("edgelatency._core")


def test_backend_selected():
    assert kernels.BACKEND == "cython"
    assert kernels.scan_accumulate is _core.scan_accumulate


def test_fallback_forced_by_environment():
    env = dict(os.environ, EDGELATENCY_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "import edgelatency; print(edgelatency.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.booleans(), st.sampled_from([(Fraction(1, 2), Fraction(1, 2)),
                                                                   (Fraction(3, 4), Fraction(1, 2)),
                                                                   (Fraction(1), Fraction(1, 3))]))
def test_scan_accumulate_equivalent(seed, retain_top, rates):
    rng = np.random.default_rng(seed)
    Ro, Ri = rates
    k, e = 12, 4
    A = cyclic_assignment(k, e, Ro, Ri)
    lam = rng.exponential(0.03, (25, e))
    n = A.rows_per_en * e
    target = int(rng.integers(k, A.n1 + 1))
    p_lo = int(rng.integers(1, n + 1))
    args = (lam, 1e-3, A.zero_based(), A.n1, target, p_lo, n, retain_top, 1e-7, 1e-3, 1e-4, -1e-6, 2e-4, -3e-6)
    a = _core.scan_accumulate(*args)
    b = _pycore.scan_accumulate(*args)
    assert a.shape == b.shape
    assert np.allclose(a, b, rtol=1e-12, atol=1e-18)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 8))
def test_lower_bound_scan_equivalent(seed, e, cap):
    rng = np.random.default_rng(seed)
    lam = rng.exponential(0.03, (20, e))
    p_lo = int(rng.integers(0, e * cap + 1))
    # the communication bound is nonincreasing in p, which the compiled scan relies on
    ldu = np.sort(rng.random(e * cap - p_lo + 1))[::-1].copy()
    a = _core.lower_bound_scan(lam, 1e-3, cap, p_lo, ldu)
    b = _pycore.lower_bound_scan(lam, 1e-3, cap, p_lo, ldu)
    for x, y in zip(a, b):
        assert np.array_equal(x, y)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 64))
def test_first_full_rank_equivalent(seed, k):
    rng = np.random.default_rng(seed)
    density = rng.uniform(0.02, 0.5)
    bits = rng.random((10, 2 * k, k)) < density
    rows = (bits.astype(np.uint64) << np.arange(k, dtype=np.uint64)).sum(axis=2).astype(np.uint64)
    assert np.array_equal(_core.first_full_rank(rows, k), _pycore.first_full_rank(rows, k))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 200), st.integers(0, 30))
def test_inactivation_decode_equivalent(seed, k, extra):
    rng = np.random.default_rng(seed)
    dist = robust_soliton(k, max(1, k // 3), 0.1)
    row_ptr, cols = sample_rows(dist, k, k + extra, rng)
    row_ptr = np.ascontiguousarray(row_ptr, dtype=np.int64)
    cols = np.ascontiguousarray(cols, dtype=np.int32)
    rhs = rng.integers(0, 2**63, size=k + extra, dtype=np.uint64)
    a = _core.inactivation_decode(row_ptr, cols, k, rhs)
    b = _pycore.inactivation_decode(row_ptr, cols, k, rhs)
    assert tuple(a[:4]) == tuple(b[:4])
    if a[0]:
        assert np.array_equal(np.asarray(a[4], dtype=np.uint64), np.asarray(b[4], dtype=np.uint64))


@pytest.mark.parametrize("k", [65, 200, 1000, 3000])
def test_krawtchouk_ratio_equivalent(k):
    omega = robust_soliton(k, min(k, 60), 0.05).omega
    a = _core.krawtchouk_ratio_q2(np.ascontiguousarray(omega, dtype=np.float64), k)
    b = _pycore.krawtchouk_ratio_q2(np.ascontiguousarray(omega, dtype=np.float64), k)
    assert np.array_equal(np.asarray(a), np.asarray(b))
