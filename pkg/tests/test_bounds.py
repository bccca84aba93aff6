import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from edgelatency.bounds import (f_bound, floor_ceil_diversities, lc_lower, lde_lower, ldu_lower, ldu_lower_array,
                                lower_bounds_from, mean_event_times, tau_e_lower, tau_u_lower)
from edgelatency.latency import comm_edge
from edgelatency.model import Scheme, SchemeDesign, SystemParams, delta
from edgelatency.placement import assignment_for
from edgelatency.runtime import StragglerDraw, draw_matrix, run_computation


def test_lc_lower_examples():
    assert lc_lower([0.0, 0.5], 3, 1.0, 2) == 2.0
    assert lc_lower([0.0, 0.5], 0, 1.0, 2) == 0.0
    with pytest.raises(ValueError):
        lc_lower([0.0, 0.5], 5, 1.0, 2)
    # fractional cap floors to whole rows
    assert lc_lower([0.0, 0.5], 4, 1.0, 2.5) == 2.5


def _lc_by_bisection(lam, p, d, cap):
    """Smallest event time at which the capped counts reach p, by direct counting."""
    events = sorted({l + i * d for l in lam for i in range(1, cap + 1)})
    for t in events:
        if sum(min(int(np.count_nonzero(l + d * np.arange(1, cap + 1) <= t)), cap) for l in lam) >= p:
            return t
    raise AssertionError


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0, 0.1), min_size=1, max_size=5), st.integers(1, 6), st.data())
def test_lc_lower_matches_counting_and_is_monotone(lam, cap, data):
    d = 1e-2
    p = data.draw(st.integers(1, len(lam) * cap))
    t = lc_lower(lam, p, d, cap)
    assert t == _lc_by_bisection(lam, p, d, cap)
    if p > 1:
        assert lc_lower(lam, p - 1, d, cap) <= t


def test_mean_event_times():
    lam = draw_matrix(0.03, 3, 20, np.random.default_rng(0))
    got = mean_event_times(lam, 1e-3, 4)
    want = [np.mean([lc_lower(row, p, 1e-3, 4) for row in lam]) for p in range(1, 13)]
    assert np.allclose(got, want, rtol=1e-14)


def test_ldu_examples():
    assert ldu_lower(20000, 10000, 10, 2, 1e8) == pytest.approx(5e-4, rel=1e-12)
    assert ldu_lower(3, 2, 1, 2, 1.0) == pytest.approx(1.5)
    assert ldu_lower(10000, 10000, 10, 2, 1e8) == pytest.approx(1e-7 * 10000)
    with pytest.raises(ValueError):
        ldu_lower(9, 10, 10, 2, 1e8)
    p = np.arange(7, 60)
    assert np.allclose(ldu_lower_array(p, 7, 2.0), [ldu_lower(int(x), 7, 2, 4, 2.0) for x in p], rtol=1e-14)


def test_lde_examples():
    assert lde_lower(10000, 10, 2, 1e8, 5) == pytest.approx(2e-4, rel=1e-12)
    assert lde_lower(10000, 10, 2, 1e8, 5) == comm_edge(10000, 10, 2, 1e8, 5)
    assert lde_lower(10000, 10, 2, 1e8, 10) == pytest.approx(lde_lower(10000, 10, 2, 1e8, 5) / 2)
    with pytest.raises(ValueError):
        lde_lower(1, 1, 2, 1.0, 0)


def test_f_bound_examples_and_continuity():
    assert f_bound(4, 2) == 1.0
    assert f_bound(3, 2) == 1.5
    with pytest.raises(ValueError):
        f_bound(1, 2)
    for b in (1.0, 2.0, 7.0):
        for c in (1, 2, 3, 5):
            a = c * b
            if c > 1:
                assert f_bound(a - 1e-9, b) == pytest.approx(b * b / a, rel=1e-7)
            assert f_bound(a + 1e-9, b) == pytest.approx(b * b / a, rel=1e-7)


@given(st.floats(0.5, 50), st.floats(0, 9), st.floats(0, 1))
def test_f_bound_monotone(b, r, step):
    a = b * (1 + r)
    assert f_bound(a + step, b) <= f_bound(a, b) + 1e-12
    b2 = min(b + step, a)
    assert f_bound(a, b2) >= f_bound(a, b) - 1e-12


@given(st.integers(1, 40), st.data())
def test_floor_ceil_construction(v, data):
    p = data.draw(st.integers(v, 6 * v))
    m = floor_ceil_diversities(p, v)
    assert m.sum() == p and m.size == v and m.max() - m.min() <= 1
    assert math.fsum(1.0 / m) == pytest.approx(f_bound(p, v), rel=1e-12)


def _naive_bounds(params, lam):
    cap, k, e = params.storage_rows, params.k, params.e
    alpha = params.u * params.log2q / params.nu
    d = delta(params)
    u = [min(lc_lower(row, p, d, cap) + alpha * f_bound(p, k) for p in range(k, e * cap + 1)) for row in lam]
    first = [lc_lower(row, k, d, cap) for row in lam]
    return np.array(u), np.array(first) + lde_lower(k, params.u, params.q, params.nu, e)


def test_bound_kernel_matches_naive_scan():
    params = SystemParams(e=4, u=8, k=24, r=24, mu=0.5, nu=1e3)
    lam = draw_matrix(params.beta, params.e, 40, np.random.default_rng(11))
    bu, be = lower_bounds_from(params, lam)
    nu_, ne_ = _naive_bounds(params, lam)
    assert np.allclose(bu.per_trial, nu_, rtol=1e-13)
    assert np.allclose(be.per_trial, ne_, rtol=1e-13)


def test_zero_straggling_limits():
    params = SystemParams(e=4, u=8, k=24, r=24, mu=0.5, nu=1e3, beta=1e-15)
    d = delta(params)
    alpha = params.u / params.nu
    cap = params.storage_rows
    want_u = min(lc_lower(np.zeros(4), p, d, cap) + alpha * f_bound(p, 24) for p in range(24, 4 * cap + 1))
    assert tau_u_lower(params, 5, np.random.default_rng(0)) == pytest.approx(want_u, rel=1e-9)
    want_e = d * math.ceil(24 / 4) + lde_lower(24, 8, 2, 1e3, 4)
    assert tau_e_lower(params, 5, np.random.default_rng(0)) == pytest.approx(want_e, rel=1e-9)
    with pytest.raises(ValueError):
        tau_u_lower(params, 0, np.random.default_rng(0))


def test_tau_e_nu_shift():
    params = SystemParams(e=4, u=8, k=24, r=24, mu=0.5, nu=1e3)
    a = tau_e_lower(params, 100, np.random.default_rng(2))
    b = tau_e_lower(params.replace(nu=2e3), 100, np.random.default_rng(2))
    assert a - b == pytest.approx(lde_lower(24, 8, 2, 1e3, 4) / 2, rel=1e-9)


DESIGNS = [(Scheme.RATELESS_IR, Fraction(1, 2), Fraction(1, 2), 2),
           (Scheme.MDS_IR, Fraction(3, 4), Fraction(1, 2), 0),
           (Scheme.MDS_R, Fraction(3, 4), Fraction(1, 3), 0)]


@pytest.mark.parametrize("scheme,Ro,Ri,phi", DESIGNS)
def test_realized_lc_dominates_lower_bound(scheme, Ro, Ri, phi):
    params = SystemParams(e=5, u=10, k=15, r=15, mu=0.8) if scheme is Scheme.MDS_R else \
        SystemParams(e=4, u=10, k=12, r=12, mu=1.0)
    A = assignment_for(params.k, params.e, scheme, Ro, Ri)
    rng = np.random.default_rng(list(Scheme).index(scheme) + 100)
    d = delta(params)
    for _ in range(1000):
        lam = rng.exponential(params.beta, params.e)
        if scheme is Scheme.MDS_R:
            design = SchemeDesign(scheme, Ro, Ri, xi=int(rng.integers(1, params.e + 1)))
        else:
            p = int(rng.integers(params.k + phi, A.rows_per_en * params.e + 1))
            design = SchemeDesign(scheme, Ro, Ri, p=p, phi_prime=phi)
        out = run_computation(A, StragglerDraw(lam), design, d)
        assert out.L_c >= lc_lower(lam, out.P, d, params.mu * params.k)
