"""Scheme-independent lower bounds on computation, communication and total latency."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import SystemParams, delta as delta_of
from .runtime import draw_matrix


def _cap(mu_k) -> int:
    # an EN stores a whole number of rows, so a fractional mu*k caps at its floor
    return math.floor(mu_k + 1e-9)


def lc_lower(lambdas, p: int, delta: float, mu_k) -> float:
    """Earliest time at which e ENs, each capped at mu*k products, can total p."""
    lam = np.asarray(lambdas, dtype=np.float64)
    cap = _cap(mu_k)
    if p < 0 or p > lam.size * cap:
        raise ValueError(f"p={p} unattainable with {lam.size} ENs of capacity {cap}")
    if p == 0:
        return 0.0
    times = (lam[:, None] + delta * np.arange(1, cap + 1)[None, :]).ravel()
    return float(np.partition(times, p - 1)[p - 1])


def mean_event_times(lam: np.ndarray, delta: float, cap: int) -> np.ndarray:
    """Mean over trials of lc_lower(p) for p = 1..e*cap (index p-1)."""
    lam = np.asarray(lam, dtype=np.float64)
    times = (lam[:, :, None] + delta * np.arange(1, cap + 1)).reshape(lam.shape[0], -1)
    times.sort(axis=1)
    return times.mean(axis=0)


def f_bound(a: float, b: float) -> float:
    """Least sum of 1/m_i over b items whose diversities total a (continuous in a and b)."""
    if not b > 0 or a < b:
        raise ValueError("need a >= b > 0")
    r = a / b
    if float(r).is_integer():
        return b * b / a
    lo, hi = math.floor(r), math.ceil(r)
    return (hi * b - a) / lo + (a - b * lo) / hi


def ldu_lower(p: int, k: int, u: int, q: int, nu: float) -> float:
    if p < k:
        raise ValueError("p must be at least k")
    return u * math.log2(q) / nu * f_bound(p, k)


def ldu_lower_array(p: np.ndarray, k: int, alpha: float) -> np.ndarray:
    p = np.asarray(p, dtype=np.int64)
    lo, hi = p // k, -(-p // k)
    frac = np.where(lo == hi, 0.0, (hi * k - p) / lo + (p - k * lo) / np.where(hi == 0, 1, hi))
    return alpha * np.where(p % k == 0, k * k / p, frac)


def lde_lower(k: int, u: int, q: int, nu: float, e: int) -> float:
    if e < 1:
        raise ValueError("e must be at least 1")
    return u * k * math.log2(q) / (nu * e)


def floor_ceil_diversities(p: int, v: int) -> np.ndarray:
    """Diversities of v distinct products totalling p that minimise sum 1/m_i."""
    if p < v or v < 1:
        raise ValueError("need p >= v >= 1")
    lo = p // v
    n_hi = p - lo * v
    return np.r_[np.full(v - n_hi, lo), np.full(n_hi, lo + 1)].astype(np.int64)


@dataclass(frozen=True)
class BoundEstimate:
    mean: float
    halfwidth: float
    per_trial: np.ndarray


def _estimate(x: np.ndarray) -> BoundEstimate:
    hw = 1.96 * x.std(ddof=1) / math.sqrt(x.size) if x.size > 1 else 0.0
    return BoundEstimate(float(x.mean()), float(hw), x)


def lower_bounds_from(params: SystemParams, lam: np.ndarray) -> tuple[BoundEstimate, BoundEstimate]:
    """Both total-latency bounds (users decode, ENs decode) on given straggling times."""
    k, e = params.k, params.e
    cap = params.storage_rows
    alpha = params.u * params.log2q / params.nu
    p = np.arange(k, e * cap + 1)
    best, first = kernels.lower_bound_scan(np.ascontiguousarray(lam, dtype=np.float64), delta_of(params),
                                           cap, k, ldu_lower_array(p, k, alpha))
    lde = lde_lower(k, params.u, params.q, params.nu, e)
    return _estimate(best), _estimate(first + lde)


def tau_u_lower(params: SystemParams, trials: int, rng: np.random.Generator) -> float:
    """Monte Carlo mean over Lambda of min_p [lc_lower(p) + ldu_lower(p)]."""
    if trials < 1:
        raise ValueError("trials must be positive")
    lam = draw_matrix(params.beta, params.e, trials, rng)
    return lower_bounds_from(params, lam)[0].mean


def tau_e_lower(params: SystemParams, trials: int, rng: np.random.Generator) -> float:
    """Monte Carlo mean of lc_lower(k) plus the edge-decoding downlink bound."""
    if trials < 1:
        raise ValueError("trials must be positive")
    lam = draw_matrix(params.beta, params.e, trials, rng)
    return lower_bounds_from(params, lam)[1].mean
