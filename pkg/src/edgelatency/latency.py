"""Per-phase latencies and totals, including the MDS-R closed forms."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

from .mds import bm_ops
from .model import LatencyBreakdown, SystemParams, as_fraction, psi


def comm_user(diversities, u: int, q: int, nu: float) -> float:
    """Sequential downlink of the retained products, M_i of them in parallel."""
    m = np.asarray(diversities, dtype=np.float64)
    if m.size == 0:
        return 0.0
    if np.any(m <= 0):
        raise ValueError("retained products must have diversity >= 1")
    return u * math.log2(q) / nu * float(np.sum(1.0 / m))


def comm_edge(k: int, u: int, q: int, nu: float, M: int) -> float:
    if M < 1:
        raise ValueError("M must be at least 1")
    return u * k * math.log2(q) / (nu * M)


def decode_latency(N_a: float, N_m: float, cores: int, f_cpu: float) -> float:
    if N_a < 0 or N_m < 0:
        raise ValueError("operation counts must be nonnegative")
    return (N_a + N_m) / (cores * f_cpu)


def harmonic(i: int) -> float:
    return math.fsum(1.0 / j for j in range(1, i + 1))


def mdsr_expected_Lc(xi: int, e: int, beta: float, k: int, Ro, Ri, delta: float) -> float:
    """Mean of the xi-th order statistic of e exponentials plus a full queue."""
    if not 1 <= xi <= e:
        raise ValueError("xi must lie in [1, e]")
    rows = Fraction(k) / (e * as_fraction(Ro) * as_fraction(Ri))
    return beta * (harmonic(e) - harmonic(e - xi)) + float(rows) * delta


def _inv_ri(Ri) -> int:
    c = 1 / as_fraction(Ri)
    if c.denominator != 1:
        raise ValueError("1/Ri must be an integer")
    return int(c)


def mdsr_g(m: int, xi: int, e: int, Ri, n1: int) -> float:
    """Expected number of distinct products of diversity m after xi ENs finish."""
    c = _inv_ri(Ri)
    if m < max(0, c + xi - e) or m > min(c, xi):
        return 0.0
    return math.comb(xi, m) * math.comb(e - xi, c - m) * n1 / math.comb(e, c)


def mdsr_F(xi: int, e: int, Ri) -> float:
    """Fraction of coded rows held only by the e - xi unfinished ENs."""
    c = _inv_ri(Ri)
    return math.comb(e - xi, c) / math.comb(e, c)


def mdsr_decodable(xi: int, e: int, Ro, Ri) -> bool:
    """C(e, 1/Ri) - C(e - xi, 1/Ri) >= Ro C(e, 1/Ri), in exact arithmetic."""
    c = _inv_ri(Ri)
    B = math.comb(e, c)
    return B - math.comb(e - xi, c) >= as_fraction(Ro) * B


def mdsr_comm_sum(xi: int, e: int, Ri, n1: int) -> float:
    """sum_{m>=1} g(m)/m."""
    c = _inv_ri(Ri)
    return math.fsum(mdsr_g(m, xi, e, Ri, n1) / m for m in range(1, min(c, xi) + 1))


def decode_ops_mds(k: int, Ro, F: float) -> float:
    """N_a + N_m for one vector; zero for pure replication."""
    if as_fraction(Ro) == 1:
        return 0.0
    a, m = bm_ops(k, Ro, F)
    return a + m


def totals(comp: float, dec: float, comm: float, params: SystemParams, **extras) -> LatencyBreakdown:
    if comp < 0 or dec < 0 or comm < 0:
        raise ValueError("latency components must be nonnegative")
    return LatencyBreakdown(comp=comp, dec=dec, comm=comm, psi=psi(params), extras=extras)


def outcome_totals(outcome, decode_ops: tuple[float, float], params: SystemParams,
                   decoder: str) -> LatencyBreakdown:
    """Totals for one simulated trial.

    ``decode_ops`` is (matrix ops, per-vector ops); a user decodes one vector,
    an EN decodes u of them.
    """
    mat, per_vec = decode_ops
    if decoder == "user":
        comm = comm_user(outcome.retained_diversities(), params.u, params.q, params.nu)
        dec = decode_latency(mat + per_vec, 0.0, params.n_u, params.f_cpu)
    elif decoder == "edge":
        comm = comm_edge(params.k, params.u, params.q, params.nu, outcome.M)
        dec = decode_latency(mat + params.u * per_vec, 0.0, params.n_e, params.f_cpu)
    else:
        raise ValueError("decoder must be 'user' or 'edge'")
    return totals(outcome.L_c, dec, comm, params)


def mdsr_totals(params: SystemParams, xi: int, Ro, Ri, decoder: str, delta: float) -> LatencyBreakdown:
    """Closed-form expected latencies of MDS-R with all collected products kept."""
    k, e = params.k, params.e
    Ro, Ri = as_fraction(Ro), as_fraction(Ri)
    n1 = Fraction(k) / Ro
    if n1.denominator != 1:
        raise ValueError("k/Ro must be an integer")
    n1 = int(n1)
    comp = mdsr_expected_Lc(xi, e, params.beta, k, Ro, Ri, delta)
    ops = decode_ops_mds(k, Ro, mdsr_F(xi, e, Ri))
    if decoder == "user":
        comm = params.u * params.log2q / params.nu * mdsr_comm_sum(xi, e, Ri, n1)
        dec = decode_latency(ops, 0.0, params.n_u, params.f_cpu)
    elif decoder == "edge":
        comm = comm_edge(k, params.u, params.q, params.nu, xi)
        dec = decode_latency(params.u * ops, 0.0, params.n_e, params.f_cpu)
    else:
        raise ValueError("decoder must be 'user' or 'edge'")
    return totals(comp, dec, comm, params)
