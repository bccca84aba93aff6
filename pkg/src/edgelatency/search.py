"""Design optimisers.

Irregular-repetition schemes are searched in two stages on common random
numbers: a short pilot bounds the useful range of p for every rate pair, a
coarse pass ranks all (p, Ro, Ri), and a long pass re-estimates a shortlist.
MDS-R is optimised exactly from its closed-form expectations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fountain import estimate_decode_cost, failure_bound, robust_soliton
from .latency import mdsr_decodable, mdsr_totals
from .mds import bm_affine, binary_mds_missing
from .model import LatencyBreakdown, Scheme, SchemeDesign, SystemParams, delta as delta_of, psi
from .placement import cyclic_assignment, feasible_designs
from .bounds import mean_event_times
from .runtime import ScanSums, draw_matrix, scan_design

DECODERS = ("user", "edge")


class NoFeasibleDesign(ValueError):
    pass


@dataclass(frozen=True)
class Candidate:
    design: SchemeDesign
    breakdown: LatencyBreakdown
    halfwidth: float = 0.0

    @property
    def total(self) -> float:
        return self.breakdown.total


@dataclass
class SearchResult:
    best: dict  # decoder -> Candidate
    fine: dict = field(default_factory=dict)  # decoder -> list[Candidate] re-estimated on the long run
    pruned: list = field(default_factory=list)  # (Ro, Ri) dropped after the pilot


def default_phi_prime(params: SystemParams) -> int:
    """Overhead giving k + phi' = 2 mu k collected distinct products."""
    return max(0, math.floor(2 * Fraction(params.mu).limit_denominator(10**9) * params.k) - params.k)


def rateless_decode_ops(params: SystemParams, phi_prime: int, gamma: int, zeta: float, samples: int,
                        rng: np.random.Generator) -> tuple[float, float]:
    """Mean (matrix ops, per-vector ops) of decoding k + phi' LT rows."""
    dist = robust_soliton(params.k, min(gamma, params.k), zeta)
    mat, vec, _, _ = estimate_decode_cost(dist, params.k, params.k + phi_prime, samples, rng)
    return mat, vec


@dataclass
class _Pair:
    Ro: Fraction
    Ri: Fraction
    target: int
    n: int
    dec_u: tuple
    dec_e: tuple
    assignment: object = None

    def get_assignment(self, params):
        if self.assignment is None:
            self.assignment = cyclic_assignment(params.k, params.e, self.Ro, self.Ri)
        return self.assignment


def _ir_pairs(params, scheme, phi_prime, dec_ops, thin):
    k, f, u = params.k, params.f_cpu, params.u
    pairs = []
    for Ro, Ri in feasible_designs(params, scheme, phi_prime, thin=thin):
        n1 = int(k / Ro)
        n = int(n1 / Ri)
        if Ro == 1:
            du = de = (0.0, 0.0)
            target = k
        elif scheme is Scheme.RATELESS_IR:
            target = k + phi_prime
            mu_, vu = dec_ops["user"]
            me, ve = dec_ops["edge"]
            du = ((mu_ + vu) / (params.n_u * f), 0.0)
            de = ((me + u * ve) / (params.n_e * f), 0.0)
        else:
            target = k
            (a0, a1), (m0, m1) = bm_affine(k, Ro)
            c0, c1 = a0 + m0, a1 + m1
            # F = 1 - distinct/n1, so N = (c0 + c1) - (c1/n1) * distinct
            du = ((c0 + c1) / (params.n_u * f), -c1 / (n1 * params.n_u * f))
            de = (u * (c0 + c1) / (params.n_e * f), -u * c1 / (n1 * params.n_e * f))
        pairs.append(_Pair(Ro, Ri, target, n, du, de))
    return pairs


def _scan(params, lam, pair, p_lo, p_hi, scheme) -> ScanSums:
    alpha_u = params.u * params.log2q / params.nu
    alpha_e = params.u * params.k * params.log2q / params.nu
    return scan_design(lam, delta_of(params), pair.get_assignment(params), pair.target, p_lo, p_hi,
                       scheme is Scheme.RATELESS_IR, alpha_u, alpha_e, pair.dec_u, pair.dec_e)


def _candidate(params, scheme, pair, sums: ScanSums, idx, decoder, phi_prime, soliton) -> Candidate:
    p = int(sums.p[idx])
    comp = float(sums.mean("Lc")[idx])
    dist = float(sums.mean("distinct")[idx])
    if decoder == "user":
        comm = float(sums.mean("comm_u")[idx])
        dec = pair.dec_u[0] + pair.dec_u[1] * dist
    else:
        comm = float(sums.mean("comm_e")[idx])
        dec = pair.dec_e[0] + pair.dec_e[1] * dist
    gamma, zeta = soliton.get(decoder, (None, None)) if soliton else (None, None)
    rl = scheme is Scheme.RATELESS_IR and pair.Ro != 1
    design = SchemeDesign(scheme, pair.Ro, pair.Ri, p=p,
                          phi_prime=phi_prime if rl else 0,
                          gamma=gamma if rl else None, zeta=zeta if rl else None)
    hw = float(sums.total_halfwidth(decoder)[idx])
    extras = {"mean_distinct": dist, "trials": sums.trials,
              "binary_mds_missing": scheme is Scheme.MDS_IR and binary_mds_missing(params.k, pair.Ro)}
    bd = LatencyBreakdown(comp, max(dec, 0.0), comm, psi(params), extras)
    return Candidate(design, bd, hw)


def search_ir(params: SystemParams, scheme: Scheme, lam_coarse: np.ndarray, lam_fine: np.ndarray, *,
              phi_prime: int | None = None, dec_ops: dict | None = None, soliton: dict | None = None,
              thin: int | None = 6, shortlist: int = 10, pilot: int = 200, slack: float = 0.1,
              band: float = 1.0, decoders=DECODERS) -> SearchResult:
    """Two-stage common-random-number search for Rateless-IR or MDS-IR.

    ``band`` scales the coarse 95% half-width of the leading entry; shortlisted
    entries beyond leader + band x half-width are not re-estimated.
    """
    if scheme is Scheme.MDS_R:
        raise ValueError("use search_mdsr for MDS-R")
    if phi_prime is None:
        phi_prime = default_phi_prime(params) if scheme is Scheme.RATELESS_IR else 0
    if scheme is Scheme.RATELESS_IR and dec_ops is None:
        dec_ops = {d: (0.0, 0.0) for d in DECODERS}
    pairs = _ir_pairs(params, scheme, phi_prime, dec_ops, thin)
    if not pairs:
        raise NoFeasibleDesign(f"no feasible {scheme.value} design")

    # pilot: a few trials over the p range that can still matter. Any scheme's
    # L_c(p) is at least the p-th earliest event of the capped progressions, so
    # p beyond the point where that mean exceeds the running limit is skipped.
    # Most-replicated pairs go first since they tend to set a low limit early.
    lam_p = lam_coarse[:min(pilot, lam_coarse.shape[0])]
    floor_t = mean_event_times(lam_p, delta_of(params), params.storage_rows)
    pilot_sums = [None] * len(pairs)
    best_pilot = math.inf
    for idx in sorted(range(len(pairs)), key=lambda i: (-pairs[i].n, i)):
        pr = pairs[idx]
        p_hi = pr.n
        if math.isfinite(best_pilot):
            p_hi = min(p_hi, int(np.searchsorted(floor_t, (1.0 + slack) * best_pilot, side="right")))
        if p_hi < pr.target:
            continue
        pilot_sums[idx] = s = _scan(params, lam_p, pr, pr.target, p_hi, scheme)
        best_pilot = min(best_pilot, max(float(s.total_mean(d).min()) for d in decoders))
    limit = (1.0 + slack) * max(min(float(s.total_mean(d).min()) for s in pilot_sums if s is not None)
                                for d in decoders)
    keep, pruned = [], []
    for pr, s in zip(pairs, pilot_sums):
        if s is None:
            pruned.append((pr.Ro, pr.Ri))
            continue
        # totals are bounded below by L_c, which is nondecreasing in p
        hi = int(np.searchsorted(s.mean("Lc"), limit, side="right"))
        if hi == 0 or min(float(s.total_mean(d).min()) for d in decoders) > limit:
            pruned.append((pr.Ro, pr.Ri))
            continue
        keep.append((pr, pr.target + hi - 1))

    # coarse: every surviving (p, Ro, Ri)
    ranked = {d: [] for d in decoders}
    for i, (pr, p_hi) in enumerate(keep):
        s = _scan(params, lam_coarse, pr, pr.target, p_hi, scheme)
        for d in decoders:
            tot, hw = s.total_mean(d), s.total_halfwidth(d)
            for j in np.argsort(tot, kind="stable")[:shortlist]:
                ranked[d].append((float(tot[j]), i, int(s.p[j]), float(hw[j])))
    # re-estimate only entries the coarse run cannot separate from its leader;
    # on common random numbers the leader's own half-width is a loose margin
    short = {}
    for d in decoders:
        top = sorted(ranked[d])[:shortlist]
        edge = top[0][0] + band * top[0][3]
        short[d] = [(t, i, p) for t, i, p, _ in top if t <= edge]

    # fine: long run on the shortlisted pairs
    span = {}
    for d in decoders:
        for _, i, p in short[d]:
            lo, hi = span.get(i, (p, p))
            span[i] = (min(lo, p), max(hi, p))
    fine_sums = {i: _scan(params, lam_fine, keep[i][0], lo, hi, scheme) for i, (lo, hi) in sorted(span.items())}
    best, fine = {}, {}
    for d in decoders:
        cands = []
        for _, i, p in short[d]:
            s = fine_sums[i]
            cands.append(_candidate(params, scheme, keep[i][0], s, p - s.p_lo, d, phi_prime, soliton))
        fine[d] = cands
        best[d] = min(cands, key=lambda c: (c.total, c.design.p))
    return SearchResult(best, fine, pruned)


def _mdsr_exact(params: SystemParams, decoders, thin):
    d = delta_of(params)
    table = {dec: [] for dec in decoders}
    for Ro, Ri in feasible_designs(params, Scheme.MDS_R, thin=thin):
        for xi in range(1, params.e + 1):
            if not mdsr_decodable(xi, params.e, Ro, Ri):
                continue
            design = SchemeDesign(Scheme.MDS_R, Ro, Ri, xi=xi)
            for dec in decoders:
                bd = mdsr_totals(params, xi, Ro, Ri, dec, d)
                bd.extras["binary_mds_missing"] = binary_mds_missing(params.k, Ro)
                table[dec].append(Candidate(design, bd, 0.0))
    return table


def _mdsr_screen(params: SystemParams, decoders, thin):
    """Vectorised closed-form totals over every k/Ro for each (xi, 1/Ri).

    Returns decoder -> list of (total, n1, xi, c) for the decodable designs.
    """
    k, e, f = params.k, params.e, params.f_cpu
    d = delta_of(params)
    alpha = params.u * params.log2q / params.nu
    by_c = {}
    for Ro, Ri in feasible_designs(params, Scheme.MDS_R, thin=thin):
        by_c.setdefault(int(1 / Ri), []).append(int(k / Ro))
    out = {dec: [] for dec in decoders}
    H = np.r_[0.0, np.cumsum(1.0 / np.arange(1, e + 1))]
    for c, n1s in sorted(by_c.items()):
        n1 = np.array(n1s, dtype=np.int64)
        B = math.comb(e, c)
        eta = np.maximum(1, np.ceil(np.log2(n1)).astype(np.int64))
        half = 2.0 ** (eta - 1)
        fft = half * (3 * eta - 5) + 4 + half * (eta - 3) + 2
        for xi in range(1, e + 1):
            held = B - math.comb(e - xi, c)
            ok = k * B <= n1 * held  # Ro <= held / B, exactly
            if not ok.any():
                continue
            F = math.comb(e - xi, c) / B
            ops = np.where(n1 == k, 0.0, fft + 2.0 * n1 * n1 * F - n1)
            comp = params.beta * (H[e] - H[e - xi]) + n1 * c / e * d
            for dec in decoders:
                if dec == "user":
                    gsum = sum(math.comb(xi, m) * math.comb(e - xi, c - m) / m
                               for m in range(max(1, c + xi - e), min(c, xi) + 1)) / B
                    tot = comp + ops / (params.n_u * f) + alpha * gsum * n1
                else:
                    tot = comp + params.u * ops / (params.n_e * f) + alpha * k / xi
                out[dec].extend((float(t), int(m), xi, c) for t, m in zip(tot[ok], n1[ok]))
    return out


def search_mdsr(params: SystemParams, decoders=DECODERS, thin: int | None = None,
                exact: bool = False) -> SearchResult:
    """Minimisation of the closed-form MDS-R latency over (xi, Ro, Ri).

    Ties go to the larger Ro, then the smaller xi. The default screens in
    floating point and re-evaluates the winner exactly; ``exact=True``
    builds every candidate with :func:`mdsr_totals`.
    """
    if exact:
        table = _mdsr_exact(params, decoders, thin)
        best = {}
        for dec in decoders:
            if not table[dec]:
                raise NoFeasibleDesign("no decodable MDS-R design")
            best[dec] = min(table[dec], key=lambda c: (c.total, -c.design.Ro, c.design.xi))
        return SearchResult(best, table)
    screen = _mdsr_screen(params, decoders, thin)
    best, table = {}, {}
    for dec in decoders:
        if not screen[dec]:
            raise NoFeasibleDesign("no decodable MDS-R design")
        top = sorted(screen[dec], key=lambda t: (t[0], t[1], t[2]))[:10]
        cands = []
        for _, n1, xi, c in top:
            Ro, Ri = Fraction(params.k, n1), Fraction(1, c)
            bd = mdsr_totals(params, xi, Ro, Ri, dec, delta_of(params))
            bd.extras["binary_mds_missing"] = binary_mds_missing(params.k, Ro)
            cands.append(Candidate(SchemeDesign(Scheme.MDS_R, Ro, Ri, xi=xi), bd, 0.0))
        table[dec] = cands
        best[dec] = cands[0]
    return SearchResult(best, table)


def optimize_design(params: SystemParams, scheme: Scheme, decoder: str, trials: int,
                    rng: np.random.Generator, *, coarse_trials: int = 2000, **kw):
    """Best design and its latency for one scheme and decoding placement."""
    if decoder not in DECODERS:
        raise ValueError("decoder must be 'user' or 'edge'")
    if scheme is Scheme.MDS_R:
        c = search_mdsr(params, (decoder,)).best[decoder]
        return c.design, c.breakdown
    lam_c = draw_matrix(params.beta, params.e, coarse_trials, rng)
    lam_f = draw_matrix(params.beta, params.e, trials, rng)
    c = search_ir(params, scheme, lam_c, lam_f, decoders=(decoder,), **kw).best[decoder]
    return c.design, c.breakdown


def optimize_soliton(k: int, phi_prime: int, q: int, Pf: float, gammas, zetas, rng: np.random.Generator,
                     samples: int = 200, n_vectors: int = 1):
    """Grid point (gamma, zeta) of least mean decoding work subject to the failure bound.

    Decoding work is matrix ops + n_vectors x per-vector ops, averaged over
    ``samples`` decodes of k + phi' fresh rows. Returns (gamma, zeta, table)
    where table rows are (gamma, zeta, bound, mean ops).
    """
    if not 0 < Pf <= 1:
        raise ValueError("Pf must lie in (0, 1]")
    grid = [(int(g), float(z)) for g in gammas for z in zetas if 1 <= g <= k]
    if not grid:
        raise ValueError("empty grid")
    table = []
    for g, z in grid:
        dist = robust_soliton(k, g, z)
        pf = failure_bound(k, phi_prime, q, dist) if Pf < 1 else 0.0
        if pf > Pf:
            table.append((g, z, pf, math.inf))
            continue
        mat, vec, _, _ = estimate_decode_cost(dist, k, k + phi_prime, samples, rng)
        table.append((g, z, pf, mat + n_vectors * vec))
    ok = [row for row in table if math.isfinite(row[3])]
    if not ok:
        raise NoFeasibleDesign("no (gamma, zeta) meets the failure-probability target")
    g, z, _, _ = min(ok, key=lambda row: (row[3], row[0], row[1]))
    return g, z, table
