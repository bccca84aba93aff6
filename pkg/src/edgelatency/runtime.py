"""One realisation of the computation phase.

``run_computation`` is a direct, readable event-driven simulator. The
sweeps use :func:`scan_design`, which runs the compiled scan over many
trials and all thresholds p at once; tests check the two agree.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import Scheme, SchemeDesign
from .placement import AssignmentMatrix


class StoppingSetUnreachable(ValueError):
    pass


@dataclass(frozen=True)
class StragglerDraw:
    lambdas: np.ndarray

    def __post_init__(self):
        lam = np.array(self.lambdas, dtype=np.float64)
        if lam.ndim != 1 or np.any(lam < 0):
            raise ValueError("straggling times must be a nonnegative vector")
        lam.setflags(write=False)
        object.__setattr__(self, "lambdas", lam)

    @property
    def e(self) -> int:
        return self.lambdas.size


def draw_stragglers(beta: float, e: int, rng: np.random.Generator) -> StragglerDraw:
    if not beta > 0:
        raise ValueError("beta must be positive")
    return StragglerDraw(rng.exponential(beta, size=e))


def draw_matrix(beta: float, e: int, trials: int, rng: np.random.Generator) -> np.ndarray:
    """(trials, e) straggling times; shared across candidates for common random numbers."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    return np.ascontiguousarray(rng.exponential(beta, size=(trials, e)))


def products_done(lambdas, t: float, delta: float, rows_per_en: int) -> np.ndarray:
    lam = np.asarray(lambdas, dtype=np.float64)
    done = np.floor(np.maximum(t - lam, 0.0) / delta)
    # settle the rounding of the quotient against the event times lam + i*delta themselves
    done = np.where(lam + (done + 1) * delta <= t, done + 1, done)
    done = np.where((done > 0) & (lam + done * delta > t), done - 1, done)
    return np.minimum(done, rows_per_en).astype(np.int64)


@dataclass(frozen=True)
class ComputationOutcome:
    L_c: float
    P: int
    diversities: np.ndarray  # M_i per coded row (index i-1), before discarding
    retained: np.ndarray  # sorted 1-based coded-row indices kept
    M: int

    @property
    def distinct(self) -> int:
        return int(np.count_nonzero(self.diversities))

    def retained_diversities(self) -> np.ndarray:
        return self.diversities[self.retained - 1]


def _top_diversity(div: np.ndarray, count: int) -> np.ndarray:
    """Indices (1-based, sorted) of the ``count`` rows of highest diversity, ties to lowest index."""
    order = np.lexsort((np.arange(div.size), -div))
    return np.sort(order[:count]) + 1


def run_computation(assignment: AssignmentMatrix, draw: StragglerDraw, design: SchemeDesign,
                    delta: float) -> ComputationOutcome:
    A = assignment.entries
    R, e = A.shape
    if draw.e != e:
        raise ValueError("draw length must equal the EN count")
    lam = draw.lambdas
    n1 = assignment.n1
    k = n1 * design.Ro
    if k.denominator != 1:
        raise ValueError("assignment inconsistent with the design rate")
    k = int(k)

    if design.scheme is Scheme.MDS_R:
        finish = lam + R * delta
        xi = design.xi
        if not 1 <= xi <= e:
            raise StoppingSetUnreachable("xi must lie in [1, e]")
        order = np.argsort(finish, kind="stable")
        done_ens = order[:xi]
        L_c = float(finish[order[xi - 1]])
        div = np.bincount(A[:, done_ens].ravel() - 1, minlength=n1)
        retained = np.flatnonzero(div) + 1
        M = int(np.count_nonzero(lam < L_c))
        return ComputationOutcome(L_c, int(div.sum()), div, retained, M)

    target = design.n_distinct_target(k)
    p = design.p
    if p > R * e or target > n1:
        raise StoppingSetUnreachable("threshold exceeds what the queues can deliver")
    times = lam[None, :] + delta * np.arange(1, R + 1)[:, None]
    flat_t = times.ravel()
    flat_r = A.ravel()
    order = np.argsort(flat_t, kind="stable")
    div = np.zeros(n1, dtype=np.int64)
    distinct = 0
    L_c = None
    for cnt, idx in enumerate(order, start=1):
        row = flat_r[idx] - 1
        if div[row] == 0:
            distinct += 1
        div[row] += 1
        if distinct >= target and cnt >= p:
            L_c = float(flat_t[idx])
            P = cnt
            break
    if L_c is None:
        raise StoppingSetUnreachable("stopping predicate never holds")
    if design.scheme is Scheme.RATELESS_IR:
        retained = _top_diversity(div, target)
    else:
        retained = np.flatnonzero(div) + 1
    M = int(np.count_nonzero(lam < L_c))
    return ComputationOutcome(L_c, P, div, retained, M)


@dataclass
class ScanSums:
    """Per-threshold Monte Carlo sums returned by :func:`scan_design`.

    Columns: L_c, user comm, edge comm, distinct count, user total,
    user total squared, edge total, edge total squared.
    """

    p_lo: int
    sums: np.ndarray
    trials: int

    COLS = ("Lc", "comm_u", "comm_e", "distinct", "tot_u", "tot_u2", "tot_e", "tot_e2")

    @property
    def p(self) -> np.ndarray:
        return np.arange(self.p_lo, self.p_lo + self.sums.shape[0])

    def mean(self, col: str) -> np.ndarray:
        return self.sums[:, self.COLS.index(col)] / self.trials

    def total_mean(self, decoder: str) -> np.ndarray:
        return self.mean("tot_u" if decoder == "user" else "tot_e")

    def total_halfwidth(self, decoder: str) -> np.ndarray:
        """95% normal-approximation half-width of the mean total."""
        m = self.total_mean(decoder)
        m2 = self.mean("tot_u2" if decoder == "user" else "tot_e2")
        n = self.trials
        var = np.maximum(m2 - m * m, 0.0) * n / max(n - 1, 1)
        return 1.96 * np.sqrt(var / n)

    def merge(self, other: "ScanSums") -> "ScanSums":
        if other.p_lo != self.p_lo or other.sums.shape != self.sums.shape:
            raise ValueError("incompatible scans")
        return ScanSums(self.p_lo, self.sums + other.sums, self.trials + other.trials)


def scan_design(lam: np.ndarray, delta: float, assignment: AssignmentMatrix, target: int, p_lo: int, p_hi: int,
                retain_top: bool, alpha_u: float, alpha_e: float,
                dec_u=(0.0, 0.0), dec_e=(0.0, 0.0)) -> ScanSums:
    """Accumulate per-threshold latencies over the trials in ``lam``.

    ``dec_u``/``dec_e`` give the decoding latency as intercept + slope x
    (distinct products collected).
    """
    n = assignment.rows_per_en * assignment.e
    if p_hi > n:
        raise StoppingSetUnreachable(f"p={p_hi} exceeds the {n} queued products")
    if target > assignment.n1:
        raise StoppingSetUnreachable("target exceeds the number of distinct coded rows")
    sums = kernels.scan_accumulate(np.ascontiguousarray(lam, dtype=np.float64), float(delta),
                                   assignment.zero_based(), assignment.n1, int(target), int(p_lo), int(p_hi),
                                   bool(retain_top), float(alpha_u), float(alpha_e),
                                   float(dec_u[0]), float(dec_u[1]), float(dec_e[0]), float(dec_e[1]))
    return ScanSums(int(p_lo), sums, lam.shape[0])

