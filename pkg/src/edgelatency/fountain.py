"""Binary LT code machinery.

Robust Soliton degrees, random encoding rows, inactivation decoding with
operation counts, and the ML decoding-failure upper bound for general q.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.special import gammaln, logsumexp

from . import kernels


@dataclass(frozen=True)
class DegreeDistribution:
    """Probabilities of degrees 1..k; ``omega[d-1]`` is the mass of degree d."""

    omega: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=np.float64)
        if w.ndim != 1 or w.size == 0:
            raise ValueError("omega must be a nonempty vector")
        if np.any(w < 0):
            raise ValueError("negative degree probability")
        if abs(math.fsum(w) - 1.0) > 1e-12:
            raise ValueError("degree probabilities must sum to 1")
        w.setflags(write=False)
        object.__setattr__(self, "omega", w)

    @property
    def k(self) -> int:
        return self.omega.size

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.k + 1), self.omega))

    def cdf(self) -> np.ndarray:
        c = np.cumsum(self.omega)
        c[-1] = 1.0
        return c

    @classmethod
    def point_mass(cls, k: int, d: int) -> "DegreeDistribution":
        w = np.zeros(k)
        w[d - 1] = 1.0
        return cls(w)


def robust_soliton(k: int, gamma: int, zeta: float) -> DegreeDistribution:
    """Robust Soliton distribution with its spike at degree ``gamma``."""
    if not 1 <= gamma <= k:
        raise ValueError("gamma must lie in [1, k]")
    if not 0 < zeta < 1:
        raise ValueError("zeta must lie in (0, 1)")
    d = np.arange(1, k + 1, dtype=np.float64)
    rho = np.empty(k)
    rho[0] = 1.0 / k
    rho[1:] = 1.0 / (d[1:] * (d[1:] - 1.0))
    tau = np.zeros(k)
    tau[: gamma - 1] = 1.0 / (d[: gamma - 1] * gamma)
    tau[gamma - 1] = max(math.log(k / (gamma * zeta)), 0.0) / gamma
    w = rho + tau
    return DegreeDistribution(w / math.fsum(w))


@dataclass(frozen=True)
class EncodingRow:
    """Neighbour set of one coded symbol, 1-based and sorted."""

    neighbors: tuple[int, ...]

    def __post_init__(self):
        nb = tuple(int(x) for x in self.neighbors)
        if len(set(nb)) != len(nb) or not nb:
            raise ValueError("neighbours must be distinct and nonempty")
        object.__setattr__(self, "neighbors", tuple(sorted(nb)))

    @property
    def degree(self) -> int:
        return len(self.neighbors)


def sample_row(dist: DegreeDistribution, k: int, rng: np.random.Generator) -> EncodingRow:
    d = int(np.searchsorted(dist.cdf(), rng.random(), side="right")) + 1
    d = min(d, k)
    nb = rng.choice(k, size=d, replace=False) + 1
    return EncodingRow(tuple(nb.tolist()))


def sample_rows(dist: DegreeDistribution, k: int, n: int, rng: np.random.Generator):
    """Draw ``n`` rows at once. Returns CSR ``(row_ptr, cols)`` with 0-based sorted columns.

    Neighbours are drawn with replacement and colliding entries redrawn until
    every row is duplicate-free; the procedure is symmetric in the labels, so
    each neighbour set is uniform among sets of its size. Rows of degree above
    k/2 go through ``Generator.choice`` instead, where redrawing would crawl.
    """
    if dist.k != k:
        raise ValueError("distribution length must equal k")
    deg = np.minimum(np.searchsorted(dist.cdf(), rng.random(n), side="right") + 1, k)
    big = deg > k // 2
    small_deg = np.where(big, 0, deg)
    rid = np.repeat(np.arange(n), small_deg)
    col = rng.integers(0, k, size=rid.size)
    while True:
        key = rid.astype(np.int64) * k + col
        o = np.argsort(key, kind="stable")
        rid, col, key = rid[o], col[o], key[o]
        dup = np.flatnonzero(key[1:] == key[:-1]) + 1
        if dup.size == 0:
            break
        col[dup] = rng.integers(0, k, size=dup.size)
    row_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(deg, out=row_ptr[1:])
    cols = np.empty(row_ptr[-1], dtype=np.int32)
    small_ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(small_deg, out=small_ptr[1:])
    # small rows keep their sorted draws; shift each block from its packed to its CSR offset
    cols[np.repeat(row_ptr[:-1] - small_ptr[:-1], small_deg) + np.arange(col.size)] = col
    for r in np.flatnonzero(big):
        cols[row_ptr[r]:row_ptr[r + 1]] = np.sort(rng.choice(k, size=deg[r], replace=False))
    return row_ptr, cols


def rows_to_csr(rows: Sequence[EncodingRow]):
    row_ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    np.cumsum([r.degree for r in rows], out=row_ptr[1:])
    cols = np.fromiter((c - 1 for r in rows for c in r.neighbors), dtype=np.int32, count=row_ptr[-1])
    return row_ptr, cols


def csr_to_masks(row_ptr, cols) -> np.ndarray:
    """Bitmask per row (k <= 64)."""
    bits = np.left_shift(np.uint64(1), cols.astype(np.uint64))
    return np.bitwise_or.reduceat(bits, row_ptr[:-1]) if bits.size else np.zeros(0, np.uint64)


@dataclass(frozen=True)
class DecodeCost:
    matrix_ops_add: int
    per_vector_ops_add: int
    success: bool
    n_inactivated: int = 0

    @property
    def mults(self) -> int:
        return 0

    def additions(self, n_vectors: int = 1) -> int:
        """Total GF(2) additions to decode ``n_vectors`` right-hand sides."""
        return self.matrix_ops_add + n_vectors * self.per_vector_ops_add


def inactivation_decode(rows, k: int, rhs=None):
    """Decode a received set of rows by peeling plus inactivation.

    ``rows`` is a sequence of :class:`EncodingRow` or a CSR pair
    ``(row_ptr, cols)`` with 0-based columns. With ``rhs`` (one uint64 word
    per row, i.e. 64 parallel binary right-hand sides) the solution is
    returned alongside the cost.
    """
    if isinstance(rows, tuple) and len(rows) == 2 and isinstance(rows[0], np.ndarray):
        row_ptr, cols = rows
    else:
        row_ptr, cols = rows_to_csr(list(rows))
    if row_ptr.size < 2:
        raise ValueError("rows must be nonempty")
    ok, mops, vops, ninact, sol = kernels.inactivation_decode(
        np.ascontiguousarray(row_ptr, dtype=np.int64), np.ascontiguousarray(cols, dtype=np.int32), int(k), rhs)
    cost = DecodeCost(int(mops), int(vops), bool(ok), int(ninact))
    if rhs is None:
        return cost
    return cost, sol


def estimate_decode_cost(dist: DegreeDistribution, k: int, n_rows: int, samples: int,
                         rng: np.random.Generator):
    """Mean operation counts of decoding ``n_rows`` fresh LT rows.

    Returns (mean matrix ops, mean per-vector ops, success rate, per-sample array (samples, 2)).
    """
    out = np.empty((samples, 2))
    ok = 0
    for s in range(samples):
        c = inactivation_decode(sample_rows(dist, k, n_rows, rng), k)
        out[s] = c.matrix_ops_add, c.per_vector_ops_add
        ok += c.success
    return float(out[:, 0].mean()), float(out[:, 1].mean()), ok / samples, out


# ---------------------------------------------------------------------------
# failure bound

def krawtchouk(d: int, i: int, n: int, q: int) -> int:
    """h_d(i; n) by its defining alternating sum (exact)."""
    return sum((-1) ** j * (q - 1) ** (d - j) * math.comb(i, j) * math.comb(n - i, d - j)
               for j in range(0, min(i, d) + 1))


def _weighted_ratio_exact(omega: np.ndarray, n: int, q: int) -> np.ndarray:
    """sum_d omega_d h_d(i)/h_d(0) for i = 0..n via the integer three-term recurrence."""
    K_prev = [1] * (n + 1)
    K_cur = [(q - 1) * n - q * i for i in range(n + 1)]
    acc = [[] for _ in range(n + 1)]
    K0 = 1
    for d in range(1, n + 1):
        if d > 1:
            a = d - 1
            nxt = [(((n - a) * (q - 1) + a - q * i) * K_cur[i] - (q - 1) * (n - a + 1) * K_prev[i]) // d
                   for i in range(n + 1)]
            K_prev, K_cur = K_cur, nxt
        K0 = K0 * (q - 1) * (n - d + 1) // d
        w = omega[d - 1]
        if w:
            for i in range(n + 1):
                acc[i].append(w * float(Fraction(K_cur[i], K0)))
    return np.array([math.fsum(a) for a in acc])


def bracket_terms(k: int, q: int, dist: DegreeDistribution) -> np.ndarray:
    """bracket(i) for i = 0..k, clamped to [0, 1]."""
    if q < 2:
        raise ValueError("q must be at least 2")
    if dist.k != k:
        raise ValueError("distribution length must equal k")
    if q == 2 and k > 64:
        S = kernels.krawtchouk_ratio_q2(np.ascontiguousarray(dist.omega, dtype=np.float64), k)
    else:
        S = _weighted_ratio_exact(dist.omega, k, q)
    return np.clip(1.0 / q + (q - 1) / q * S, 0.0, 1.0)


def failure_bound_curve(k: int, phis, q: int, dist: DegreeDistribution) -> np.ndarray:
    """Upper bound on the ML failure probability for each overhead in ``phis``."""
    phis = np.atleast_1d(np.asarray(phis, dtype=np.float64))
    if np.any(phis < 0):
        raise ValueError("phi must be nonnegative")
    br = bracket_terms(k, q, dist)[1:]
    i = np.arange(1, k + 1)
    logc = gammaln(k + 1) - gammaln(i + 1) - gammaln(k - i + 1) + (i - 1) * math.log(q - 1)
    out = np.empty(phis.size)
    with np.errstate(divide="ignore"):
        logb = np.log(br)
    for j, phi in enumerate(phis):
        terms = logc + (k + phi) * logb
        terms = terms[np.isfinite(terms)]
        out[j] = 0.0 if terms.size == 0 else min(1.0, float(np.exp(logsumexp(terms))))
    return out


def failure_bound(k: int, phi: int, q: int, dist: DegreeDistribution) -> float:
    if phi < 0:
        raise ValueError("phi must be nonnegative")
    return float(failure_bound_curve(k, [phi], q, dist)[0])


def empirical_failure_rate(k: int, phis, dist: DegreeDistribution, trials: int,
                           rng: np.random.Generator, chunk: int = 10000) -> np.ndarray:
    """Monte Carlo P(rank of the first k+phi rows < k) for binary codes, k <= 64."""
    phis = np.asarray(phis, dtype=np.int64)
    n = int(k + phis.max())
    need = []
    done = 0
    while done < trials:
        t = min(chunk, trials - done)
        row_ptr, cols = sample_rows(dist, k, t * n, rng)
        masks = csr_to_masks(row_ptr, cols).reshape(t, n)
        need.append(kernels.first_full_rank(np.ascontiguousarray(masks), k))
        done += t
    need = np.concatenate(need)
    need = np.where(need < 0, n + 1, need)
    return np.array([(need > k + p).mean() for p in phis])
