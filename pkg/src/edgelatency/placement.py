"""Assignment matrices (per-EN queue orders) and feasible rate grids."""

from __future__ import annotations

import csv
import io
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import DesignError, Scheme, SystemParams, as_fraction


@dataclass(frozen=True)
class AssignmentMatrix:
    """Coded-row indices (1-based); column j is the processing order of EN j."""

    entries: np.ndarray
    n1: int

    def __post_init__(self):
        a = np.array(self.entries, dtype=np.int64)
        if a.ndim != 2:
            raise ValueError("assignment must be a matrix")
        if a.size and (a.min() < 1 or a.max() > self.n1):
            raise ValueError("entries must lie in [1, n1]")
        for j in range(a.shape[1]):
            if np.unique(a[:, j]).size != a.shape[0]:
                raise ValueError(f"column {j + 1} repeats a coded row")
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def rows_per_en(self) -> int:
        return self.entries.shape[0]

    @property
    def e(self) -> int:
        return self.entries.shape[1]

    def zero_based(self) -> np.ndarray:
        return np.ascontiguousarray(self.entries - 1, dtype=np.int32)

    def multiplicity(self) -> np.ndarray:
        return np.bincount(self.entries.ravel() - 1, minlength=self.n1)

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"en{j + 1}" for j in range(self.e)])
        w.writerows(self.entries.tolist())
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", newline="") as fh:
                fh.write(text)
        return text


def _exact_int(x: Fraction, what: str) -> int:
    if x.denominator != 1:
        raise DesignError(f"{what} = {x} is not an integer")
    return int(x)


def cyclic_assignment(k: int, e: int, Ro, Ri) -> AssignmentMatrix:
    """Row-major fill of 1..k/Ro followed by left-shifted copies.

    A fractional replication factor adds a partial block made of the first
    rows of the last full block, shifted once more.
    """
    Ro, Ri = as_fraction(Ro), as_fraction(Ri)
    L1 = _exact_int(Fraction(k) / (e * Ro), "k/(e*Ro)")
    _exact_int(Fraction(k) / (e * Ro * Ri), "k/(e*Ro*Ri)")
    n1 = L1 * e
    inv = 1 / Ri
    full = math.floor(inv)
    part = _exact_int((1 - math.ceil(inv) + inv) * L1, "partial block rows") if inv.denominator != 1 else 0
    block = np.arange(1, n1 + 1).reshape(L1, e)
    blocks = [block]
    for _ in range(full - 1):
        blocks.append(np.roll(blocks[-1], -1, axis=1))
    if part:
        blocks.append(np.roll(blocks[-1][:part], -1, axis=1))
    return AssignmentMatrix(np.vstack(blocks), n1)


def batch_assignment(k: int, e: int, Ro, Ri) -> AssignmentMatrix:
    """Split k/Ro rows into C(e, 1/Ri) consecutive batches; batch b goes to the
    b-th (1/Ri)-subset of ENs in lexicographic order. Queues are ascending."""
    Ro, Ri = as_fraction(Ro), as_fraction(Ri)
    c = _exact_int(1 / Ri, "1/Ri")
    n1 = _exact_int(Fraction(k) / Ro, "k/Ro")
    if not 1 <= c <= e:
        raise DesignError("1/Ri must lie in [1, e]")
    nb = math.comb(e, c)
    if n1 % nb:
        raise DesignError(f"C({e},{c}) = {nb} does not divide k/Ro = {n1}")
    size = n1 // nb
    queues = [[] for _ in range(e)]
    for b, subset in enumerate(itertools.combinations(range(e), c)):
        rows = range(b * size + 1, (b + 1) * size + 1)
        for j in subset:
            queues[j].extend(rows)
    return AssignmentMatrix(np.array(queues).T, n1)


def assignment_for(k: int, e: int, scheme: Scheme, Ro, Ri) -> AssignmentMatrix:
    if scheme is Scheme.MDS_R:
        return batch_assignment(k, e, Ro, Ri)
    return cyclic_assignment(k, e, Ro, Ri)


def _spread(values: list[int], m: int | None) -> list[int]:
    """Up to m evenly spaced members of a sorted list, ends included."""
    if m is None or len(values) <= m:
        return values
    if m == 1:
        return [values[-1]]
    idx = np.unique(np.round(np.linspace(0, len(values) - 1, m)).astype(int))
    return [values[i] for i in idx]


def feasible_designs(params: SystemParams, scheme: Scheme, phi_prime: int = 0,
                     thin: int | None = None) -> list[tuple[Fraction, Fraction]]:
    """Rate pairs (Ro, Ri) meeting storage, integrality and codeword-count rules.

    ``thin=m`` keeps at most m values of k/Ro, and for each at most m values
    of the replicated row count, always including the extremes (so the
    uncoded corner and every storage-saturating design survive). The
    default enumerates exhaustively.
    """
    k, e = params.k, params.e
    cap = params.storage_rows
    n_max = e * cap
    if cap * e < k:
        return []
    out = []
    if scheme is Scheme.MDS_R:
        for c in range(1, e + 1):
            nb = math.comb(e, c)
            lo = -(-k // nb) * nb
            n1s = [n1 for n1 in range(lo, n_max // c + 1, nb) if n1 * c <= e * cap]
            for n1 in _spread(n1s, thin):
                out.append((Fraction(k, n1), Fraction(1, c)))
        return out

    def n_values(n1):
        ns = list(range(n1, n_max + 1, e))
        return _spread(ns, thin)

    if k % e == 0:
        # Ro = 1: pure repetition, no overhead needed
        for n in n_values(k):
            out.append((Fraction(1), Fraction(k, n)))
    start = k + (phi_prime if scheme is Scheme.RATELESS_IR else 1)
    start = -(-start // e) * e
    n1s = list(range(start, n_max + 1, e))
    for n1 in _spread(n1s, thin):
        for n in n_values(n1):
            out.append((Fraction(k, n1), Fraction(n1, n)))
    return out


def is_feasible(params: SystemParams, scheme: Scheme, Ro, Ri, phi_prime: int = 0) -> bool:
    Ro, Ri = as_fraction(Ro), as_fraction(Ri)
    k, e = params.k, params.e
    if not (0 < Ro <= 1 and 0 < Ri <= 1):
        return False
    n1, n = Fraction(k) / Ro, Fraction(k) / (Ro * Ri)
    if n1.denominator != 1 or n.denominator != 1:
        return False
    n1, n = int(n1), int(n)
    if scheme is Scheme.MDS_R:
        c = 1 / Ri
        return (c.denominator == 1 and c <= e and n1 % math.comb(e, int(c)) == 0
                and n1 * int(c) <= e * params.storage_rows)
    if n1 % e or n % e or n // e > params.storage_rows:
        return False
    if Ro == 1:
        return True
    return n1 >= k + (phi_prime if scheme is Scheme.RATELESS_IR else 1)
