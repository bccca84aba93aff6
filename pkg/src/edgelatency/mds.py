"""Operation counts of Reed-Solomon erasure decoding (split-radix FFT plus
Berlekamp-Massey) and the MDS decodability predicate.

No field arithmetic is executed; only counts are produced.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction


class BinaryMDSWarning(UserWarning):
    """The requested code rate has no binary MDS code; costs are optimistic."""


def fft_ops(eta: int) -> tuple[int, int]:
    """(additions, multiplications) of a length-2^eta split-radix FFT."""
    if eta < 1:
        raise ValueError("eta must be >= 1")
    half = 2 ** (eta - 1)
    return half * (3 * eta - 5) + 4, half * (eta - 3) + 2


def bm_ops(k: int, Ro, F: float) -> tuple[float, float]:
    """(N_a, N_m) for decoding an [k/Ro, k] code with erased fraction F."""
    if not 0.0 <= F <= 1.0:
        raise ValueError("F must lie in [0, 1]")
    n1 = Fraction(k) / Fraction(Ro)
    if n1.denominator != 1 or n1 < 1:
        raise ValueError("k/Ro must be a positive integer")
    n1 = int(n1)
    eta = max(1, math.ceil(math.log2(n1)))
    a, m = fft_ops(eta)
    quad = n1 * n1 * F
    return a + quad - n1, m + quad


def bm_affine(k: int, Ro) -> tuple[tuple[float, float], tuple[float, float]]:
    """N_a and N_m as ``(intercept, slope)`` in F."""
    a0, m0 = bm_ops(k, Ro, 0.0)
    a1, m1 = bm_ops(k, Ro, 1.0)
    return (a0, a1 - a0), (m0, m1 - m0)


def mds_decodable(v_distinct: int, k: int) -> bool:
    if v_distinct < 0:
        raise ValueError("v_distinct must be nonnegative")
    return v_distinct >= k


def binary_mds_missing(k: int, Ro) -> bool:
    """True when no binary MDS code of length k/Ro exists (not repetition, not SPC)."""
    n1 = Fraction(k) / Fraction(Ro)
    return n1 != k and n1 != k + 1 and k > 1


def warn_binary_mds(k: int, Ro) -> bool:
    missing = binary_mds_missing(k, Ro)
    if missing:
        warnings.warn(f"no binary MDS code with k={k}, rate {Ro}; decoding cost is a lower bound",
                      BinaryMDSWarning, stacklevel=2)
    return missing
