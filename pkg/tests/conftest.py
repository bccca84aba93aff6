"""Shared oracles and fixtures.

The GF(2) helpers below are deliberately naive (Python ints as bit rows,
textbook Gauss-Jordan) so that they share no code or strategy with the
peeling/inactivation decoder under test.
"""

from __future__ import annotations

import os

import numpy as np
import pytest

GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def gf2_rank(rows: list[int]) -> int:
    """Rank of binary rows given as Python-int bitmasks."""
    rows = [r for r in rows if r]
    rank = 0
    width = max((r.bit_length() for r in rows), default=0)
    for col in range(width):
        piv = next((i for i in range(rank, len(rows)) if rows[i] >> col & 1), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] >> col & 1:
                rows[i] ^= rows[rank]
        rank += 1
    return rank


def gf2_solve(rows: list[int], rhs: list[int], k: int):
    """Solve sum_{j in row} x_j = rhs over GF(2) (rhs words are 64 parallel systems).

    Returns the list of k solution words, or None when the rank is below k.
    """
    rows, rhs = list(rows), list(rhs)
    rank = 0
    where = [-1] * k
    for col in range(k):
        piv = next((i for i in range(rank, len(rows)) if rows[i] >> col & 1), None)
        if piv is None:
            return None
        rows[rank], rows[piv] = rows[piv], rows[rank]
        rhs[rank], rhs[piv] = rhs[piv], rhs[rank]
        for i in range(len(rows)):
            if i != rank and rows[i] >> col & 1:
                rows[i] ^= rows[rank]
                rhs[i] ^= rhs[rank]
        where[col] = rank
        rank += 1
    return [rhs[where[c]] for c in range(k)]


def masks_of(row_ptr, cols) -> list[int]:
    out = []
    for r in range(len(row_ptr) - 1):
        m = 0
        for c in cols[row_ptr[r]:row_ptr[r + 1]]:
            m |= 1 << int(c)
        out.append(m)
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["cython", "python"])
def core(request):
    """Each kernel backend in turn (compiled one skipped when not built)."""
    if request.param == "cython":
        return pytest.importorskip("edgelatency._core")
    from edgelatency import _pycore
    return _pycore
