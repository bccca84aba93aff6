"""Pure-Python/numpy versions of the compiled kernels in ``_core``.

Same signatures, same event ordering and tie rules, same operation counts.
Used when the extension is unavailable and as a cross-check in tests.
"""

from __future__ import annotations

import numpy as np


def _event_order(lam_row, delta, cap):
    """Event (EN, i) pairs in the order the compiled scan emits them."""
    e = lam_row.shape[0]
    c = lam_row / delta
    fl = np.floor(c).astype(np.int64)
    fr = c - fl
    rank = np.empty(e, dtype=np.int64)
    rank[np.lexsort((np.arange(e), fr))] = np.arange(e)
    i = np.arange(1, cap + 1)
    slot = (fl[:, None] + i[None, :]).ravel()
    en = np.repeat(np.arange(e), cap)
    ii = np.tile(i, e)
    order = np.lexsort((rank[en], slot))
    en, ii = en[order], ii[order]
    return en, ii, lam_row[en] + ii * delta


def scan_accumulate(lam, delta, A, n1, target, p_lo, p_hi, retain_top,
                    alpha_u, alpha_e, du0, du1, de0, de1):
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    A = np.ascontiguousarray(A, dtype=np.int32)
    T, e = lam.shape
    R = A.shape[0]
    P = p_hi - p_lo + 1
    if P < 1:
        raise ValueError("empty p range")
    if A.shape[1] != e:
        raise ValueError("assignment width must equal the EN count")
    acc = np.zeros((P, 8))
    diff = np.zeros((P + 1, 8))
    for t in range(T):
        en, ii, tm = _event_order(lam[t], delta, R)
        rows = A[ii - 1, en]
        n = rows.shape[0]
        # occurrence number of each event within its row (0 for first)
        o = np.argsort(rows, kind="stable")
        srt = rows[o]
        start = np.r_[0, np.flatnonzero(np.diff(srt)) + 1]
        run = np.repeat(start, np.diff(np.r_[start, n]))
        m_before = np.empty(n, dtype=np.int64)
        m_before[o] = np.arange(n) - run
        distinct = np.cumsum(m_before == 0)
        with np.errstate(divide="ignore"):
            inc = np.where(m_before == 0, 1.0, 1.0 / (m_before + 1) - 1.0 / np.maximum(m_before, 1))
        comm = np.cumsum(inc)
        hit = np.flatnonzero(distinct >= target)
        if hit.size == 0 or max(hit[0] + 1, p_hi) > n:
            raise ValueError("stopping set unreachable: queues exhausted before the threshold")
        tT = hit[0] + 1
        end = max(tT, p_hi)
        idx = np.arange(max(tT, p_lo), end + 1) if tT <= p_hi else np.array([tT])
        idx = idx[(idx == tT) | ((idx >= p_lo) & (idx <= p_hi))]
        s = idx - 1
        if retain_top:
            lev = np.arange(1, e + 1)
            gain = np.cumsum(m_before[:, None] == (lev - 1)[None, :], axis=0)
            loss = np.cumsum(m_before[:, None] == lev[None, :], axis=0)
            hist = (gain - loss)[s]
            cs = np.zeros(s.shape[0])
            rem = np.full(s.shape[0], target, dtype=np.int64)
            for mm in range(e, 0, -1):
                take = np.minimum(hist[:, mm - 1], rem)
                cs += take / mm
                rem -= take
        else:
            cs = comm[s]
        mp = np.searchsorted(np.sort(lam[t]), tm[s], side="left")
        v = np.empty((s.shape[0], 8))
        v[:, 0] = tm[s]
        v[:, 1] = alpha_u * cs
        v[:, 2] = alpha_e / mp
        v[:, 3] = distinct[s]
        v[:, 4] = v[:, 0] + v[:, 1] + du0 + du1 * v[:, 3]
        v[:, 5] = v[:, 4] ** 2
        v[:, 6] = v[:, 0] + v[:, 2] + de0 + de1 * v[:, 3]
        v[:, 7] = v[:, 6] ** 2
        first = idx == tT
        hi = min(tT, p_hi)
        if p_lo <= hi:
            diff[0] += v[first][0]
            diff[hi - p_lo + 1] -= v[first][0]
        rest = ~first
        acc[idx[rest] - p_lo] += v[rest]
    return acc + np.cumsum(diff[:P], axis=0)


def lower_bound_scan(lam, delta, cap, p_lo, ldu):
    lam = np.ascontiguousarray(lam, dtype=np.float64)
    ldu = np.asarray(ldu, dtype=np.float64)
    T, e = lam.shape
    P = ldu.shape[0]
    p_hi = p_lo + P - 1
    if p_hi > e * cap:
        raise ValueError("p exceeds e * cap")
    best = np.empty(T)
    first = np.empty(T)
    for t in range(T):
        _, _, tm = _event_order(lam[t], delta, cap)
        if p_lo == 0:
            tm = np.r_[0.0, tm]
            vals = tm[:P] + ldu
        else:
            vals = tm[p_lo - 1:p_hi] + ldu
        best[t] = vals.min()
        first[t] = tm[0] if p_lo == 0 else tm[p_lo - 1]
    return best, first


def first_full_rank(rows, k):
    if k < 1 or k > 64:
        raise ValueError("k must lie in [1, 64]")
    rows = np.asarray(rows, dtype=np.uint64)
    out = np.full(rows.shape[0], -1, dtype=np.int64)
    for t in range(rows.shape[0]):
        basis = {}
        for n, x in enumerate(rows[t].tolist()):
            while x:
                b = x.bit_length() - 1
                if b in basis:
                    x ^= basis[b]
                else:
                    basis[b] = x
                    break
            if len(basis) == k:
                out[t] = n + 1
                break
    return out


def inactivation_decode(row_ptr, cols, k, rhs=None):
    row_ptr = np.asarray(row_ptr, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int32)
    N = row_ptr.shape[0] - 1
    have_rhs = rhs is not None
    if have_rhs:
        y = [int(v) for v in np.asarray(rhs, dtype=np.uint64)]
        if len(y) != N:
            raise ValueError("rhs length must equal the number of rows")
    rows = [cols[row_ptr[r]:row_ptr[r + 1]].tolist() for r in range(N)]
    adj = [[] for _ in range(k)]
    for r, rr in enumerate(rows):
        for c in rr:
            adj[c].append(r)
    col_deg = [len(a) for a in adj]
    row_deg = [len(rr) for rr in rows]
    state = [0] * k
    pivot = [-1] * k
    inact_sym = []
    used = [False] * N
    bits = [0] * N
    resolve_order = []
    queue = [r for r in range(N) if row_deg[r] == 1]
    qh = 0
    mops = vops = 0
    while len(resolve_order) + len(inact_sym) < k:
        if qh < len(queue):
            r = queue[qh]
            qh += 1
            if used[r] or row_deg[r] != 1:
                continue
            s = next(c for c in rows[r] if state[c] == 0)
            used[r] = True
            state[s] = 1
            pivot[s] = r
            resolve_order.append(s)
            pc = bin(bits[r]).count("1")
            for r2 in adj[s]:
                if used[r2] or r2 == r:
                    continue
                bits[r2] ^= bits[r]
                mops += 1 + pc
                vops += 1
                if have_rhs:
                    y[r2] ^= y[r]
                row_deg[r2] -= 1
                if row_deg[r2] == 1:
                    queue.append(r2)
            continue
        s, a = -1, -1
        for c in range(k):
            if state[c] == 0 and col_deg[c] > a:
                a, s = col_deg[c], c
        b = len(inact_sym)
        state[s] = 2
        inact_sym.append(s)
        for r2 in adj[s]:
            if used[r2]:
                continue
            bits[r2] |= 1 << b
            row_deg[r2] -= 1
            if row_deg[r2] == 1:
                queue.append(r2)
    n_inact = len(inact_sym)
    dense = [r for r in range(N) if not used[r]]
    nd = len(dense)
    rank = 0
    dpiv = [-1] * n_inact
    for c in range(n_inact):
        piv = next((a for a in range(rank, nd) if (bits[dense[a]] >> c) & 1), -1)
        if piv < 0:
            continue
        dense[rank], dense[piv] = dense[piv], dense[rank]
        r = dense[rank]
        pc = bin(bits[r]).count("1")
        for a in range(rank + 1, nd):
            r2 = dense[a]
            if (bits[r2] >> c) & 1:
                bits[r2] ^= bits[r]
                mops += pc
                vops += 1
                if have_rhs:
                    y[r2] ^= y[r]
        dpiv[c] = r
        rank += 1
    if rank != n_inact:
        return False, mops, vops, n_inact, None
    val = [0] * n_inact
    for c in range(n_inact - 1, -1, -1):
        r = dpiv[c]
        acc = y[r] if have_rhs else 0
        for a in range(c + 1, n_inact):
            if (bits[r] >> a) & 1:
                acc ^= val[a]
                vops += 1
        val[c] = acc
    sol = [0] * k
    for a, s in enumerate(inact_sym):
        sol[s] = val[a]
    for s in resolve_order:
        r = pivot[s]
        acc = y[r] if have_rhs else 0
        m = bits[r]
        while m:
            low = m & -m
            acc ^= val[low.bit_length() - 1]
            vops += 1
            m ^= low
        sol[s] = acc
    return True, mops, vops, n_inact, (np.array(sol, dtype=np.uint64) if have_rhs else None)


def krawtchouk_ratio_q2(omega, n):
    """sum_d omega_d h_d(i)/h_d(0) for i = 0..n, binary case, in floating point.

    The normalised recurrence is run forward up to d = n/2 only, past which
    it loses accuracy; the upper half follows from r_{n-d}(i) = (-1)^i r_d(i).
    Kahan summation over d.
    """
    i = np.arange(n + 1, dtype=np.float64)
    sign = np.where(np.arange(n + 1) % 2 == 0, 1.0, -1.0)
    w = np.r_[0.0, np.asarray(omega, dtype=np.float64)]
    r_prev = np.ones(n + 1)
    r_cur = 1.0 - 2.0 * i / n
    s = np.zeros(n + 1)
    comp = np.zeros(n + 1)

    def add(x):
        nonlocal s, comp
        y = x - comp
        t = s + y
        comp = (t - s) - y
        s = t

    half = n // 2
    for d in range(1, half + 1):
        if d > 1:
            a = d - 1
            r_next = ((n - 2.0 * i) * r_cur - a * r_prev) / (n - a)
            r_next[np.abs(r_next) < 1e-300] = 0.0  # no subnormals; far below any weight
            r_prev, r_cur = r_cur, r_next
        wd = w[d]
        wr = w[n - d] if n - d != d else 0.0
        if wd or wr:
            add(wd * r_cur + wr * sign * r_cur)
    if n >= 1 and w[n]:
        # d = n mirrors d = 0, where r_0 = 1
        add(w[n] * sign)
    return s
