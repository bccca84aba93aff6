# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops: event scans over EN progress and the LT decoder.

Every function here has a pure-Python twin in ``_pycore`` with the same
signature and the same results (bit-for-bit for integer outputs).
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor
from libc.stdlib cimport malloc, free, realloc
from libc.string cimport memset, memcpy
from libc.stdint cimport uint64_t, int64_t

cnp.import_array()

cdef extern from *:
    int __builtin_popcountll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef inline int popcount64(uint64_t x) noexcept nogil:
    return __builtin_popcountll(x)


cdef void _order_by_frac(const double* lam_row, double delta, int e,
                         long long* fl, double* fr, int* order, double* lsorted) noexcept nogil:
    cdef int j, jj, tmp
    cdef double c, x
    for j in range(e):
        c = lam_row[j] / delta
        fl[j] = <long long>floor(c)
        fr[j] = c - fl[j]
        order[j] = j
        lsorted[j] = lam_row[j]
    # insertion sorts; e is small
    for j in range(1, e):
        jj = j
        while jj > 0 and (fr[order[jj - 1]] > fr[order[jj]] or
                          (fr[order[jj - 1]] == fr[order[jj]] and order[jj - 1] > order[jj])):
            tmp = order[jj]; order[jj] = order[jj - 1]; order[jj - 1] = tmp
            jj -= 1
    for j in range(1, e):
        x = lsorted[j]
        jj = j
        while jj > 0 and lsorted[jj - 1] > x:
            lsorted[jj] = lsorted[jj - 1]
            jj -= 1
        lsorted[jj] = x


cdef long long _next_start(long long* fl, int e, long long s) noexcept nogil:
    cdef long long best = -1
    cdef int j
    for j in range(e):
        if fl[j] + 1 > s and (best < 0 or fl[j] + 1 < best):
            best = fl[j] + 1
    return best


def scan_accumulate(double[:, ::1] lam, double delta, int[:, ::1] A, int n1,
                    int target, int p_lo, int p_hi, bint retain_top,
                    double alpha_u, double alpha_e,
                    double du0, double du1, double de0, double de1):
    """Per-p sums over trials of (Lc, comm_u, comm_e, distinct, tot_u, tot_u^2, tot_e, tot_e^2).

    ``A`` holds 0-based coded-row ids, one EN per column. For threshold p the
    phase stops at event index max(p, t_T), t_T being the first event at
    which ``target`` distinct rows exist. Returns an array of shape
    (p_hi - p_lo + 1, 8).
    """
    cdef int T = lam.shape[0], e = lam.shape[1], R = A.shape[0]
    cdef int P = p_hi - p_lo + 1
    if P < 1:
        raise ValueError("empty p range")
    if A.shape[1] != e:
        raise ValueError("assignment width must equal the EN count")
    acc_np = np.zeros((P, 8), dtype=np.float64)
    diff_np = np.zeros((P + 1, 8), dtype=np.float64)
    cdef double[:, ::1] acc = acc_np
    cdef double[:, ::1] diff = diff_np
    div_np = np.zeros(n1, dtype=np.int32)
    cdef int[::1] div = div_np
    touched_np = np.zeros(R * e + 1, dtype=np.int32)
    cdef int[::1] touched = touched_np
    cdef long long* fl = <long long*>malloc(e * sizeof(long long))
    cdef double* fr = <double*>malloc(e * sizeof(double))
    cdef int* order = <int*>malloc(e * sizeof(int))
    cdef double* lsorted = <double*>malloc(e * sizeof(double))
    cdef int* hist = <int*>malloc((e + 2) * sizeof(int))
    cdef int t, j, jj, m, r, cnt, tT, distinct, mp, c, lo, hi, rem, take, mm
    cdef long long s, i, nxt
    cdef bint done, active, failed = False
    cdef double tm, comm, cs
    cdef double v[8]
    try:
        with nogil:
            for t in range(T):
                _order_by_frac(&lam[t, 0], delta, e, fl, fr, order, lsorted)
                memset(hist, 0, (e + 2) * sizeof(int))
                cnt = 0; tT = -1; distinct = 0; mp = 0; comm = 0.0
                done = False
                s = fl[0]
                for j in range(1, e):
                    if fl[j] < s:
                        s = fl[j]
                s += 1
                while not done:
                    active = False
                    for jj in range(e):
                        j = order[jj]
                        i = s - fl[j]
                        if i < 1 or i > R:
                            continue
                        active = True
                        tm = lam[t, j] + i * delta
                        r = A[i - 1, j]
                        touched[cnt] = r
                        cnt += 1
                        m = div[r]
                        div[r] = m + 1
                        if m == 0:
                            distinct += 1
                            comm += 1.0
                        else:
                            comm += 1.0 / (m + 1) - 1.0 / m
                            hist[m] -= 1
                        hist[m + 1] += 1
                        while mp < e and lsorted[mp] < tm:
                            mp += 1
                        if tT < 0 and distinct >= target:
                            tT = cnt
                        if tT < 0 or (cnt > tT and (cnt < p_lo or cnt > p_hi)):
                            continue
                        if retain_top:
                            rem = target; cs = 0.0
                            mm = e
                            while mm >= 1 and rem > 0:
                                take = hist[mm] if hist[mm] < rem else rem
                                cs += <double>take / mm
                                rem -= take
                                mm -= 1
                        else:
                            cs = comm
                        v[0] = tm
                        v[1] = alpha_u * cs
                        v[2] = alpha_e / mp
                        v[3] = distinct
                        v[4] = tm + v[1] + du0 + du1 * distinct
                        v[5] = v[4] * v[4]
                        v[6] = tm + v[2] + de0 + de1 * distinct
                        v[7] = v[6] * v[6]
                        if cnt == tT:
                            lo = p_lo
                            hi = tT if tT < p_hi else p_hi
                            if lo <= hi:
                                for c in range(8):
                                    diff[lo - p_lo, c] += v[c]
                                    diff[hi - p_lo + 1, c] -= v[c]
                        else:
                            for c in range(8):
                                acc[cnt - p_lo, c] += v[c]
                        if cnt >= p_hi:
                            done = True
                            break
                    if done:
                        break
                    if active:
                        s += 1
                    else:
                        nxt = _next_start(fl, e, s)
                        if nxt < 0:
                            failed = True
                            break
                        s = nxt
                for j in range(cnt):
                    div[touched[j]] = 0
                if failed:
                    break
    finally:
        free(fl); free(fr); free(order); free(lsorted); free(hist)
    if failed:
        raise ValueError("stopping set unreachable: queues exhausted before the threshold")
    acc_np += np.cumsum(diff_np[:P], axis=0)
    return acc_np


def lower_bound_scan(double[:, ::1] lam, double delta, int cap, int p_lo,
                     double[::1] ldu):
    """Per-trial min over p in [p_lo, p_lo+len(ldu)-1] of t(p) + ldu[p-p_lo].

    t(p) is the p-th earliest event among e progressions Lambda_j + i*delta,
    i = 1..cap. Also returns t(p_lo). ``ldu`` must be nonincreasing.
    """
    cdef int T = lam.shape[0], e = lam.shape[1]
    cdef int P = ldu.shape[0]
    cdef int p_hi = p_lo + P - 1
    if p_hi > e * cap:
        raise ValueError("p exceeds e * cap")
    best_np = np.empty(T, dtype=np.float64)
    first_np = np.empty(T, dtype=np.float64)
    cdef double[::1] best = best_np
    cdef double[::1] first = first_np
    cdef long long* fl = <long long*>malloc(e * sizeof(long long))
    cdef double* fr = <double*>malloc(e * sizeof(double))
    cdef int* order = <int*>malloc(e * sizeof(int))
    cdef double* lsorted = <double*>malloc(e * sizeof(double))
    cdef int t, j, jj, cnt
    cdef long long s, i, nxt
    cdef bint done, active
    cdef double tm, b, floor_tail = ldu[P - 1], val
    try:
        with nogil:
            for t in range(T):
                _order_by_frac(&lam[t, 0], delta, e, fl, fr, order, lsorted)
                cnt = 0
                b = 1e300
                done = False
                if p_lo == 0:
                    first[t] = 0.0
                    b = ldu[0]
                s = fl[0]
                for j in range(1, e):
                    if fl[j] < s:
                        s = fl[j]
                s += 1
                while not done:
                    active = False
                    for jj in range(e):
                        j = order[jj]
                        i = s - fl[j]
                        if i < 1 or i > cap:
                            continue
                        active = True
                        tm = lam[t, j] + i * delta
                        cnt += 1
                        if cnt > p_hi:
                            done = True
                            break
                        if cnt < p_lo:
                            continue
                        if cnt == p_lo:
                            first[t] = tm
                        val = tm + ldu[cnt - p_lo]
                        if val < b:
                            b = val
                        if cnt >= p_hi or tm + floor_tail >= b:
                            done = True
                            break
                    if done:
                        break
                    if active:
                        s += 1
                    else:
                        nxt = _next_start(fl, e, s)
                        if nxt < 0:
                            break
                        s = nxt
                best[t] = b
    finally:
        free(fl); free(fr); free(order); free(lsorted)
    return best_np, first_np


def first_full_rank(cnp.uint64_t[:, ::1] rows, int k):
    """Number of leading rows needed to reach GF(2) rank k, per trial (-1 if never).

    Rows are bitmasks over k <= 64 symbols.
    """
    cdef int T = rows.shape[0], N = rows.shape[1]
    if k < 1 or k > 64:
        raise ValueError("k must lie in [1, 64]")
    out_np = np.full(T, -1, dtype=np.int64)
    cdef int64_t[::1] out = out_np
    cdef uint64_t basis[64]
    cdef int t, n, rank, b
    cdef uint64_t x
    with nogil:
        for t in range(T):
            memset(basis, 0, sizeof(basis))
            rank = 0
            for n in range(N):
                x = rows[t, n]
                b = 63
                while x and b >= 0:
                    if (x >> b) & 1:
                        if basis[b]:
                            x ^= basis[b]
                        else:
                            basis[b] = x
                            rank += 1
                            break
                    b -= 1
                if rank == k:
                    out[t] = n + 1
                    break
    return out_np


cdef class _Bits:
    """Row-major growable bitset matrix (one row per equation)."""
    cdef uint64_t* data
    cdef int nrows, words

    def __cinit__(self, int nrows):
        self.nrows = nrows
        self.words = 1
        self.data = <uint64_t*>malloc(nrows * sizeof(uint64_t))
        memset(self.data, 0, nrows * sizeof(uint64_t))

    def __dealloc__(self):
        free(self.data)

    cdef void grow(self):
        cdef int nw = self.words * 2, r
        cdef uint64_t* nd = <uint64_t*>malloc(<size_t>self.nrows * nw * sizeof(uint64_t))
        memset(nd, 0, <size_t>self.nrows * nw * sizeof(uint64_t))
        for r in range(self.nrows):
            memcpy(nd + <size_t>r * nw, self.data + <size_t>r * self.words, self.words * sizeof(uint64_t))
        free(self.data)
        self.data = nd
        self.words = nw


def inactivation_decode(cnp.int64_t[::1] row_ptr, int[::1] cols, int k, rhs=None):
    """Inactivation (ML) decoding of a binary system with operation counting.

    Returns (success, matrix_ops, per_vector_ops, n_inactivated, solution)
    where solution is a uint64 array of length k when ``rhs`` is given and
    decoding succeeded, else None.
    """
    cdef int N = row_ptr.shape[0] - 1
    cdef int r, r2, s, a, b, w, idx, n_inact = 0, n_resolved = 0, n_used = 0, W
    cdef long long mops = 0, vops = 0
    cdef bint have_rhs = rhs is not None
    cdef uint64_t[::1] y
    if have_rhs:
        y = np.ascontiguousarray(rhs, dtype=np.uint64).copy()
        if y.shape[0] != N:
            raise ValueError("rhs length must equal the number of rows")
    else:
        y = np.zeros(1, dtype=np.uint64)

    # column adjacency
    col_cnt_np = np.zeros(k + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] cptr = col_cnt_np
    for idx in range(cols.shape[0]):
        cptr[cols[idx] + 1] += 1
    for s in range(k):
        cptr[s + 1] += cptr[s]
    crow_np = np.empty(cols.shape[0], dtype=np.int32)
    cdef int[::1] crow = crow_np
    fill_np = np.array(col_cnt_np[:k], copy=True)
    cdef cnp.int64_t[::1] fill = fill_np
    for r in range(N):
        for idx in range(row_ptr[r], row_ptr[r + 1]):
            crow[fill[cols[idx]]] = r
            fill[cols[idx]] += 1

    row_deg_np = np.diff(np.asarray(row_ptr)).astype(np.int32)
    cdef int[::1] row_deg = row_deg_np
    col_deg_np = np.diff(col_cnt_np).astype(np.int32)
    cdef int[::1] col_deg = col_deg_np
    # symbol state: 0 active, 1 resolved, 2 inactivated
    state_np = np.zeros(k, dtype=np.int8)
    cdef signed char[::1] state = state_np
    pivot_np = np.full(k, -1, dtype=np.int32)
    cdef int[::1] pivot = pivot_np
    inact_id_np = np.full(k, -1, dtype=np.int32)
    cdef int[::1] inact_id = inact_id_np
    inact_sym_np = np.empty(k, dtype=np.int32)
    cdef int[::1] inact_sym = inact_sym_np
    used_np = np.zeros(N, dtype=np.int8)
    cdef signed char[::1] used = used_np
    resolve_order_np = np.empty(k, dtype=np.int32)
    cdef int[::1] resolve_order = resolve_order_np
    queue_np = np.empty(N + 1, dtype=np.int32)
    cdef int[::1] queue = queue_np
    cdef int qh = 0, qt = 0, pc
    cdef _Bits bits = _Bits(N)
    cdef uint64_t* src
    cdef uint64_t* dst

    for r in range(N):
        if row_deg[r] == 1:
            queue[qt] = r; qt += 1

    while n_resolved + n_inact < k:
        if qh < qt:
            r = queue[qh]; qh += 1
            if used[r] or row_deg[r] != 1:
                continue
            s = -1
            for idx in range(row_ptr[r], row_ptr[r + 1]):
                if state[cols[idx]] == 0:
                    s = cols[idx]
                    break
            used[r] = 1
            state[s] = 1
            pivot[s] = r
            resolve_order[n_resolved] = s
            n_resolved += 1
            W = bits.words
            src = bits.data + <size_t>r * W
            pc = 0
            for w in range(W):
                pc += popcount64(src[w])
            for idx in range(cptr[s], cptr[s + 1]):
                r2 = crow[idx]
                if used[r2] or r2 == r:
                    continue
                dst = bits.data + <size_t>r2 * W
                for w in range(W):
                    dst[w] ^= src[w]
                mops += 1 + pc
                vops += 1
                if have_rhs:
                    y[r2] ^= y[r]
                row_deg[r2] -= 1
                if row_deg[r2] == 1:
                    queue[qt] = r2; qt += 1
            continue
        # ripple empty: inactivate the active symbol held by the most rows.
        # A consumed pivot row never holds a still-active symbol, so the
        # static column degree equals the residual one.
        b = -1
        a = -1
        for s in range(k):
            if state[s] == 0 and col_deg[s] > a:
                a = col_deg[s]
                b = s
        s = b
        if n_inact == bits.words * 64:
            bits.grow()
        W = bits.words
        state[s] = 2
        inact_id[s] = n_inact
        inact_sym[n_inact] = s
        for idx in range(cptr[s], cptr[s + 1]):
            r2 = crow[idx]
            if used[r2]:
                continue
            bits.data[<size_t>r2 * W + n_inact // 64] |= (<uint64_t>1) << (n_inact % 64)
            row_deg[r2] -= 1
            if row_deg[r2] == 1:
                queue[qt] = r2; qt += 1
        n_inact += 1

    # dense phase over rows not used as pivots
    W = bits.words
    dense_np = np.nonzero(used_np == 0)[0].astype(np.int32)
    cdef int[::1] dense = dense_np
    cdef int nd = dense.shape[0], rank = 0, c, piv, tmpi
    cdef uint64_t mask
    dpiv_np = np.full(n_inact, -1, dtype=np.int32)
    cdef int[::1] dpiv = dpiv_np
    for c in range(n_inact):
        piv = -1
        for a in range(rank, nd):
            if (bits.data[<size_t>dense[a] * W + c // 64] >> (c % 64)) & 1:
                piv = a
                break
        if piv < 0:
            continue
        tmpi = dense[rank]; dense[rank] = dense[piv]; dense[piv] = tmpi
        r = dense[rank]
        src = bits.data + <size_t>r * W
        pc = 0
        for w in range(W):
            pc += popcount64(src[w])
        for a in range(rank + 1, nd):
            r2 = dense[a]
            dst = bits.data + <size_t>r2 * W
            if (dst[c // 64] >> (c % 64)) & 1:
                for w in range(W):
                    dst[w] ^= src[w]
                mops += pc
                vops += 1
                if have_rhs:
                    y[r2] ^= y[r]
        dpiv[c] = r
        rank += 1
    success = rank == n_inact
    if not success:
        return False, mops, vops, n_inact, None

    # back-substitution in the dense block, last pivot first
    inact_val_np = np.zeros(n_inact, dtype=np.uint64)
    cdef uint64_t[::1] inact_val = inact_val_np
    cdef uint64_t acc_v
    for c in range(n_inact - 1, -1, -1):
        r = dpiv[c]
        src = bits.data + <size_t>r * W
        acc_v = y[r] if have_rhs else 0
        for a in range(c + 1, n_inact):
            if (src[a // 64] >> (a % 64)) & 1:
                acc_v ^= inact_val[a]
                vops += 1
        inact_val[c] = acc_v
    # resolved symbols: x_s = y[pivot] + sum of inactive values in its row
    sol_np = np.zeros(k, dtype=np.uint64)
    cdef uint64_t[::1] sol = sol_np
    for a in range(n_inact):
        sol[inact_sym[a]] = inact_val[a]
    for idx in range(n_resolved):
        s = resolve_order[idx]
        r = pivot[s]
        src = bits.data + <size_t>r * W
        acc_v = y[r] if have_rhs else 0
        for w in range(W):
            mask = src[w]
            while mask:
                a = w * 64 + __builtin_ctzll(mask)
                acc_v ^= inact_val[a]
                vops += 1
                mask &= mask - 1
        sol[s] = acc_v
    return True, mops, vops, n_inact, (sol_np if have_rhs else None)



cdef double TINY = 1e-300


def krawtchouk_ratio_q2(const double[::1] omega, int n):
    """sum_d omega_d h_d(i)/h_d(0) for i = 0..n, binary case, in floating point.

    Same recurrence, reflection and Kahan summation as the fallback, with the
    arithmetic in the same order. Ratios below 1e-300 in magnitude are set to
    zero in both, which keeps subnormal arithmetic out of the loop.
    """
    if omega.shape[0] != n:
        raise ValueError("omega must have length n")
    if n < 1:
        raise ValueError("n must be positive")
    s_np = np.zeros(n + 1)
    cdef double[::1] s = s_np
    cdef double* r_prev = <double*>malloc((n + 1) * sizeof(double))
    cdef double* r_cur = <double*>malloc((n + 1) * sizeof(double))
    cdef double* comp = <double*>malloc((n + 1) * sizeof(double))
    cdef int half = n // 2, d, i, a
    cdef double wd, wr, sg, x, y, t, rn
    try:
        with nogil:
            for i in range(n + 1):
                r_prev[i] = 1.0
                r_cur[i] = 1.0 - 2.0 * i / n
                comp[i] = 0.0
            for d in range(1, half + 1):
                a = d - 1
                wd = omega[d - 1]
                wr = omega[n - d - 1] if n - d != d and n - d >= 1 else 0.0
                # one fused pass: advance the recurrence in place, then accumulate
                sg = 1.0
                for i in range(n + 1):
                    if d > 1:
                        rn = ((n - 2.0 * i) * r_cur[i] - a * r_prev[i]) / (n - a)
                        if -TINY < rn < TINY:
                            rn = 0.0
                        r_prev[i] = r_cur[i]
                        r_cur[i] = rn
                    else:
                        rn = r_cur[i]
                    if wd != 0.0 or wr != 0.0:
                        x = wd * rn + wr * sg * rn
                        y = x - comp[i]
                        t = s[i] + y
                        comp[i] = (t - s[i]) - y
                        s[i] = t
                    sg = -sg
            if omega[n - 1] != 0.0:
                for i in range(n + 1):
                    sg = 1.0 if i % 2 == 0 else -1.0
                    x = omega[n - 1] * sg
                    y = x - comp[i]
                    t = s[i] + y
                    comp[i] = (t - s[i]) - y
                    s[i] = t
    finally:
        free(r_prev); free(r_cur); free(comp)
    return s_np
