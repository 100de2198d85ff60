# cython: language_level=3
"""Compiled window kernels: bit-parallel window edit distances and the
banded window-mapping DP."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint32_t, int64_t, int32_t, int16_t, int8_t
from libc.stdlib cimport malloc, free, calloc

cnp.import_array()

cdef extern from *:
    """
    #define EDSK_INF (1LL << 50)
    """
    int64_t INF "EDSK_INF"


cdef inline void _peq_set(uint64_t* peq, const uint32_t[::1] A, Py_ssize_t a0,
                          Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t r
    for r in range(m):
        peq[A[a0 + r]] |= (<uint64_t>1) << r


cdef inline void _peq_clear(uint64_t* peq, const uint32_t[::1] A, Py_ssize_t a0,
                            Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t r
    for r in range(m):
        peq[A[a0 + r]] = 0


cdef inline int64_t _myers_global(const uint64_t* peq, Py_ssize_t m,
                                  const uint32_t[::1] B, Py_ssize_t b0,
                                  Py_ssize_t blen) noexcept nogil:
    # global edit distance between the pattern encoded in peq (m <= 64) and
    # B[b0:b0+blen]
    cdef uint64_t pv = ~(<uint64_t>0), mv = 0, eq, xv, xh, ph, mh
    cdef uint64_t high = (<uint64_t>1) << (m - 1)
    cdef int64_t score = m
    cdef Py_ssize_t c
    for c in range(blen):
        eq = peq[B[b0 + c]]
        xv = eq | mv
        xh = (((eq & pv) + pv) ^ pv) | eq
        ph = mv | ~(xh | pv)
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = (ph << 1) | 1
        mh = mh << 1
        pv = mh | ~(xv | ph)
        mv = ph & xv
    return score


cdef int64_t _dp_global(const uint32_t[::1] A, Py_ssize_t a0, Py_ssize_t m,
                        const uint32_t[::1] B, Py_ssize_t b0, Py_ssize_t blen,
                        int64_t* col) noexcept nogil:
    # plain column DP, col has room for m + 1 entries
    cdef Py_ssize_t r, c
    cdef int64_t diag, up, best
    for r in range(m + 1):
        col[r] = r
    for c in range(blen):
        diag = col[0]
        col[0] = c + 1
        for r in range(1, m + 1):
            up = col[r]
            best = diag + (0 if A[a0 + r - 1] == B[b0 + c] else 1)
            if up + 1 < best:
                best = up + 1
            if col[r - 1] + 1 < best:
                best = col[r - 1] + 1
            diag = up
            col[r] = best
    return col[m]


def window_ed_pairs(const uint32_t[::1] A, const uint32_t[::1] B, Py_ssize_t sigma,
                    const int64_t[::1] a_starts, const int64_t[::1] a_lens,
                    const int64_t[::1] b_starts, const int64_t[::1] b_lens):
    """Exact edit distance for each (A-window, B-window) pair; 0-based starts.

    Consecutive pairs sharing the same A-window reuse its bit table, so callers
    should group pairs by A-window.
    """
    cdef Py_ssize_t q, npairs = a_starts.shape[0], m, cur_a0 = -1, cur_m = -1, maxm = 1
    out = np.empty(npairs, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef uint64_t* peq = <uint64_t*>calloc(sigma + 1, sizeof(uint64_t))
    for q in range(npairs):
        if a_lens[q] > maxm:
            maxm = a_lens[q]
    cdef int64_t* col = <int64_t*>malloc((maxm + 1) * sizeof(int64_t))
    if peq == NULL or col == NULL:
        free(peq)
        free(col)
        raise MemoryError()
    with nogil:
        for q in range(npairs):
            m = a_lens[q]
            if m > 64:
                o[q] = _dp_global(A, a_starts[q], m, B, b_starts[q], b_lens[q], col)
                continue
            if a_starts[q] != cur_a0 or m != cur_m:
                if cur_a0 >= 0:
                    _peq_clear(peq, A, cur_a0, cur_m)
                _peq_set(peq, A, a_starts[q], m)
                cur_a0 = a_starts[q]
                cur_m = m
            o[q] = _myers_global(peq, m, B, b_starts[q], b_lens[q])
    free(peq)
    free(col)
    return out


def window_ed_profile(const uint32_t[::1] A, const uint32_t[::1] B, Py_ssize_t sigma,
                      Py_ssize_t a0, Py_ssize_t m, const int64_t[::1] b_starts,
                      Py_ssize_t maxlen):
    """ED(A[a0:a0+m], B[s:s+L]) for every listed start s and every L in 0..maxlen.

    Entries with s+L past the end of B are set to -1.
    """
    cdef Py_ssize_t ns = b_starts.shape[0], nb = B.shape[0], q, c, s, lim, r
    out = np.full((ns, maxlen + 1), -1, dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef uint64_t* peq = <uint64_t*>calloc(sigma + 1, sizeof(uint64_t))
    cdef int64_t* col = <int64_t*>malloc((m + 1) * sizeof(int64_t))
    cdef uint64_t pv, mv, eq, xv, xh, ph, mh, high
    cdef int64_t score, diag, up, best
    if peq == NULL or col == NULL:
        free(peq)
        free(col)
        raise MemoryError()
    with nogil:
        if m <= 64 and m > 0:
            _peq_set(peq, A, a0, m)
        for q in range(ns):
            s = b_starts[q]
            lim = nb - s
            if lim > maxlen:
                lim = maxlen
            o[q, 0] = m
            if m == 0:
                for c in range(1, lim + 1):
                    o[q, c] = c
                continue
            if m <= 64:
                pv = ~(<uint64_t>0)
                mv = 0
                high = (<uint64_t>1) << (m - 1)
                score = m
                for c in range(lim):
                    eq = peq[B[s + c]]
                    xv = eq | mv
                    xh = (((eq & pv) + pv) ^ pv) | eq
                    ph = mv | ~(xh | pv)
                    mh = pv & xh
                    if ph & high:
                        score += 1
                    elif mh & high:
                        score -= 1
                    ph = (ph << 1) | 1
                    mh = mh << 1
                    pv = mh | ~(xv | ph)
                    mv = ph & xv
                    o[q, c + 1] = score
            else:
                for r in range(m + 1):
                    col[r] = r
                for c in range(lim):
                    diag = col[0]
                    col[0] = c + 1
                    for r in range(1, m + 1):
                        up = col[r]
                        best = diag + (0 if A[a0 + r - 1] == B[s + c] else 1)
                        if up + 1 < best:
                            best = up + 1
                        if col[r - 1] + 1 < best:
                            best = col[r - 1] + 1
                        diag = up
                        col[r] = best
                    o[q, c + 1] = col[m]
    free(peq)
    free(col)
    return out


cdef inline int64_t _gcd(int64_t a, int64_t b) noexcept nogil:
    cdef int64_t r
    while b:
        r = a % b
        a = b
        b = r
    return a


cdef inline Py_ssize_t _argmin(const int64_t* g, const int32_t* sp, const int32_t* lg,
                               Py_ssize_t stride, Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
    # index of the smallest g[j] on [lo, hi] (leftmost on ties), -1 if empty
    cdef Py_ssize_t k, x, y
    if lo > hi:
        return -1
    k = lg[hi - lo + 1]
    x = sp[k * stride + lo]
    y = sp[k * stride + hi - (1 << k) + 1]
    return y if g[y] < g[x] else x


cdef inline void _relax(int64_t* cur, int8_t* kind, int32_t* tl, int64_t* tc, int64_t* tf,
                        const int64_t* g, const int32_t* sp, const int32_t* lg,
                        Py_ssize_t stride, Py_ssize_t plo, Py_ssize_t phi,
                        Py_ssize_t jlo, Py_ssize_t jhi,
                        int64_t s, int64_t length, int64_t cost) noexcept nogil:
    # match the current A-window with B[s .. s+length-1], continuing from any
    # earlier end j' in [s-1, e]; ends past s-1 pay one unit per overlapped position
    cdef int64_t e = s + length - 1, val
    cdef Py_ssize_t lo, hi, jp
    if e < jlo or e > jhi or s < 1:
        return
    lo = s - 1 if s - 1 > plo else plo
    hi = e if e < phi else phi
    jp = _argmin(g, sp, lg, stride, lo, hi)
    if jp < 0 or g[jp] >= INF:
        return
    val = g[jp] - (s - 1) + cost
    if val < cur[e] or (val == cur[e] and kind[e] != 2):
        cur[e] = val
        kind[e] = 2
        tl[e] = <int32_t>length
        tc[e] = cost
        tf[e] = jp


def wdp_run(const uint32_t[::1] A, const uint32_t[::1] B, Py_ssize_t sigma,
            const int64_t[::1] a_starts, const int64_t[::1] a_lens,
            int64_t lo_off, int64_t hi_off, int64_t cutoff,
            const int64_t[::1] d_ptr, const int64_t[::1] d_s, const int64_t[::1] d_len,
            const int64_t[::1] d_cost,
            const int64_t[::1] an_ptr, const int64_t[::1] an_ids, const int64_t[::1] an_cost,
            const int64_t[::1] an_mptr, const int64_t[::1] an_mod,
            const int64_t[::1] m_s, const int64_t[::1] m_len, const int64_t[::1] m_end,
            const int64_t[::1] bl_ptr, const int64_t[::1] bl_ids, const int64_t[::1] bl_slo,
            const int64_t[::1] bl_shi, const int64_t[::1] bl_tptr, const int64_t[::1] t_len,
            const int64_t[::1] t_stride, const int64_t[::1] t_thr,
            bint trace):
    """Banded DP over A-window ends and B positions.

    Candidates come from three sources: explicit (start, len, cost) entries,
    dense anchors (a shared cost over a member list of B-windows sorted by end,
    filtered to starts s with (s-1) % an_mod == 0), and lazily evaluated
    blocks whose cost is the exact window distance when it does not exceed the
    block threshold. A match may overlap the previous matched window; each
    overlapped position costs one. States whose cost plus the remaining length
    difference exceeds ``cutoff`` are dropped (exact whenever the costs are at
    least the window distances); the result is then INF or above the cutoff
    whenever the true optimum is. Returns (cost, evaluations, trace).
    """
    cdef Py_ssize_t t = a_starts.shape[0], nb = B.shape[0]
    cdef Py_ssize_t q, j, p, g, bi, tt, c, r, jlo, jhi, plo, phi, slo, shi, maxl, lo, hi, mid
    cdef Py_ssize_t k, levels, built, stride = nb + 1, span, bj
    cdef int64_t sg
    cdef Py_ssize_t ks, kcnt
    cdef int64_t bg, val
    cdef int64_t i, la, s, leff, thr, score, evals = 0, result, na = 0, iprev, rem
    cdef Py_ssize_t alo, ahi
    if t > 0:
        na = a_starts[t - 1] + a_lens[t - 1]
    cdef Py_ssize_t maxt = 1, maxm = 1, maxc = 1
    for tt in range(t_len.shape[0]):
        if t_len[tt] > maxt:
            maxt = t_len[tt]
    for p in range(d_len.shape[0]):
        if d_len[p] > maxc:
            maxc = d_len[p]
    for p in range(m_len.shape[0]):
        if m_len[p] > maxc:
            maxc = m_len[p]
    if maxt > maxc:
        maxc = maxt
    for q in range(t):
        if a_lens[q] > maxm:
            maxm = a_lens[q]
    span = maxc + 1
    if span > nb + 1:
        span = nb + 1
    levels = 1
    while (1 << levels) <= span:
        levels += 1
    cdef int64_t* prev = <int64_t*>malloc((nb + 1) * sizeof(int64_t))
    cdef int64_t* cur = <int64_t*>malloc((nb + 1) * sizeof(int64_t))
    cdef int64_t* gv = <int64_t*>malloc((nb + 1) * sizeof(int64_t))
    cdef int32_t* sp = <int32_t*>malloc(levels * (nb + 1) * sizeof(int32_t))
    cdef int32_t* lg = <int32_t*>malloc((nb + 2) * sizeof(int32_t))
    cdef int8_t* kind = <int8_t*>malloc((nb + 1) * sizeof(int8_t))
    cdef int32_t* tl = <int32_t*>malloc((nb + 1) * sizeof(int32_t))
    cdef int64_t* tc = <int64_t*>malloc((nb + 1) * sizeof(int64_t))
    cdef int64_t* tf = <int64_t*>malloc((nb + 1) * sizeof(int64_t))
    cdef int64_t* need = <int64_t*>malloc((maxt + 2) * sizeof(int64_t))
    cdef int64_t* col = <int64_t*>malloc((maxm + 1) * sizeof(int64_t))
    cdef uint64_t* peq = <uint64_t*>calloc(sigma + 1, sizeof(uint64_t))
    cdef int64_t* tmp
    cdef uint64_t pv, mv, eq, xv, xh, ph, mh, high
    cdef int64_t diag, up, best
    if (prev == NULL or cur == NULL or gv == NULL or sp == NULL or lg == NULL or kind == NULL
            or tl == NULL or tc == NULL or tf == NULL or need == NULL or col == NULL
            or peq == NULL):
        free(prev); free(cur); free(gv); free(sp); free(lg); free(kind); free(tl); free(tc)
        free(tf); free(need); free(col); free(peq)
        raise MemoryError()

    seg_off_arr = np.zeros(t + 1, dtype=np.int64)
    seg_lo_arr = np.zeros(t, dtype=np.int64)
    cdef int64_t[::1] seg_off = seg_off_arr
    cdef int64_t[::1] seg_lo = seg_lo_arr
    for q in range(t):
        i = a_starts[q] + a_lens[q]
        jlo = i + lo_off if i + lo_off > 0 else 0
        jhi = i + hi_off if i + hi_off < nb else nb
        seg_lo[q] = jlo
        seg_off[q + 1] = seg_off[q] + (jhi - jlo + 1 if jhi >= jlo else 0)
    cdef int8_t[::1] tr_kind
    cdef int32_t[::1] tr_len
    cdef int64_t[::1] tr_cost
    cdef int64_t[::1] tr_from
    out_trace = None
    if trace:
        k_arr = np.full(seg_off[t], 3, dtype=np.int8)
        l_arr = np.zeros(seg_off[t], dtype=np.int32)
        c_arr = np.zeros(seg_off[t], dtype=np.int64)
        f_arr = np.zeros(seg_off[t], dtype=np.int64)
        tr_kind = k_arr
        tr_len = l_arr
        tr_cost = c_arr
        tr_from = f_arr
        out_trace = (seg_off_arr, seg_lo_arr, k_arr, l_arr, c_arr, f_arr)

    with nogil:
        lg[0] = 0
        lg[1] = 0
        for j in range(2, nb + 2):
            lg[j] = lg[j >> 1] + 1
        for c in range(maxt + 2):
            need[c] = -1
        for j in range(nb + 1):
            prev[j] = j if (j >= lo_off and j <= hi_off) else INF
        plo = 0
        phi = hi_off if hi_off < nb else nb
        iprev = 0
        for q in range(t):
            i = a_starts[q] + a_lens[q]
            la = a_lens[q]
            jlo = i + lo_off if i + lo_off > 0 else 0
            jhi = i + hi_off if i + hi_off < nb else nb
            # range-min table over g[j] = prev[j] + j on the previous band,
            # after dropping states that cannot finish under the cutoff
            alo = phi + 1
            ahi = plo - 1
            for j in range(plo, phi + 1):
                rem = (na - iprev) - (nb - j)
                if rem < 0:
                    rem = -rem
                if prev[j] < INF and prev[j] + rem <= cutoff:
                    gv[j] = prev[j] + j
                    if j < alo:
                        alo = j
                    ahi = j
                else:
                    prev[j] = INF
                    gv[j] = INF
                sp[j] = <int32_t>j
            iprev = i
            if ahi < alo:
                plo = 1
                phi = 0
                break
            if d_ptr[q + 1] > d_ptr[q] or an_ptr[q + 1] > an_ptr[q]:
                built = levels
            else:
                built = 1  # blocks track their own running minimum
            for k in range(1, built):
                for j in range(plo, phi - (1 << k) + 2):
                    lo = sp[(k - 1) * stride + j]
                    hi = sp[(k - 1) * stride + j + (1 << (k - 1))]
                    sp[k * stride + j] = <int32_t>(hi if gv[hi] < gv[lo] else lo)
            for j in range(jlo, jhi + 1):
                cur[j] = INF
                kind[j] = 3
                if j >= plo and j <= phi and prev[j] < INF:
                    cur[j] = prev[j] + la
                    kind[j] = 0
            for p in range(d_ptr[q], d_ptr[q + 1]):
                evals += 1
                _relax(cur, kind, tl, tc, tf, gv, sp, lg, stride, plo, phi, jlo, jhi,
                       d_s[p], d_len[p], d_cost[p])
            for p in range(an_ptr[q], an_ptr[q + 1]):
                g = an_ids[p]
                # first member whose end reaches the band
                lo = an_mptr[g]
                hi = an_mptr[g + 1]
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if m_end[mid] < jlo:
                        lo = mid + 1
                    else:
                        hi = mid
                r = lo
                while r < an_mptr[g + 1] and m_end[r] <= jhi:
                    if (m_s[r] - 1) % an_mod[g] == 0:
                        evals += 1
                        _relax(cur, kind, tl, tc, tf, gv, sp, lg, stride, plo, phi, jlo, jhi,
                               m_s[r], m_len[r], an_cost[g])
                    r += 1
            if bl_ptr[q + 1] > bl_ptr[q]:
                if la <= 64:
                    _peq_set(peq, A, a_starts[q], la)
                for p in range(bl_ptr[q], bl_ptr[q + 1]):
                    bi = bl_ids[p]
                    slo = bl_slo[bi]
                    if slo < jlo - maxt + 1:
                        slo = jlo - maxt + 1
                    if slo < alo - maxt + 1:
                        slo = alo - maxt + 1
                    if slo < 1:
                        slo = 1
                    shi = bl_shi[bi]
                    if shi > ahi + 1:
                        shi = ahi + 1
                    if shi > nb:
                        shi = nb
                    # only starts on the gcd of the block's strides can match
                    sg = 0
                    for tt in range(bl_tptr[bi], bl_tptr[bi + 1]):
                        sg = _gcd(sg, t_stride[tt])
                    if sg < 1:
                        continue
                    if (slo - 1) % sg != 0:
                        slo += sg - (slo - 1) % sg
                    kcnt = (shi - slo) // sg + 1 if shi >= slo else 0
                    for ks in range(kcnt):
                        s = slo + ks * sg
                        maxl = 0
                        for tt in range(bl_tptr[bi], bl_tptr[bi + 1]):
                            if t_stride[tt] != sg and (s - 1) % t_stride[tt] != 0:
                                continue
                            leff = t_len[tt]
                            if leff > nb - s + 1:
                                leff = nb - s + 1
                            if leff < 1 or s + leff - 1 < jlo or s + leff - 1 < plo:
                                continue
                            if leff > jhi - s + 1:
                                continue
                            thr = t_thr[tt]
                            if need[leff] < thr:
                                need[leff] = thr
                            if leff > maxl:
                                maxl = leff
                        if maxl == 0:
                            continue
                        # running minimum of g over [s-1, s-1+c], extended one
                        # position per column
                        bj = -1
                        bg = INF
                        if s - 1 >= alo and s - 1 <= ahi and gv[s - 1] < bg:
                            bj = s - 1
                            bg = gv[s - 1]
                        if la <= 64:
                            pv = ~(<uint64_t>0)
                            mv = 0
                            high = (<uint64_t>1) << (la - 1)
                            score = la
                            for c in range(maxl):
                                eq = peq[B[s - 1 + c]]
                                xv = eq | mv
                                xh = (((eq & pv) + pv) ^ pv) | eq
                                ph = mv | ~(xh | pv)
                                mh = pv & xh
                                if ph & high:
                                    score += 1
                                elif mh & high:
                                    score -= 1
                                ph = (ph << 1) | 1
                                mh = mh << 1
                                pv = mh | ~(xv | ph)
                                mv = ph & xv
                                j = s + c
                                if j >= alo and j <= ahi and gv[j] < bg:
                                    bj = j
                                    bg = gv[j]
                                if need[c + 1] >= 0:
                                    evals += 1
                                    if score <= need[c + 1] and bg < INF:
                                        val = bg - (s - 1) + score
                                        if val < cur[j] or (val == cur[j] and kind[j] != 2):
                                            cur[j] = val
                                            kind[j] = 2
                                            tl[j] = <int32_t>(c + 1)
                                            tc[j] = score
                                            tf[j] = bj
                                    need[c + 1] = -1
                        else:
                            for r in range(la + 1):
                                col[r] = r
                            for c in range(maxl):
                                diag = col[0]
                                col[0] = c + 1
                                for r in range(1, la + 1):
                                    up = col[r]
                                    best = diag + (0 if A[a_starts[q] + r - 1] == B[s - 1 + c] else 1)
                                    if up + 1 < best:
                                        best = up + 1
                                    if col[r - 1] + 1 < best:
                                        best = col[r - 1] + 1
                                    diag = up
                                    col[r] = best
                                j = s + c
                                if j >= alo and j <= ahi and gv[j] < bg:
                                    bj = j
                                    bg = gv[j]
                                if need[c + 1] >= 0:
                                    evals += 1
                                    if col[la] <= need[c + 1] and bg < INF:
                                        val = bg - (s - 1) + col[la]
                                        if val < cur[j] or (val == cur[j] and kind[j] != 2):
                                            cur[j] = val
                                            kind[j] = 2
                                            tl[j] = <int32_t>(c + 1)
                                            tc[j] = col[la]
                                            tf[j] = bj
                                    need[c + 1] = -1
                if la <= 64:
                    _peq_clear(peq, A, a_starts[q], la)
            for j in range(jlo + 1, jhi + 1):
                if cur[j - 1] < INF and (cur[j - 1] + 1 < cur[j]
                                         or (cur[j - 1] + 1 == cur[j] and kind[j] == 0)):
                    cur[j] = cur[j - 1] + 1
                    kind[j] = 1
            if trace:
                for j in range(jlo, jhi + 1):
                    r = seg_off[q] + j - jlo
                    tr_kind[r] = kind[j] if cur[j] < INF else 3
                    if kind[j] == 2 and cur[j] < INF:
                        tr_len[r] = tl[j]
                        tr_cost[r] = tc[j]
                        tr_from[r] = tf[j]
            tmp = prev
            prev = cur
            cur = tmp
            plo = jlo
            phi = jhi
        result = prev[nb] if nb >= plo and nb <= phi else INF
        if result > cutoff:
            result = INF
    free(prev); free(cur); free(gv); free(sp); free(lg); free(kind); free(tl); free(tc)
    free(tf); free(need); free(col); free(peq)
    return result, evals, out_trace
