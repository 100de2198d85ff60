# cython: language_level=3
"""Compiled rolling-hash kernels: prefix tables, substring comparison,
and the two wave recurrences (exact Equal and sampled Approx-Equal)."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint32_t, int64_t

cnp.import_array()

cdef extern from *:
    """
    #define EDSK_MOD 0x1FFFFFFFFFFFFFFFULL
    static inline unsigned long long edsk_mulmod(unsigned long long a, unsigned long long b) {
        unsigned __int128 p = (unsigned __int128)a * b;
        unsigned long long r = (unsigned long long)(p & EDSK_MOD) + (unsigned long long)(p >> 61);
        if (r >= EDSK_MOD) r -= EDSK_MOD;
        if (r >= EDSK_MOD) r -= EDSK_MOD;
        return r;
    }
    """
    uint64_t EDSK_MOD
    uint64_t edsk_mulmod(uint64_t a, uint64_t b) nogil

cdef extern from *:
    """
    #define EDSK_NEG (-(1LL << 60))
    """
    int64_t NEG "EDSK_NEG"


cdef inline uint64_t _sub_hash(const uint64_t[::1] pre, const uint64_t[::1] pw,
                               Py_ssize_t off, Py_ssize_t length) noexcept nogil:
    # hash of the substring occupying prefix slots off+1 .. off+length
    cdef uint64_t hi = pre[off + length]
    cdef uint64_t lo = edsk_mulmod(pre[off], pw[length])
    if hi >= lo:
        return hi - lo
    return hi + EDSK_MOD - lo


def prefix_hashes(const uint32_t[::1] tokens, uint64_t base):
    cdef Py_ssize_t n = tokens.shape[0], i
    out = np.empty(n + 1, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t h = 0, v
    o[0] = 0
    with nogil:
        for i in range(n):
            v = <uint64_t>tokens[i] + 1
            h = edsk_mulmod(h, base) + v
            if h >= EDSK_MOD:
                h -= EDSK_MOD
            o[i + 1] = h
    return out


def prefix_hashes_values(const uint64_t[::1] values, uint64_t base):
    """Prefix hashes over already-offset symbol values (used for sentinel padding)."""
    cdef Py_ssize_t n = values.shape[0], i
    out = np.empty(n + 1, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef uint64_t h = 0
    o[0] = 0
    with nogil:
        for i in range(n):
            h = edsk_mulmod(h, base) + values[i]
            if h >= EDSK_MOD:
                h -= EDSK_MOD
            o[i + 1] = h
    return out


def powers(uint64_t base, Py_ssize_t n):
    out = np.empty(n + 1, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    cdef Py_ssize_t i
    o[0] = 1
    with nogil:
        for i in range(1, n + 1):
            o[i] = edsk_mulmod(o[i - 1], base)
    return out


def window_hashes(const uint64_t[::1] pre, const uint64_t[::1] pw, Py_ssize_t length):
    cdef Py_ssize_t n = pre.shape[0] - 1, s, m
    m = n - length + 1
    if m < 0:
        m = 0
    out = np.empty(m, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    with nogil:
        for s in range(m):
            o[s] = _sub_hash(pre, pw, s, length)
    return out


cdef inline Py_ssize_t _extend(const uint64_t[::1] pa, const uint64_t[::1] pb,
                               const uint64_t[::1] pw, Py_ssize_t i, Py_ssize_t j,
                               Py_ssize_t maxlen, int64_t* compares) noexcept nogil:
    # longest w <= maxlen with A[i:i+w] == B[j:j+w] (0-based offsets), by
    # doubling then bisection on the extension length
    cdef Py_ssize_t lo, hi, mid, step
    if maxlen <= 0:
        return 0
    compares[0] += 1
    if _sub_hash(pa, pw, i, 1) != _sub_hash(pb, pw, j, 1):
        return 0
    lo = 1
    step = 2
    hi = maxlen + 1
    while step <= maxlen:
        compares[0] += 1
        if _sub_hash(pa, pw, i, step) == _sub_hash(pb, pw, j, step):
            lo = step
            step *= 2
        else:
            hi = step
            break
    while hi - lo > 1:
        mid = lo + (hi - lo) // 2
        compares[0] += 1
        if _sub_hash(pa, pw, i, mid) == _sub_hash(pb, pw, j, mid):
            lo = mid
        else:
            hi = mid
    return lo


def extend(const uint64_t[::1] pa, const uint64_t[::1] pb, const uint64_t[::1] pw,
           Py_ssize_t i, Py_ssize_t j, Py_ssize_t maxlen):
    """Return (w, compares) for the longest common extension at offsets i, j."""
    cdef int64_t cmp = 0
    cdef Py_ssize_t w = _extend(pa, pb, pw, i, j, maxlen, &cmp)
    return w, cmp


def wave_ed(const uint64_t[::1] pa, const uint64_t[::1] pb, const uint64_t[::1] pw,
            Py_ssize_t na, Py_ssize_t nb, Py_ssize_t k, bint trace):
    """Exact bounded edit distance by the diagonal wave.

    Returns (distance or -1, equal_calls, hash_compares, waves) where waves is
    an int64 array of shape (h+1, 2k+1) when trace is set, else None.
    """
    cdef Py_ssize_t width = 2 * k + 1, h, d, hmax, r, cap, target, w
    cdef int64_t calls = 0, cmp = 0
    cdef int64_t c1, c2, c3
    cdef int64_t result = -1
    target = nb - na
    if target > k or target < -k:
        return -1, 0, 0, (np.empty((0, width), dtype=np.int64) if trace else None)
    prev_arr = np.full(width, NEG, dtype=np.int64)
    cur_arr = np.full(width, NEG, dtype=np.int64)
    cdef int64_t[::1] prev = prev_arr
    cdef int64_t[::1] cur = cur_arr
    cdef int64_t[:, ::1] tr
    hist = None
    if trace:
        hist = np.full((k + 1, width), NEG, dtype=np.int64)
        tr = hist
    for h in range(k + 1):
        hmax = h if h < k else k
        with nogil:
            for d in range(-k, k + 1):
                cur[d + k] = NEG
            for d in range(-hmax, hmax + 1):
                if h == 0:
                    r = 0
                else:
                    c1 = prev[d + k]
                    if c1 != NEG:
                        c1 += 1
                    c2 = prev[d - 1 + k] if d - 1 >= -k else NEG
                    c3 = prev[d + 1 + k] if d + 1 <= k else NEG
                    if c3 != NEG:
                        c3 += 1
                    if c2 > c1:
                        c1 = c2
                    if c3 > c1:
                        c1 = c3
                    if c1 == NEG:
                        continue
                    r = c1
                cap = na if na < nb - d else nb - d
                if r > cap:
                    r = cap
                if r < 0 or r + d < 0:
                    continue
                if r < cap:
                    calls += 1
                    w = _extend(pa, pb, pw, r, r + d, cap - r, &cmp)
                    r += w
                cur[d + k] = r
            if trace:
                for d in range(width):
                    tr[h, d] = cur[d]
            if cur[target + k] >= na:
                result = h
            for d in range(width):
                prev[d] = cur[d]
        if result >= 0:
            if trace:
                hist = hist[: h + 1].copy()
            return result, calls, cmp, hist
    return -1, calls, cmp, hist


cdef inline Py_ssize_t _lower_bound(const int64_t[::1] s, Py_ssize_t m, int64_t x,
                                    int64_t* probes) noexcept nogil:
    cdef Py_ssize_t lo = 0, hi = m, mid
    while lo < hi:
        probes[0] += 1
        mid = (lo + hi) >> 1
        if s[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    return lo


def approx_wave(const int64_t[::1] S, const uint64_t[::1] pas, const uint64_t[:, ::1] pbd,
                const uint64_t[::1] pw, Py_ssize_t na, Py_ssize_t nb, Py_ssize_t k,
                bint trace):
    """Sampled wave: the exact recurrence with Approx-Equal over the sample S.

    Each slide runs to just before the first sampled mismatch, or to the end
    of the diagonal when every remaining sample agrees, so the sampled wave
    never trails the exact one.

    S holds 1-based sampled positions; pas is the prefix table of A restricted
    to S; pbd[d + k] the prefix table of the shifted sample B^d.
    Returns (h or -1, approx_calls, probes, waves).
    """
    cdef Py_ssize_t m = S.shape[0], width = 2 * k + 1, h, d, hmax, r, cap, target, p, w, stop
    cdef int64_t calls = 0, probes = 0, cmp = 0
    cdef int64_t c1, c2, c3
    cdef int64_t result = -1
    target = nb - na
    if target > k or target < -k:
        return -1, 0, 0, (np.empty((0, width), dtype=np.int64) if trace else None)
    prev_arr = np.full(width, NEG, dtype=np.int64)
    cur_arr = np.full(width, NEG, dtype=np.int64)
    cdef int64_t[::1] prev = prev_arr
    cdef int64_t[::1] cur = cur_arr
    cdef int64_t[:, ::1] tr
    hist = None
    if trace:
        hist = np.full((k + 1, width), NEG, dtype=np.int64)
        tr = hist
    for h in range(k + 1):
        hmax = h if h < k else k
        with nogil:
            for d in range(-k, k + 1):
                cur[d + k] = NEG
            for d in range(-hmax, hmax + 1):
                if h == 0:
                    r = 0
                else:
                    c1 = prev[d + k]
                    if c1 != NEG:
                        c1 += 1
                    c2 = prev[d - 1 + k] if d - 1 >= -k else NEG
                    c3 = prev[d + 1 + k] if d + 1 <= k else NEG
                    if c3 != NEG:
                        c3 += 1
                    if c2 > c1:
                        c1 = c2
                    if c3 > c1:
                        c1 = c3
                    if c1 == NEG:
                        continue
                    r = c1
                cap = na if na < nb - d else nb - d
                if r > cap:
                    r = cap
                if r < 0 or r + d < 0:
                    continue
                if r < cap:
                    calls += 1
                    p = _lower_bound(S, m, r + 1, &probes)
                    # run up to the first sampled mismatch (or the cap when none is left)
                    stop = cap
                    if p < m:
                        cmp = 0
                        w = _extend(pas, pbd[d + k], pw, p, p, m - p, &cmp)
                        probes += 4 * cmp
                        if p + w < m and S[p + w] - 1 < cap:
                            stop = S[p + w] - 1
                    if stop > r:
                        r = stop
                cur[d + k] = r
            if trace:
                for d in range(width):
                    tr[h, d] = cur[d]
            if cur[target + k] >= na:
                result = h
            for d in range(width):
                prev[d] = cur[d]
        if result >= 0:
            if trace:
                hist = hist[: h + 1].copy()
            return result, calls, probes, hist
    return -1, calls, probes, hist
