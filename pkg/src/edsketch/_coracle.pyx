# cython: language_level=3
"""Compiled ground-truth kernels: plain quadratic DPs and their
bit-parallel counterparts for edit distance and LCS."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, uint32_t, int64_t
from libc.stdlib cimport malloc, free, calloc

cnp.import_array()


def ed_dp(const uint32_t[::1] A, const uint32_t[::1] B):
    """Full O(nm) edit-distance table, two rows at a time."""
    cdef Py_ssize_t n = A.shape[0], m = B.shape[0], i, j
    cdef int64_t* row = <int64_t*>malloc((m + 1) * sizeof(int64_t))
    cdef int64_t diag, up, best
    cdef uint32_t a
    if row == NULL:
        raise MemoryError()
    with nogil:
        for j in range(m + 1):
            row[j] = j
        for i in range(1, n + 1):
            diag = row[0]
            row[0] = i
            a = A[i - 1]
            for j in range(1, m + 1):
                up = row[j]
                best = diag + (0 if a == B[j - 1] else 1)
                if up + 1 < best:
                    best = up + 1
                if row[j - 1] + 1 < best:
                    best = row[j - 1] + 1
                diag = up
                row[j] = best
    best = row[m]
    free(row)
    return int(best)


def lcs_dp(const uint32_t[::1] X, const uint32_t[::1] Y):
    """Full O(nm) LCS table, one row at a time."""
    cdef Py_ssize_t n = X.shape[0], m = Y.shape[0], i, j
    cdef int64_t* row = <int64_t*>calloc(m + 1, sizeof(int64_t))
    cdef int64_t diag, up, best
    cdef uint32_t x
    if row == NULL:
        raise MemoryError()
    with nogil:
        for i in range(1, n + 1):
            diag = 0
            x = X[i - 1]
            for j in range(1, m + 1):
                up = row[j]
                if x == Y[j - 1]:
                    best = diag + 1
                else:
                    best = up if up > row[j - 1] else row[j - 1]
                diag = up
                row[j] = best
    best = row[m]
    free(row)
    return int(best)


cdef inline void _load_eq(uint64_t* eq, const int64_t* occ_ptr, const int64_t* occ_pos,
                          Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t p
    for p in range(occ_ptr[c], occ_ptr[c + 1]):
        eq[occ_pos[p] >> 6] |= (<uint64_t>1) << (occ_pos[p] & 63)


cdef inline void _unload_eq(uint64_t* eq, const int64_t* occ_ptr, const int64_t* occ_pos,
                            Py_ssize_t c) noexcept nogil:
    cdef Py_ssize_t p
    for p in range(occ_ptr[c], occ_ptr[c + 1]):
        eq[occ_pos[p] >> 6] = 0


def ed_bitparallel(const uint32_t[::1] A, const uint32_t[::1] B,
                   const int64_t[::1] occ_ptr, const int64_t[::1] occ_pos):
    """Block-based bit-vector edit distance with A as the pattern.

    A and B must be coded into a shared dense alphabet; occ_ptr/occ_pos list,
    per code, the positions of that code in A (CSR, sorted).
    """
    cdef Py_ssize_t m = A.shape[0], n = B.shape[0], W, w, j, c
    if m == 0:
        return int(n)
    if n == 0:
        return int(m)
    W = (m + 63) >> 6
    cdef uint64_t* pv = <uint64_t*>malloc(W * sizeof(uint64_t))
    cdef uint64_t* mv = <uint64_t*>calloc(W, sizeof(uint64_t))
    cdef uint64_t* eqv = <uint64_t*>calloc(W, sizeof(uint64_t))
    cdef uint64_t x_v, x_h, p_h, m_h, e, hbit
    cdef uint64_t last_high = (<uint64_t>1) << ((m - 1) & 63)
    cdef int hin, hout
    cdef int64_t score = m
    if pv == NULL or mv == NULL or eqv == NULL:
        free(pv); free(mv); free(eqv)
        raise MemoryError()
    cdef const int64_t* optr = &occ_ptr[0]
    cdef const int64_t* opos = &occ_pos[0]
    with nogil:
        for w in range(W):
            pv[w] = ~(<uint64_t>0)
        for j in range(n):
            c = B[j]
            _load_eq(eqv, optr, opos, c)
            hin = 1
            for w in range(W):
                e = eqv[w]
                x_v = e | mv[w]
                if hin < 0:
                    e |= 1
                x_h = (((e & pv[w]) + pv[w]) ^ pv[w]) | e
                p_h = mv[w] | ~(x_h | pv[w])
                m_h = pv[w] & x_h
                hbit = last_high if w == W - 1 else ((<uint64_t>1) << 63)
                hout = 0
                if p_h & hbit:
                    hout = 1
                elif m_h & hbit:
                    hout = -1
                p_h <<= 1
                m_h <<= 1
                if hin < 0:
                    m_h |= 1
                elif hin > 0:
                    p_h |= 1
                pv[w] = m_h | ~(x_v | p_h)
                mv[w] = p_h & x_v
                hin = hout
            score += hin
            _unload_eq(eqv, optr, opos, c)
    free(pv); free(mv); free(eqv)
    return int(score)


def lcs_bitparallel(const uint32_t[::1] X, const uint32_t[::1] Y,
                    const int64_t[::1] occ_ptr, const int64_t[::1] occ_pos):
    """Bit-vector LCS with X as the pattern (shared dense alphabet, CSR occurrences)."""
    cdef Py_ssize_t m = X.shape[0], n = Y.shape[0], W, w, j, c
    if m == 0 or n == 0:
        return 0
    W = (m + 63) >> 6
    cdef uint64_t* v = <uint64_t*>malloc(W * sizeof(uint64_t))
    cdef uint64_t* eqv = <uint64_t*>calloc(W, sizeof(uint64_t))
    cdef uint64_t u, s, carry, t1
    cdef int64_t zeros = 0
    cdef Py_ssize_t r
    if v == NULL or eqv == NULL:
        free(v); free(eqv)
        raise MemoryError()
    cdef const int64_t* optr = &occ_ptr[0]
    cdef const int64_t* opos = &occ_pos[0]
    with nogil:
        for w in range(W):
            v[w] = ~(<uint64_t>0)
        for j in range(n):
            c = Y[j]
            _load_eq(eqv, optr, opos, c)
            carry = 0
            for w in range(W):
                u = v[w] & eqv[w]
                t1 = v[w] + u
                s = t1 + carry
                carry = 1 if (t1 < v[w] or s < t1) else 0
                v[w] = s | (v[w] - u)
            _unload_eq(eqv, optr, opos, c)
        for r in range(m):
            if not (v[r >> 6] >> (r & 63)) & 1:
                zeros += 1
    free(v); free(eqv)
    return int(zeros)
