"""Pure-Python/numpy implementations of the compiled kernels.

Every function here mirrors the signature and results of its counterpart in
``_chash``, ``_cedit`` or ``_coracle``. It is selected automatically when the
extension modules are unavailable, and used by the test suite as an
independent cross-check.
"""

from __future__ import annotations

import math

import numpy as np

MOD = (1 << 61) - 1
NEG = -(1 << 60)
INF = 1 << 50

_M30 = np.uint64((1 << 30) - 1)
_M31 = np.uint64((1 << 31) - 1)
_MODU = np.uint64(MOD)


def mulmod_np(a: np.ndarray, b: np.ndarray | int) -> np.ndarray:
    """Elementwise a*b mod 2^61-1 for uint64 inputs below the modulus."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    s31, s30, s61 = np.uint64(31), np.uint64(30), np.uint64(61)
    a1, a0 = a >> s31, a & _M31
    b1, b0 = b >> s31, b & _M31
    hi = (a1 * b1) << np.uint64(1)
    mid = a1 * b0 + a0 * b1
    x = hi + (mid >> s30) + ((mid & _M30) << s31) + a0 * b0
    x = (x & _MODU) + (x >> s61)
    x = (x & _MODU) + (x >> s61)
    return np.where(x >= _MODU, x - _MODU, x)


# ---------------------------------------------------------------- hashing


def prefix_hashes(tokens, base):
    out = np.empty(len(tokens) + 1, dtype=np.uint64)
    h = 0
    out[0] = 0
    base = int(base)
    for i, t in enumerate(np.asarray(tokens).tolist()):
        h = (h * base + t + 1) % MOD
        out[i + 1] = h
    return out


def prefix_hashes_values(values, base):
    out = np.empty(len(values) + 1, dtype=np.uint64)
    h = 0
    out[0] = 0
    base = int(base)
    for i, v in enumerate(np.asarray(values).tolist()):
        h = (h * base + v) % MOD
        out[i + 1] = h
    return out


def powers(base, n):
    out = np.empty(n + 1, dtype=np.uint64)
    p = 1
    base = int(base)
    for i in range(n + 1):
        out[i] = p
        p = (p * base) % MOD
    return out


def window_hashes(pre, pw, length):
    n = len(pre) - 1
    m = max(n - length + 1, 0)
    if m == 0:
        return np.empty(0, dtype=np.uint64)
    hi = pre[length:length + m].astype(np.uint64)
    lo = mulmod_np(pre[:m], int(pw[length]))
    return np.where(hi >= lo, hi - lo, hi + _MODU - lo)


def _sub(pre, pw, off, length):
    return (int(pre[off + length]) - int(pre[off]) * int(pw[length])) % MOD


def _extend(pa, pb, pw, i, j, maxlen, counter):
    if maxlen <= 0:
        return 0
    counter[0] += 1
    if _sub(pa, pw, i, 1) != _sub(pb, pw, j, 1):
        return 0
    lo, step, hi = 1, 2, maxlen + 1
    while step <= maxlen:
        counter[0] += 1
        if _sub(pa, pw, i, step) == _sub(pb, pw, j, step):
            lo = step
            step *= 2
        else:
            hi = step
            break
    while hi - lo > 1:
        mid = lo + (hi - lo) // 2
        counter[0] += 1
        if _sub(pa, pw, i, mid) == _sub(pb, pw, j, mid):
            lo = mid
        else:
            hi = mid
    return lo


def extend(pa, pb, pw, i, j, maxlen):
    counter = [0]
    w = _extend(pa, pb, pw, i, j, maxlen, counter)
    return w, counter[0]


def _wave_candidate(prev, d, k):
    c1 = prev[d + k]
    if c1 != NEG:
        c1 += 1
    c2 = prev[d - 1 + k] if d - 1 >= -k else NEG
    c3 = prev[d + 1 + k] if d + 1 <= k else NEG
    if c3 != NEG:
        c3 += 1
    return max(c1, c2, c3)


def _run_wave(na, nb, k, trace, slide):
    width = 2 * k + 1
    target = nb - na
    if abs(target) > k:
        return -1, (np.empty((0, width), dtype=np.int64) if trace else None)
    prev = [NEG] * width
    hist = []
    for h in range(k + 1):
        hmax = min(h, k)
        cur = [NEG] * width
        for d in range(-hmax, hmax + 1):
            r = 0 if h == 0 else _wave_candidate(prev, d, k)
            if r == NEG:
                continue
            cap = min(na, nb - d)
            r = min(r, cap)
            if r < 0 or r + d < 0:
                continue
            if r < cap:
                r = slide(r, d, cap)
            cur[d + k] = r
        if trace:
            hist.append(list(cur))
        if cur[target + k] >= na:
            return h, (np.array(hist, dtype=np.int64) if trace else None)
        prev = cur
    return -1, (np.array(hist, dtype=np.int64).reshape(-1, width) if trace else None)


def wave_ed(pa, pb, pw, na, nb, k, trace):
    calls = [0]
    cmp = [0]

    def slide(r, d, cap):
        calls[0] += 1
        return r + _extend(pa, pb, pw, r, r + d, cap - r, cmp)

    res, hist = _run_wave(na, nb, k, trace, slide)
    return res, calls[0], cmp[0], hist


def approx_wave(S, pas, pbd, pw, na, nb, k, trace):
    S = np.asarray(S, dtype=np.int64)
    m = len(S)
    calls = [0]
    probes = [0]

    def slide(r, d, cap):
        calls[0] += 1
        lo, hi = 0, m
        while lo < hi:
            probes[0] += 1
            mid = (lo + hi) >> 1
            if S[mid] < r + 1:
                lo = mid + 1
            else:
                hi = mid
        p = lo
        # run up to the first sampled mismatch (or the cap when none is left)
        stop = cap
        if p < m:
            cmp = [0]
            w = _extend(pas, pbd[d + k], pw, p, p, m - p, cmp)
            probes[0] += 4 * cmp[0]
            if p + w < m:
                stop = min(int(S[p + w]) - 1, cap)
        return max(r, stop)

    res, hist = _run_wave(na, nb, k, trace, slide)
    return res, calls[0], probes[0], hist


# ---------------------------------------------------------------- windows


def _ed_small(a, b):
    m = len(a)
    col = list(range(m + 1))
    for c, bc in enumerate(b):
        diag = col[0]
        col[0] = c + 1
        for r in range(1, m + 1):
            up = col[r]
            best = diag + (a[r - 1] != bc)
            if up + 1 < best:
                best = up + 1
            if col[r - 1] + 1 < best:
                best = col[r - 1] + 1
            diag = up
            col[r] = best
    return col[m]


def _profile(a, b):
    """ED(a, b[:L]) for L = 0..len(b)."""
    m = len(a)
    col = list(range(m + 1))
    out = [m]
    for c, bc in enumerate(b):
        diag = col[0]
        col[0] = c + 1
        for r in range(1, m + 1):
            up = col[r]
            best = diag + (a[r - 1] != bc)
            if up + 1 < best:
                best = up + 1
            if col[r - 1] + 1 < best:
                best = col[r - 1] + 1
            diag = up
            col[r] = best
        out.append(col[m])
    return out


def window_ed_pairs(A, B, sigma, a_starts, a_lens, b_starts, b_lens):
    A = np.asarray(A).tolist()
    B = np.asarray(B).tolist()
    out = np.empty(len(a_starts), dtype=np.int64)
    for q in range(len(a_starts)):
        a0, m = int(a_starts[q]), int(a_lens[q])
        b0, bl = int(b_starts[q]), int(b_lens[q])
        out[q] = _ed_small(A[a0:a0 + m], B[b0:b0 + bl])
    return out


def window_ed_profile(A, B, sigma, a0, m, b_starts, maxlen):
    A = np.asarray(A).tolist()
    B = np.asarray(B).tolist()
    nb = len(B)
    out = np.full((len(b_starts), maxlen + 1), -1, dtype=np.int64)
    a = A[a0:a0 + m]
    for q, s in enumerate(np.asarray(b_starts).tolist()):
        lim = min(nb - s, maxlen)
        prof = _profile(a, B[s:s + lim])
        out[q, : lim + 1] = prof
    return out


def wdp_run(A, B, sigma, a_starts, a_lens, lo_off, hi_off, cutoff,
            d_ptr, d_s, d_len, d_cost,
            an_ptr, an_ids, an_cost, an_mptr, an_mod, m_s, m_len, m_end,
            bl_ptr, bl_ids, bl_slo, bl_shi, bl_tptr, t_len, t_stride, t_thr,
            trace):
    A = np.asarray(A).tolist()
    B = np.asarray(B).tolist()
    nb = len(B)
    t = len(a_starts)
    a_starts = [int(x) for x in a_starts]
    a_lens = [int(x) for x in a_lens]
    lo_off, hi_off, cutoff = int(lo_off), int(hi_off), int(cutoff)
    na = a_starts[-1] + a_lens[-1] if t else 0
    maxt = max([1] + [int(x) for x in t_len])
    seg_off = np.zeros(t + 1, dtype=np.int64)
    seg_lo = np.zeros(t, dtype=np.int64)
    for q in range(t):
        i = a_starts[q] + a_lens[q]
        jlo, jhi = max(0, i + lo_off), min(nb, i + hi_off)
        seg_lo[q] = jlo
        seg_off[q + 1] = seg_off[q] + (jhi - jlo + 1 if jhi >= jlo else 0)
    out_trace = None
    if trace:
        size = int(seg_off[t])
        tk = np.full(size, 3, dtype=np.int8)
        tlen = np.zeros(size, dtype=np.int32)
        tcost = np.zeros(size, dtype=np.int64)
        tfrom = np.zeros(size, dtype=np.int64)
        out_trace = (seg_off, seg_lo, tk, tlen, tcost, tfrom)
    prev = [j if lo_off <= j <= hi_off else INF for j in range(nb + 1)]
    plo, phi = 0, min(hi_off, nb)
    evals = 0
    iprev = 0
    for q in range(t):
        i = a_starts[q] + a_lens[q]
        la = a_lens[q]
        jlo, jhi = max(0, i + lo_off), min(nb, i + hi_off)
        g = [INF] * (nb + 1)
        alive = []
        for j in range(plo, phi + 1):
            if prev[j] < INF and prev[j] + abs((na - iprev) - (nb - j)) <= cutoff:
                g[j] = prev[j] + j
                alive.append(j)
            else:
                prev[j] = INF
        iprev = i
        if not alive:
            plo, phi = 1, 0
            break
        alo, ahi = alive[0], alive[-1]
        cur = [INF] * (nb + 1)
        kind = [3] * (nb + 1)
        tl = [0] * (nb + 1)
        tc = [0] * (nb + 1)
        tf = [0] * (nb + 1)
        for j in range(jlo, jhi + 1):
            if plo <= j <= phi and prev[j] < INF:
                cur[j] = prev[j] + la
                kind[j] = 0

        def best_from(lo, hi):
            lo, hi = max(lo, plo), min(hi, phi)
            if lo > hi:
                return -1
            return min(range(lo, hi + 1), key=lambda j: (g[j], j))

        def relax(s, length, cost):
            e = s + length - 1
            if e < jlo or e > jhi or s < 1:
                return
            jp = best_from(s - 1, e)
            if jp < 0 or g[jp] >= INF:
                return
            val = g[jp] - (s - 1) + cost
            if val < cur[e] or (val == cur[e] and kind[e] != 2):
                cur[e] = val
                kind[e] = 2
                tl[e] = length
                tc[e] = cost
                tf[e] = jp

        for p in range(int(d_ptr[q]), int(d_ptr[q + 1])):
            evals += 1
            relax(int(d_s[p]), int(d_len[p]), int(d_cost[p]))
        for p in range(int(an_ptr[q]), int(an_ptr[q + 1])):
            gi = int(an_ids[p])
            for r in range(int(an_mptr[gi]), int(an_mptr[gi + 1])):
                if jlo <= int(m_end[r]) <= jhi and (int(m_s[r]) - 1) % int(an_mod[gi]) == 0:
                    evals += 1
                    relax(int(m_s[r]), int(m_len[r]), int(an_cost[gi]))
        a = A[a_starts[q]:a_starts[q] + la]
        for p in range(int(bl_ptr[q]), int(bl_ptr[q + 1])):
            bi = int(bl_ids[p])
            slo = max(int(bl_slo[bi]), jlo - maxt + 1, alo - maxt + 1, 1)
            shi = min(int(bl_shi[bi]), ahi + 1, nb)
            sg = 0
            for tt in range(int(bl_tptr[bi]), int(bl_tptr[bi + 1])):
                sg = math.gcd(sg, int(t_stride[tt]))
            if sg < 1:
                continue
            slo += (-(slo - 1)) % sg
            for s in range(slo, shi + 1, sg):
                need = {}
                for tt in range(int(bl_tptr[bi]), int(bl_tptr[bi + 1])):
                    if (s - 1) % int(t_stride[tt]) != 0:
                        continue
                    leff = min(int(t_len[tt]), nb - s + 1)
                    e = s + leff - 1
                    if leff < 1 or e < jlo or e < plo or leff > jhi - s + 1:
                        continue
                    need[leff] = max(need.get(leff, -1), int(t_thr[tt]))
                if not need:
                    continue
                jp = best_from(s - 1, s - 1 + max(need))
                if jp < 0 or g[jp] >= INF:
                    continue
                prof = _profile(a, B[s - 1:s - 1 + max(need)])
                for length in sorted(need):
                    evals += 1
                    if prof[length] <= need[length]:
                        relax(s, length, prof[length])
        for j in range(jlo + 1, jhi + 1):
            if cur[j - 1] < INF and (cur[j - 1] + 1 < cur[j]
                                     or (cur[j - 1] + 1 == cur[j] and kind[j] == 0)):
                cur[j] = cur[j - 1] + 1
                kind[j] = 1
        if trace:
            for j in range(jlo, jhi + 1):
                r = int(seg_off[q]) + j - jlo
                tk[r] = kind[j] if cur[j] < INF else 3
                if kind[j] == 2 and cur[j] < INF:
                    tlen[r] = tl[j]
                    tcost[r] = tc[j]
                    tfrom[r] = tf[j]
        prev = cur
        plo, phi = jlo, jhi
    result = prev[nb] if plo <= nb <= phi else INF
    return (INF if result > cutoff else result), evals, out_trace


# ---------------------------------------------------------------- oracles


def ed_dp(A, B):
    return _ed_small(np.asarray(A).tolist(), np.asarray(B).tolist())


def lcs_dp(X, Y):
    X = np.asarray(X).tolist()
    Y = np.asarray(Y).tolist()
    row = [0] * (len(Y) + 1)
    for x in X:
        diag = 0
        for j in range(1, len(Y) + 1):
            up = row[j]
            row[j] = diag + 1 if x == Y[j - 1] else max(up, row[j - 1])
            diag = up
    return row[len(Y)]


def _pattern_masks(P, occ_ptr, occ_pos):
    masks = {}
    for c in range(len(occ_ptr) - 1):
        lo, hi = int(occ_ptr[c]), int(occ_ptr[c + 1])
        if hi > lo:
            masks[c] = sum(1 << int(p) for p in occ_pos[lo:hi])
    return masks


def ed_bitparallel(A, B, occ_ptr, occ_pos):
    # arbitrary-precision integers stand in for the word array
    m, n = len(A), len(B)
    if m == 0:
        return n
    if n == 0:
        return m
    masks = _pattern_masks(A, occ_ptr, occ_pos)
    full = (1 << m) - 1
    high = 1 << (m - 1)
    pv, mv, score = full, 0, m
    for c in np.asarray(B).tolist():
        eq = masks.get(c, 0)
        xv = eq | mv
        xh = ((((eq & pv) + pv) & full) ^ pv) | eq
        ph = (mv | ~(xh | pv)) & full
        mh = pv & xh
        if ph & high:
            score += 1
        elif mh & high:
            score -= 1
        ph = ((ph << 1) | 1) & full
        mh = (mh << 1) & full
        pv = (mh | ~(xv | ph)) & full
        mv = ph & xv
    return score


def lcs_bitparallel(X, Y, occ_ptr, occ_pos):
    m = len(X)
    if m == 0 or len(Y) == 0:
        return 0
    masks = _pattern_masks(X, occ_ptr, occ_pos)
    full = (1 << m) - 1
    v = full
    for c in np.asarray(Y).tolist():
        u = v & masks.get(c, 0)
        v = ((v + u) | (v - u)) & full
    return m - bin(v).count("1")
