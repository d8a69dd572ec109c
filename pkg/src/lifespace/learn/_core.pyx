# cython: boundscheck=False, wraparound=False, cdivision=True
# cython: language_level=3
"""Compiled backend for the hot kernels: tree growth, tree prediction, SMO.

Mirrors ``_core_py`` operation for operation (same arithmetic ordering,
same splitmix64 streams, libm log2 against the shared k*log2(k) table), so
the two backends produce bit-identical models. See ``_core_py`` for the
full contract; this file is the fast path.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport log2

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double MIN_GAIN = 1e-9
cdef double NEG_INF = float("-inf")


cdef inline cnp.uint64_t _mix(cnp.uint64_t* state) noexcept nogil:
    cdef cnp.uint64_t z
    state[0] = state[0] + <cnp.uint64_t>0x9E3779B97F4A7C15
    z = state[0]
    z = (z ^ (z >> 30)) * <cnp.uint64_t>0xBF58476D1CE4E5B9
    z = (z ^ (z >> 27)) * <cnp.uint64_t>0x94D049BB133111EB
    return z ^ (z >> 31)


cdef inline double _xlog2(double x) noexcept nogil:
    if x > 0.0:
        return x * log2(x)
    return 0.0


def grow_forest(X, y, w, order, log_table, int n_trees, int mtry,
                double min_weight, bint bootstrap, seeds):
    """Grow gain-ratio trees; same inputs/outputs as _core_py.grow_forest."""
    cdef double[:, ::1] Xv = np.ascontiguousarray(X, dtype=np.float64)
    cdef signed char[::1] yv = np.ascontiguousarray(y, dtype=np.int8)
    cdef int n = Xv.shape[0]
    cdef int p = Xv.shape[1]
    cdef bint uniform = w is None
    cdef double[::1] wv
    if uniform:
        wv = np.empty(0, dtype=np.float64)
    else:
        wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef int[:, ::1] order_v = np.ascontiguousarray(order, dtype=np.int32)
    cdef double[::1] table = np.ascontiguousarray(log_table, dtype=np.float64)
    cdef cnp.uint64_t[::1] seed_v = np.ascontiguousarray(seeds, dtype=np.uint64)

    cdef int max_nodes_tree = 2 * n + 1
    cdef long cap = <long>n_trees * max_nodes_tree
    feat_np = np.empty(cap, dtype=np.int32)
    thr_np = np.empty(cap, dtype=np.float64)
    left_np = np.empty(cap, dtype=np.int32)
    right_np = np.empty(cap, dtype=np.int32)
    ncases_np = np.empty(cap, dtype=np.int32)
    w0_np = np.empty(cap, dtype=np.float64)
    w1_np = np.empty(cap, dtype=np.float64)
    offsets_np = np.empty(n_trees + 1, dtype=np.int32)
    cdef int[::1] feat = feat_np
    cdef double[::1] thr = thr_np
    cdef int[::1] left = left_np
    cdef int[::1] right = right_np
    cdef int[::1] ncases = ncases_np
    cdef double[::1] w0 = w0_np
    cdef double[::1] w1 = w1_np
    cdef int[::1] offsets = offsets_np

    # scratch
    counts_np = np.empty(n, dtype=np.int64)
    sidx_np = np.empty((p, n), dtype=np.int32)
    tmp_np = np.empty(n, dtype=np.int32)
    side_np = np.zeros(n, dtype=np.uint8)
    pool_np = np.empty(p, dtype=np.int32)
    feats_np = np.empty(p, dtype=np.int32)
    cand_f_np = np.empty(p, dtype=np.int32)
    cand_gain_np = np.empty(p, dtype=np.float64)
    cand_bi_np = np.empty(p, dtype=np.int64)
    cand_wl_np = np.empty(p, dtype=np.float64)
    stack_np = np.empty((4 * n + 8, 4), dtype=np.int64)
    cdef long[::1] counts = counts_np
    cdef int[:, ::1] sidx = sidx_np
    cdef int[::1] tmp = tmp_np
    cdef unsigned char[::1] side = side_np
    cdef int[::1] pool = pool_np
    cdef int[::1] feats = feats_np
    cdef int[::1] cand_f = cand_f_np
    cdef double[::1] cand_gain = cand_gain_np
    cdef long[::1] cand_bi = cand_bi_np
    cdef double[::1] cand_wl = cand_wl_np
    cdef long[:, ::1] stack = stack_np

    cdef long total = 0
    cdef cnp.uint64_t state, z
    cdef int t, f, i, j, k, r, m, sp, node, parent, is_left, base
    cdef long lo, hi, bi, pos
    cdef int c_all, c1, c0, nf, nl, f_star, best_f, n_feats
    cdef double w_total, w1_total, w0_total, parent_term, gain, best_gain
    cdef double wl, wl1, wr, wr1, lterm, rterm, si, ratio, best_ratio
    cdef double v, v_next, tval, avg_gain, wi, c_all_d, best_wl
    cdef long ln, rn, l1, r1
    cdef int n_cand

    offsets[0] = 0
    for t in range(n_trees):
        state = seed_v[t]
        if bootstrap:
            for i in range(n):
                counts[i] = 0
            for i in range(n):
                z = _mix(&state)
                counts[<long>(z % <cnp.uint64_t>n)] += 1
            m = n
            for f in range(p):
                k = 0
                for i in range(n):
                    r = order_v[f, i]
                    for j in range(<int>counts[r]):
                        sidx[f, k] = r
                        k += 1
        else:
            m = n
            for f in range(p):
                for i in range(n):
                    sidx[f, i] = order_v[f, i]

        base = <int>total
        sp = 0
        stack[0, 0] = 0
        stack[0, 1] = m
        stack[0, 2] = -1
        stack[0, 3] = 0
        sp = 1
        while sp > 0:
            sp -= 1
            lo = stack[sp, 0]
            hi = stack[sp, 1]
            parent = <int>stack[sp, 2]
            is_left = <int>stack[sp, 3]
            node = <int>(total - base)
            if parent >= 0:
                if is_left:
                    left[base + parent] = node
                else:
                    right[base + parent] = node

            c_all = <int>(hi - lo)
            c1 = 0
            for i in range(<int>lo, <int>hi):
                if yv[sidx[0, i]] == 1:
                    c1 += 1
            c0 = c_all - c1
            if uniform:
                w_total = <double>c_all
                w1_total = <double>c1
                w0_total = <double>c0
            else:
                w_total = 0.0
                w1_total = 0.0
                for i in range(<int>lo, <int>hi):
                    r = sidx[0, i]
                    w_total = w_total + wv[r]
                    if yv[r] == 1:
                        w1_total = w1_total + wv[r]
                w0_total = w_total - w1_total

            feat[total] = -1
            thr[total] = 0.0
            left[total] = -1
            right[total] = -1
            ncases[total] = c_all
            w0[total] = w0_total
            w1[total] = w1_total
            total += 1
            if c1 == 0 or c0 == 0 or c_all < 2:
                continue

            if mtry >= p:
                n_feats = p
                for j in range(p):
                    feats[j] = j
            else:
                for j in range(p):
                    pool[j] = j
                for j in range(mtry):
                    z = _mix(&state)
                    k = j + <int>(z % <cnp.uint64_t>(p - j))
                    r = pool[j]
                    pool[j] = pool[k]
                    pool[k] = r
                n_feats = mtry
                for j in range(mtry):
                    feats[j] = pool[j]
                # insertion sort ascending so tie-breaks follow feature order
                for j in range(1, mtry):
                    r = feats[j]
                    k = j - 1
                    while k >= 0 and feats[k] > r:
                        feats[k + 1] = feats[k]
                        k -= 1
                    feats[k + 1] = r

            c_all_d = <double>c_all
            if uniform:
                parent_term = table[c_all] - table[c1] - table[c0]
            else:
                parent_term = (_xlog2(w_total) - _xlog2(w1_total)
                               - _xlog2(w0_total))

            n_cand = 0
            for j in range(n_feats):
                f = feats[j]
                best_gain = NEG_INF
                bi = -1
                best_wl = 0.0
                wl = 0.0
                wl1 = 0.0
                if uniform:
                    ln = 0
                    l1 = 0
                    for i in range(<int>lo, <int>(hi - 1)):
                        r = sidx[f, i]
                        ln += 1
                        if yv[r] == 1:
                            l1 += 1
                        v = Xv[r, f]
                        v_next = Xv[sidx[f, i + 1], f]
                        if v == v_next:
                            continue
                        rn = c_all - ln
                        if ln < min_weight or rn < min_weight:
                            continue
                        r1 = c1 - l1
                        lterm = table[ln] - table[l1] - table[ln - l1]
                        rterm = table[rn] - table[r1] - table[rn - r1]
                        gain = (parent_term - lterm - rterm) / c_all_d
                        if gain > best_gain:
                            best_gain = gain
                            bi = i - lo
                            best_wl = <double>ln
                else:
                    for i in range(<int>lo, <int>(hi - 1)):
                        r = sidx[f, i]
                        wi = wv[r]
                        wl = wl + wi
                        if yv[r] == 1:
                            wl1 = wl1 + wi
                        v = Xv[r, f]
                        v_next = Xv[sidx[f, i + 1], f]
                        if v == v_next:
                            continue
                        wr = w_total - wl
                        if wl < min_weight or wr < min_weight:
                            continue
                        wr1 = w1_total - wl1
                        lterm = _xlog2(wl) - _xlog2(wl1) - _xlog2(wl - wl1)
                        rterm = _xlog2(wr) - _xlog2(wr1) - _xlog2(wr - wr1)
                        gain = (parent_term - lterm - rterm) / w_total
                        if gain > best_gain:
                            best_gain = gain
                            bi = i - lo
                            best_wl = wl
                if bi >= 0 and best_gain > MIN_GAIN:
                    cand_f[n_cand] = f
                    cand_gain[n_cand] = best_gain
                    cand_bi[n_cand] = bi
                    cand_wl[n_cand] = best_wl
                    n_cand += 1
            if n_cand == 0:
                continue

            avg_gain = 0.0
            for j in range(n_cand):
                avg_gain += cand_gain[j]
            avg_gain /= n_cand

            best_ratio = -1.0
            best_f = -1
            bi = -1
            for j in range(n_cand):
                if cand_gain[j] < avg_gain - 1e-12:
                    continue
                if uniform:
                    nl = <int>cand_wl[j]
                    si = (table[c_all] - table[nl] - table[c_all - nl]) / c_all_d
                else:
                    si = (_xlog2(w_total) - _xlog2(cand_wl[j])
                          - _xlog2(w_total - cand_wl[j])) / w_total
                ratio = cand_gain[j] / si
                if ratio > best_ratio:
                    best_ratio = ratio
                    best_f = cand_f[j]
                    bi = cand_bi[j]
            f_star = best_f

            v = Xv[sidx[f_star, lo + bi], f_star]
            v_next = Xv[sidx[f_star, lo + bi + 1], f_star]
            tval = 0.5 * (v + v_next)
            if tval >= v_next:
                tval = v

            feat[base + node] = f_star
            thr[base + node] = tval

            for i in range(<int>lo, <int>(lo + bi + 1)):
                side[sidx[f_star, i]] = 1
            for f in range(p):
                k = 0
                for i in range(<int>lo, <int>hi):
                    r = sidx[f, i]
                    if side[r]:
                        tmp[k] = r
                        k += 1
                for i in range(<int>lo, <int>hi):
                    r = sidx[f, i]
                    if not side[r]:
                        tmp[k] = r
                        k += 1
                for i in range(<int>(hi - lo)):
                    sidx[f, <int>lo + i] = tmp[i]
            for i in range(<int>lo, <int>hi):
                side[sidx[0, i]] = 0

            stack[sp, 0] = lo + bi + 1
            stack[sp, 1] = hi
            stack[sp, 2] = node
            stack[sp, 3] = 0
            sp += 1
            stack[sp, 0] = lo
            stack[sp, 1] = lo + bi + 1
            stack[sp, 2] = node
            stack[sp, 3] = 1
            sp += 1
        offsets[t + 1] = <int>total

    return (feat_np[:total].copy(), thr_np[:total].copy(),
            left_np[:total].copy(), right_np[:total].copy(),
            ncases_np[:total].copy(), w0_np[:total].copy(),
            w1_np[:total].copy(), offsets_np.copy())


def predict_trees(feature, threshold, left, right, w0, w1, offsets, X):
    """Predict every probe row with every tree; ties at leaves go to class 1."""
    cdef int[::1] feat = np.ascontiguousarray(feature, dtype=np.int32)
    cdef double[::1] thr = np.ascontiguousarray(threshold, dtype=np.float64)
    cdef int[::1] lft = np.ascontiguousarray(left, dtype=np.int32)
    cdef int[::1] rgt = np.ascontiguousarray(right, dtype=np.int32)
    cdef double[::1] w0v = np.ascontiguousarray(w0, dtype=np.float64)
    cdef double[::1] w1v = np.ascontiguousarray(w1, dtype=np.float64)
    cdef int[::1] off = np.ascontiguousarray(offsets, dtype=np.int32)
    cdef double[:, ::1] Xv = np.ascontiguousarray(np.atleast_2d(X),
                                                  dtype=np.float64)
    cdef int n_trees = off.shape[0] - 1
    cdef int q = Xv.shape[0]
    out_np = np.empty((n_trees, q), dtype=np.int8)
    cdef signed char[:, ::1] out = out_np
    cdef int t, i, root, pos, f
    for t in range(n_trees):
        root = off[t]
        for i in range(q):
            pos = root
            f = feat[pos]
            while f >= 0:
                if Xv[i, f] <= thr[pos]:
                    pos = root + lft[pos]
                else:
                    pos = root + rgt[pos]
                f = feat[pos]
            out[t, i] = 1 if w1v[pos] >= w0v[pos] else 0
    return out_np


def smo_train(K, y, double C, double tol, int max_passes, bint want_trace=False):
    """SMO with maximal-violating-pair selection; see _core_py.smo_train."""
    cdef double[:, ::1] Kv = np.ascontiguousarray(K, dtype=np.float64)
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    cdef int n = yv.shape[0]
    alpha_np = np.zeros(n, dtype=np.float64)
    cdef double[::1] alpha = alpha_np
    grad_np = np.full(n, -1.0)
    cdef double[::1] grad = grad_np
    cdef double tau = 1e-12
    trace_list = []

    cdef bint converged = False
    cdef int it = 0
    cdef int i, j, t, n_free
    cdef bint any_up, any_dn, is_up, is_dn
    cdef double sel_t, m_val, big_m, yi, yj, ai_old, aj_old, ai, aj
    cdef double quad, delta, diff, total, ci, cj, s_a, s_ag, b, b_hi, b_lo
    cdef double best_score, viol_t, score_t
    cdef double NEGINF = float("-inf")
    cdef double POSINF = float("inf")

    while it < max_passes:
        any_up = False
        any_dn = False
        i = -1
        m_val = NEGINF
        big_m = POSINF
        for t in range(n):
            sel_t = -yv[t] * grad[t]
            if yv[t] > 0.0:
                is_up = alpha[t] < C
                is_dn = alpha[t] > 0.0
            else:
                is_up = alpha[t] > 0.0
                is_dn = alpha[t] < C
            if is_up:
                any_up = True
                if sel_t > m_val:
                    m_val = sel_t
                    i = t
            if is_dn:
                any_dn = True
                if sel_t < big_m:
                    big_m = sel_t
        if not any_up or not any_dn:
            converged = True
            break
        if m_val - big_m <= tol:
            converged = True
            break
        # second-order partner: maximize violation^2 / pair curvature
        j = -1
        best_score = NEGINF
        for t in range(n):
            sel_t = -yv[t] * grad[t]
            if yv[t] > 0.0:
                is_dn = alpha[t] > 0.0
            else:
                is_dn = alpha[t] < C
            viol_t = m_val - sel_t
            if not is_dn or not (viol_t > 0.0):
                continue
            quad = Kv[i, i] + Kv[t, t] - 2.0 * Kv[i, t]
            if not (quad > 0.0):
                quad = tau
            score_t = (viol_t * viol_t) / quad
            if score_t > best_score:
                best_score = score_t
                j = t

        yi = yv[i]
        yj = yv[j]
        ai_old = alpha[i]
        aj_old = alpha[j]
        quad = Kv[i, i] + Kv[j, j] - 2.0 * Kv[i, j]
        if quad <= 0.0:
            quad = tau
        if yi != yj:
            delta = (-grad[i] - grad[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0.0:
                if aj < 0.0:
                    aj = 0.0
                    ai = diff
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = -diff
            if diff > 0.0:
                if ai > C:
                    ai = C
                    aj = C - diff
            else:
                if aj > C:
                    aj = C
                    ai = C + diff
        else:
            delta = (grad[i] - grad[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai = C
                    aj = total - C
            else:
                if aj < 0.0:
                    aj = 0.0
                    ai = total
            if total > C:
                if aj > C:
                    aj = C
                    ai = total - C
            else:
                if ai < 0.0:
                    ai = 0.0
                    aj = total
        alpha[i] = ai
        alpha[j] = aj
        ci = yi * (ai - ai_old)
        cj = yj * (aj - aj_old)
        for t in range(n):
            grad[t] = grad[t] + yv[t] * (ci * Kv[i, t] + cj * Kv[j, t])
        it += 1
        if want_trace:
            s_a = 0.0
            s_ag = 0.0
            for t in range(n):
                s_a = s_a + alpha[t]
                s_ag = s_ag + alpha[t] * grad[t]
            trace_list.append(0.5 * (s_a - s_ag))

    n_free = 0
    s_a = 0.0
    for t in range(n):
        if 0.0 < alpha[t] < C:
            n_free += 1
            s_a = s_a + (-yv[t] * grad[t])
    if n_free > 0:
        b = s_a / n_free
    else:
        b_hi = NEGINF
        b_lo = POSINF
        for t in range(n):
            sel_t = -yv[t] * grad[t]
            if yv[t] > 0.0:
                is_up = alpha[t] < C
                is_dn = alpha[t] > 0.0
            else:
                is_up = alpha[t] > 0.0
                is_dn = alpha[t] < C
            if is_up and sel_t > b_hi:
                b_hi = sel_t
            if is_dn and sel_t < b_lo:
                b_lo = sel_t
        b = 0.5 * (b_hi + b_lo)
        if b != b or b == NEGINF or b == POSINF:
            b = 0.0

    return alpha_np, b, it, converged, np.array(trace_list)
