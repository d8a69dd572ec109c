"""Pure-Python backend for the hot kernels: tree growth, tree prediction, SMO.

This module and its compiled twin (``_core.pyx``) implement the same
algorithms with identical arithmetic ordering, so both yield bit-identical
trees and SVM solutions for the same inputs. To keep that true, every log2
here is either a lookup in the caller-supplied ``x*log2(x)`` table (uniform
weights) or a direct ``math.log2`` call (same libm the extension links).

Trees are returned as flat node arrays: ``feature`` (-1 for leaves),
``threshold``, ``left``/``right`` child ids, raw ``n_cases``, and weighted
class totals ``w0``/``w1``. Forests concatenate trees with an offsets array.
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "python"

_MASK64 = (1 << 64) - 1

#: Gains at or below this are treated as no information (float noise floor).
MIN_GAIN = 1e-9


def _mix(state: int) -> tuple[int, int]:
    """splitmix64 step shared verbatim with the compiled backend."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


def _xlog2(x: float) -> float:
    return x * math.log2(x) if x > 0.0 else 0.0


def _scan_uniform(vals, labs, c_all, c1, parent_term, min_weight, log_table):
    """Best-gain boundary for one feature under unit case weights.

    Entropy terms come from the shared k*log2(k) table, so gains are exact
    integer-count lookups combined in a fixed expression order.
    """
    left1 = np.cumsum(labs == 1, dtype=np.int64)[:-1]
    left_n = np.arange(1, c_all, dtype=np.int64)
    right_n = c_all - left_n
    right1 = c1 - left1
    boundary = vals[:-1] != vals[1:]
    valid = boundary & (left_n >= min_weight) & (right_n >= min_weight)
    left_term = log_table[left_n] - log_table[left1] - log_table[left_n - left1]
    right_term = (log_table[right_n] - log_table[right1]
                  - log_table[right_n - right1])
    gains = (parent_term - left_term - right_term) / float(c_all)
    gains = np.where(valid, gains, -np.inf)
    bi = int(np.argmax(gains))
    return gains[bi], bi, float(left_n[bi])


def _scan_weighted(vals, labs, ws, w_total, w1_total, parent_term, min_weight):
    """Best-gain boundary for one feature under arbitrary case weights."""
    best_gain = -np.inf
    best_i = -1
    best_wl = 0.0
    wl = 0.0
    wl1 = 0.0
    last = len(vals) - 1
    for i in range(last):
        wi = ws[i]
        wl = wl + wi
        if labs[i] == 1:
            wl1 = wl1 + wi
        if vals[i] == vals[i + 1]:
            continue
        wr = w_total - wl
        if wl < min_weight or wr < min_weight:
            continue
        wr1 = w1_total - wl1
        left_term = _xlog2(wl) - _xlog2(wl1) - _xlog2(wl - wl1)
        right_term = _xlog2(wr) - _xlog2(wr1) - _xlog2(wr - wr1)
        gain = (parent_term - left_term - right_term) / w_total
        if gain > best_gain:
            best_gain = gain
            best_i = i
            best_wl = wl
    return best_gain, best_i, best_wl


def grow_forest(X, y, w, order, log_table, n_trees, mtry, min_weight,
                bootstrap, seeds):
    """Grow gain-ratio trees; see the module docstring for the output layout.

    Parameters mirror the compiled kernel exactly: ``order`` holds, per
    feature, the row indices sorted by that feature (stable), ``log_table``
    is k*log2(k) for k = 0..n, ``w=None`` selects the unit-weight fast path,
    and ``seeds`` feeds the in-kernel splitmix64 generator (bootstrap draws
    first, then per-node feature subsets).
    """
    X = np.ascontiguousarray(X, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.int8)
    n, p = X.shape
    uniform = w is None
    if not uniform:
        w = np.ascontiguousarray(w, dtype=np.float64)

    feat_out: list[int] = []
    thr_out: list[float] = []
    left_out: list[int] = []
    right_out: list[int] = []
    ncases_out: list[int] = []
    w0_out: list[float] = []
    w1_out: list[float] = []
    offsets = [0]

    side = np.zeros(n, dtype=bool)

    for t in range(n_trees):
        state = int(seeds[t]) & _MASK64
        if bootstrap:
            counts = np.zeros(n, dtype=np.int64)
            for _ in range(n):
                state, z = _mix(state)
                counts[z % n] += 1
            sidx = [np.repeat(order[f], counts[order[f]]).astype(np.int32)
                    for f in range(p)]
            m = n
        else:
            sidx = [np.array(order[f], dtype=np.int32, copy=True)
                    for f in range(p)]
            m = n

        base = len(feat_out)
        stack = [(0, m, -1, 0)]  # lo, hi, parent node id, is_left
        while stack:
            lo, hi, parent, is_left = stack.pop()
            node = len(feat_out) - base
            if parent >= 0:
                if is_left:
                    left_out[base + parent] = node
                else:
                    right_out[base + parent] = node

            seg0 = sidx[0][lo:hi]
            labs0 = y[seg0]
            c_all = hi - lo
            c1 = int(np.count_nonzero(labs0 == 1))
            c0 = c_all - c1
            if uniform:
                w_total, w1_total, w0_total = float(c_all), float(c1), float(c0)
            else:
                ws0 = w[seg0]
                w_total = float(np.cumsum(ws0)[-1])
                w1_total = float(np.cumsum(ws0 * (labs0 == 1))[-1])
                w0_total = w_total - w1_total

            feat_out.append(-1)
            thr_out.append(0.0)
            left_out.append(-1)
            right_out.append(-1)
            ncases_out.append(c_all)
            w0_out.append(w0_total)
            w1_out.append(w1_total)
            if c1 == 0 or c0 == 0 or c_all < 2:
                continue

            if mtry >= p:
                feats = list(range(p))
            else:
                pool = list(range(p))
                for j in range(mtry):
                    state, z = _mix(state)
                    k = j + z % (p - j)
                    pool[j], pool[k] = pool[k], pool[j]
                feats = sorted(pool[:mtry])

            if uniform:
                parent_term = (log_table[c_all] - log_table[c1] - log_table[c0])
            else:
                parent_term = (_xlog2(w_total) - _xlog2(w1_total)
                               - _xlog2(w0_total))

            cands = []  # (feature, gain, boundary index, left weight)
            for f in feats:
                seg = sidx[f][lo:hi]
                vals = X[seg, f]
                labs = y[seg]
                if uniform:
                    gain, bi, wl = _scan_uniform(
                        vals, labs, c_all, c1, parent_term, min_weight, log_table)
                else:
                    gain, bi, wl = _scan_weighted(
                        vals, labs, w[seg], w_total, w1_total, parent_term,
                        min_weight)
                if bi >= 0 and gain > MIN_GAIN:
                    cands.append((f, float(gain), bi, wl))
            if not cands:
                continue

            avg_gain = 0.0
            for _, gain, _, _ in cands:
                avg_gain += gain
            avg_gain /= len(cands)

            best_ratio = -1.0
            best = None
            for f, gain, bi, wl in cands:
                if gain < avg_gain - 1e-12:
                    continue
                if uniform:
                    nl = int(wl)
                    si = (log_table[c_all] - log_table[nl]
                          - log_table[c_all - nl]) / float(c_all)
                else:
                    si = (_xlog2(w_total) - _xlog2(wl)
                          - _xlog2(w_total - wl)) / w_total
                ratio = gain / si
                if ratio > best_ratio:
                    best_ratio = ratio
                    best = (f, bi)
            f_star, bi = best
            seg = sidx[f_star][lo:hi]
            v = X[seg[bi], f_star]
            v_next = X[seg[bi + 1], f_star]
            thr = 0.5 * (v + v_next)
            if thr >= v_next:
                thr = v

            feat_out[base + node] = f_star
            thr_out[base + node] = thr

            side[seg[:bi + 1]] = True
            for f in range(p):
                part = sidx[f][lo:hi]
                mask = side[part]
                sidx[f][lo:hi] = np.concatenate([part[mask], part[~mask]])
            side[seg] = False

            mid = lo + bi + 1
            stack.append((mid, hi, node, 0))
            stack.append((lo, mid, node, 1))
        offsets.append(len(feat_out))

    return (np.array(feat_out, dtype=np.int32),
            np.array(thr_out, dtype=np.float64),
            np.array(left_out, dtype=np.int32),
            np.array(right_out, dtype=np.int32),
            np.array(ncases_out, dtype=np.int32),
            np.array(w0_out, dtype=np.float64),
            np.array(w1_out, dtype=np.float64),
            np.array(offsets, dtype=np.int32))


def predict_trees(feature, threshold, left, right, w0, w1, offsets, X):
    """Predict every probe row with every tree; ties at leaves go to class 1."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    n_trees = len(offsets) - 1
    q = X.shape[0]
    out = np.empty((n_trees, q), dtype=np.int8)
    rows = np.arange(q)
    for t in range(n_trees):
        root = offsets[t]
        pos = np.full(q, root, dtype=np.int64)
        while True:
            feats = feature[pos]
            active = feats >= 0
            if not active.any():
                break
            apos = pos[active]
            go_left = X[rows[active], feats[active]] <= threshold[apos]
            pos[active] = np.where(go_left, left[apos], right[apos]) + root
        out[t] = (w1[pos] >= w0[pos]).astype(np.int8)
    return out


def smo_train(K, y, C, tol, max_passes, want_trace=False):
    """SMO with second-order working-set selection on a precomputed Gram
    matrix.

    The first index is the strongest KKT violator; the partner maximizes the
    guaranteed dual gain (violation squared over pair curvature), which
    avoids the zigzag stalls plain maximal-violating-pair selection hits on
    degenerate kernels. Stops when the violation gap falls to tol, so the
    returned solution satisfies the KKT conditions within tol. Deterministic:
    ties keep the lowest index. Returns (alpha, b, iterations, converged,
    per-iteration dual objective trace).
    """
    K = np.ascontiguousarray(K, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    n = len(y)
    alpha = np.zeros(n, dtype=np.float64)
    grad = np.full(n, -1.0)  # gradient of the min-form dual at alpha = 0
    diag = np.ascontiguousarray(np.diag(K))
    tau = 1e-12
    trace: list[float] = []
    converged = False
    it = 0
    pos = y > 0.0

    while it < max_passes:
        sel = -y * grad
        up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
        dn = (pos & (alpha > 0.0)) | (~pos & (alpha < C))
        if not up.any() or not dn.any():
            converged = True
            break
        i = int(np.argmax(np.where(up, sel, -np.inf)))
        m_val = sel[i]
        big_m = float(np.min(np.where(dn, sel, np.inf)))
        if m_val - big_m <= tol:
            converged = True
            break
        viol = m_val - sel
        curve = np.where(diag[i] + diag - 2.0 * K[i] > 0.0,
                         diag[i] + diag - 2.0 * K[i], tau)
        score = (viol * viol) / curve
        cand = dn & (viol > 0.0)
        j = int(np.argmax(np.where(cand, score, -np.inf)))

        yi, yj = y[i], y[j]
        ai_old, aj_old = float(alpha[i]), float(alpha[j])
        quad = K[i, i] + K[j, j] - 2.0 * K[i, j]
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
        np.add(grad, y * (ci * K[i] + cj * K[j]), out=grad)
        it += 1
        if want_trace:
            s_a = float(np.cumsum(alpha)[-1])
            s_ag = float(np.cumsum(alpha * grad)[-1])
            trace.append(0.5 * (s_a - s_ag))

    sel = -y * grad
    free = (alpha > 0.0) & (alpha < C)
    if free.any():
        b = float(np.cumsum(sel[free])[-1]) / int(free.sum())
    else:
        up = (pos & (alpha < C)) | (~pos & (alpha > 0.0))
        dn = (pos & (alpha > 0.0)) | (~pos & (alpha < C))
        hi = float(np.max(np.where(up, sel, -np.inf))) if up.any() else np.nan
        lo = float(np.min(np.where(dn, sel, np.inf))) if dn.any() else np.nan
        b = 0.5 * (hi + lo)
        if not np.isfinite(b):
            b = 0.0

    return alpha, b, it, converged, np.array(trace)
