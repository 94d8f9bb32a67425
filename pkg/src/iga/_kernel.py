"""Compiled inner loop of the projected gradient simulation."""

import numba
import numpy as np

CONVERGED = 0
LIMIT_CYCLE = 1
UNDECIDED = 2
BLOWUP = 3

N_ANCHORS = 8


@numba.njit(cache=True, nogil=True)
def _clamp(x):
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


@numba.njit(cache=True, nogil=True)
def _values(p, a, b):
    ab = a * b
    nn = (1.0 - a) * (1.0 - b)
    an = a * (1.0 - b)
    na = (1.0 - a) * b
    return (p[0] * ab + p[3] * nn + p[1] * an + p[2] * na,
            p[4] * ab + p[7] * nn + p[5] * an + p[6] * na)


@numba.njit(cache=True, nogil=True)
def _projected(p, a, b):
    u = (p[0] + p[3]) - (p[2] + p[1])
    up = (p[4] + p[7]) - (p[6] + p[5])
    ga = b * u - (p[3] - p[1])
    gb = a * up - (p[7] - p[6])
    if (a <= 0.0 and ga < 0.0) or (a >= 1.0 and ga > 0.0):
        ga = 0.0
    if (b <= 0.0 and gb < 0.0) or (b >= 1.0 and gb > 0.0):
        gb = 0.0
    return ga, gb


@numba.njit(cache=True, nogil=True)
def integrate(p, a, b, h, time_weighted, record_every, conv_tol, window,
              detect_cycle, loop_min, anchor_spacing, rec):
    """Run ``len(h)`` projected gradient steps from ``(a, b)``.

    ``p`` holds r11, r12, r21, r22, c11, c12, c21, c22 and ``h[k - 1]`` is
    the step size of step k. Recorded samples go into ``rec`` (columns:
    step, time, alpha, beta, v_row, v_col, avg_row, avg_col).

    Cycle detection keeps a ring of ``N_ANCHORS`` past states, a new one
    every ``anchor_spacing`` time units. A recurrence is a return to within
    ``conv_tol`` (L-infinity) of an anchor after first moving more than
    ``loop_min`` away from it.

    Returns (status, n_records, steps_used, avg change over the final
    window, number of recurrences).
    """
    n = h.shape[0]
    vr, vc = _values(p, a, b)
    t = 0.0
    sum_r = 0.0
    sum_c = 0.0
    avg_r = vr
    avg_c = vc
    nrec = 0
    rec[0, 0] = 0.0
    rec[0, 1] = 0.0
    rec[0, 2] = a
    rec[0, 3] = b
    rec[0, 4] = vr
    rec[0, 5] = vc
    rec[0, 6] = avg_r
    rec[0, 7] = avg_c
    nrec = 1

    ga, gb = _projected(p, a, b)
    streak = 1 if np.hypot(ga, gb) < conv_tol else 0
    converged_at = 0 if streak >= window else -1

    anc_a = np.full(N_ANCHORS, a)
    anc_b = np.full(N_ANCHORS, b)
    anc_t = np.zeros(N_ANCHORS)
    anc_live = np.zeros(N_ANCHORS, dtype=np.bool_)
    anc_dmax = np.zeros(N_ANCHORS)
    anc_live[0] = True
    next_slot = 1
    next_anchor_t = anchor_spacing
    recurrences = 0
    last_recur_t = -1.0
    last_loop = 0.0
    first_recur_step = -1

    win_r = avg_r
    win_c = avg_c
    mark = n - window

    for k in range(1, n + 1):
        step = h[k - 1]
        a = _clamp(a + step * ga)
        b = _clamp(b + step * gb)
        if not (np.isfinite(a) and np.isfinite(b)):
            return BLOWUP, nrec, k, 0.0, recurrences
        nr, nc = _values(p, a, b)
        t += step
        if time_weighted:
            sum_r += 0.5 * step * (vr + nr)
            sum_c += 0.5 * step * (vc + nc)
            avg_r = sum_r / t
            avg_c = sum_c / t
        else:
            avg_r += (nr - avg_r) / (k + 1)
            avg_c += (nc - avg_c) / (k + 1)
        vr = nr
        vc = nc
        if not (np.isfinite(avg_r) and np.isfinite(avg_c)):
            return BLOWUP, nrec, k, 0.0, recurrences

        ga, gb = _projected(p, a, b)
        if np.hypot(ga, gb) < conv_tol:
            streak += 1
            if streak == window:
                converged_at = k
        else:
            streak = 0
            converged_at = -1

        if detect_cycle:
            for j in range(N_ANCHORS):
                if not anc_live[j]:
                    continue
                d = max(abs(a - anc_a[j]), abs(b - anc_b[j]))
                if d > anc_dmax[j]:
                    anc_dmax[j] = d
                if anc_dmax[j] > loop_min and d < conv_tol:
                    recurrences += 1
                    if first_recur_step < 0:
                        first_recur_step = k
                    last_loop = t - anc_t[j]
                    last_recur_t = t
                    anc_a[j] = a
                    anc_b[j] = b
                    anc_t[j] = t
                    anc_dmax[j] = 0.0
            if t >= next_anchor_t:
                anc_a[next_slot] = a
                anc_b[next_slot] = b
                anc_t[next_slot] = t
                anc_dmax[next_slot] = 0.0
                anc_live[next_slot] = True
                next_slot = (next_slot + 1) % N_ANCHORS
                next_anchor_t = t + anchor_spacing

        if k == mark:
            win_r = avg_r
            win_c = avg_c
        if k % record_every == 0 or k == n:
            rec[nrec, 0] = k
            rec[nrec, 1] = t
            rec[nrec, 2] = a
            rec[nrec, 3] = b
            rec[nrec, 4] = vr
            rec[nrec, 5] = vc
            rec[nrec, 6] = avg_r
            rec[nrec, 7] = avg_c
            nrec += 1

    drift = max(abs(avg_r - win_r), abs(avg_c - win_c))
    if streak >= window:
        return CONVERGED, nrec, converged_at, drift, recurrences
    recent = recurrences > 0 and t - last_recur_t <= 2.0 * last_loop
    if detect_cycle and recent and drift < conv_tol:
        return LIMIT_CYCLE, nrec, first_recur_step, drift, recurrences
    return UNDECIDED, nrec, n, drift, recurrences
