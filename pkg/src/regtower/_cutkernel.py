"""Exact search for ``max_{u in {0,1}^m, w in {0,1}^p} |u^T B w|``.

For a fixed row set the best column set is closed form (the positive part or
the negative part of the summed rows), so only row subsets are searched. The
search is a Russian-doll branch and bound: rows are added one at a time from
the highest index down, and the optimum over every row prefix ``{0..j}`` is
solved first and reused as a bound for longer prefixes. Worst case it is still
``O(2^m p)``, but on typical inputs it visits a small fraction of the subsets.

A second pass returns the row subset with the smallest bitmask (bit ``j`` for
row ``j``) among those that reach the optimum, so witnesses are deterministic.
"""

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _doll(B, sgn):
    """Russian-doll optimum of ``sum_w max(sgn * (u^T B)_w, 0)`` over row prefixes.

    Returns ``opt`` with ``opt[j + 1]`` = optimum over rows ``{0..j}`` and
    ``opt[0] = 0``.
    """
    m, p = B.shape
    C = sgn * B
    # tail[j, w] = sum_{r < j} max(C[r, w], 0): optimistic gain from rows below j
    tail = np.zeros((m + 1, p))
    for j in range(m):
        for w in range(p):
            tail[j + 1, w] = tail[j, w] + max(C[j, w], 0.0)
    opt = np.zeros(m + 1)
    F = np.zeros((m + 1, p))
    state = np.zeros(m + 1, np.int8)
    for top in range(m):
        best = opt[top]
        for w in range(p):
            F[top, w] = C[top, w]
        # depth d means rows top-1 .. d are decided; F[d] is the running sum
        d = top
        state[d] = 0
        while d <= top:
            s = state[d]
            if s == 0:
                fp = 0.0
                ub = 0.0
                for w in range(p):
                    f = F[d, w]
                    if f > 0.0:
                        fp += f
                    g = f + tail[d, w]
                    if g > 0.0:
                        ub += g
                if fp + opt[d] <= best or ub <= best:
                    d += 1
                    continue
                if d == 0:
                    best = fp
                    d += 1
                    continue
                # exclude row d-1 first, then include it
                state[d] = 1
                for w in range(p):
                    F[d - 1, w] = F[d, w]
                state[d - 1] = 0
                d -= 1
            elif s == 1:
                r = d - 1
                for w in range(p):
                    F[r, w] = F[d, w] + C[r, w]
                state[d] = 2
                state[r] = 0
                d = r
            else:
                d += 1
        opt[top + 1] = best
    return opt, tail


@njit(cache=True, fastmath=True)
def _first_mask(B, optp, optn, tailp, tailn, target):
    """Smallest row bitmask whose closed-form value reaches ``target``."""
    m, p = B.shape
    top = 0
    while top < m and max(optp[top + 1], optn[top + 1]) < target:
        top += 1
    if top == m:
        return np.int64(-1)
    F = np.zeros((m + 1, p))
    state = np.zeros(m + 1, np.int8)
    for w in range(p):
        F[top, w] = B[top, w]
    mask = np.int64(1) << top
    d = top
    state[d] = 0
    while d <= top:
        s = state[d]
        if s == 0:
            fp = 0.0
            fn = 0.0
            up = 0.0
            un = 0.0
            for w in range(p):
                f = F[d, w]
                if f > 0.0:
                    fp += f
                else:
                    fn -= f
                g = f + tailp[d, w]
                if g > 0.0:
                    up += g
                h = -f + tailn[d, w]
                if h > 0.0:
                    un += h
            bp = min(fp + optp[d], up)
            bn = min(fn + optn[d], un)
            if bp < target and bn < target:
                d += 1
                continue
            if d == 0:
                if fp >= target or fn >= target:
                    return mask
                d += 1
                continue
            state[d] = 1
            for w in range(p):
                F[d - 1, w] = F[d, w]
            state[d - 1] = 0
            d -= 1
        elif s == 1:
            r = d - 1
            for w in range(p):
                F[r, w] = F[d, w] + B[r, w]
            mask |= np.int64(1) << r
            state[d] = 2
            state[r] = 0
            d = r
        else:
            mask &= ~(np.int64(1) << (d - 1))
            d += 1
    return np.int64(-1)


def max_cut_value(B: np.ndarray):
    """Return ``(value, optp, optn, tailp, tailn)`` for both sign objectives."""
    B = np.ascontiguousarray(B, dtype=np.float64)
    optp, tailp = _doll(B, 1.0)
    optn, tailn = _doll(B, -1.0)
    return max(optp[-1], optn[-1]), optp, optn, tailp, tailn


def best_rows(B: np.ndarray, tol: float):
    """Optimum value and the smallest row mask reaching ``value - tol``.

    Values within ``tol`` of zero are treated as zero and give the empty mask.
    """
    B = np.ascontiguousarray(B, dtype=np.float64)
    value, optp, optn, tailp, tailn = max_cut_value(B)
    if value <= tol:
        return value, 0
    mask = _first_mask(B, optp, optn, tailp, tailn, value - tol)
    return value, int(mask)
