"""Exact irregularity of vertex-set pairs and partitions.

``irreg(X, Y)`` is the largest value of ``|e(U, W) - |U||W| d(X, Y)|`` over all
``U`` in ``X`` and ``W`` in ``Y``. For a fixed ``U`` the best ``W`` is the set
of vertices ``w`` with ``f(w) = e(U, {w}) - |U| d(X, Y)`` positive, or the set
with ``f(w)`` negative, so only subsets of the smaller side are searched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._cutkernel import best_rows
from .errors import CapacityError, InputError
from .graph import VertexPartition, WeightedGraph, as_vertex_set, density, edge_sum

DEFAULT_CAP = 24
HARD_CAP = 62  # row masks are held in a signed 64-bit integer

# Deviations below ZERO_TOL * |X||Y| are treated as exact zeros.
ZERO_TOL = 1e-12


@dataclass(frozen=True)
class IrregularityWitness:
    U: tuple
    W: tuple
    value: float

    def format(self) -> str:
        ids = lambda s: ",".join(str(v) for v in s)
        return f"witness value={self.value!r} U={ids(self.U)} W={ids(self.W)}"

    @classmethod
    def parse(cls, line: str) -> "IrregularityWitness":
        toks = line.split()
        if len(toks) != 4 or toks[0] != "witness":
            raise InputError(f"bad witness line {line!r}")
        fields = {}
        for tok in toks[1:]:
            key, _, val = tok.partition("=")
            fields[key] = val
        try:
            ids = lambda s: tuple(int(v) for v in s.split(",")) if s else ()
            return cls(ids(fields["U"]), ids(fields["W"]), float(fields["value"]))
        except (KeyError, ValueError):
            raise InputError(f"bad witness line {line!r}") from None


def _pair(g: WeightedGraph, X, Y):
    X = as_vertex_set(X, g.n)
    Y = as_vertex_set(Y, g.n)
    if not X or not Y:
        raise InputError("irregularity needs non-empty vertex sets")
    return X, Y


def _check_cap(X, Y, cap):
    side = min(len(X), len(Y))
    if side > min(cap, HARD_CAP):
        raise CapacityError(
            f"exact irregularity enumerates 2^{side} subsets, above the cap of "
            f"{min(cap, HARD_CAP)}; use the spectral bounds for blocks this large"
        )


def _mask_members(mask: int, ids) -> tuple:
    return tuple(v for j, v in enumerate(ids) if (mask >> j) & 1)


def _closed_form_side(f: np.ndarray, atol: float):
    """Pick between the positive and negative support of ``f``.

    Returns a boolean selector. Ties go to the set with the smaller bitmask.
    """
    pos = f > atol
    neg = f < -atol
    vp = f[pos].sum()
    vn = -f[neg].sum()
    if abs(vp - vn) <= atol * max(1, f.size):
        key = lambda sel: sum(1 << int(j) for j in np.flatnonzero(sel))
        return pos if key(pos) <= key(neg) else neg
    return pos if vp > vn else neg


def irreg_exact(g: WeightedGraph, X, Y, cap: int = DEFAULT_CAP) -> IrregularityWitness:
    """Exact irregularity of ``(X, Y)`` with a maximising witness.

    Ties are broken toward the smallest bitmask on the enumerated side (the
    smaller of ``X`` and ``Y``, ``X`` on equal sizes), bit ``j`` standing for
    its ``j``-th smallest vertex, and then toward the smaller closed-form set.
    """
    X, Y = _pair(g, X, Y)
    _check_cap(X, Y, cap)
    d = density(g, X, Y)
    B = g.weights[np.ix_(X, Y)] - d
    swapped = len(Y) < len(X)
    if swapped:
        B = B.T
        rows_ids, cols_ids = Y, X
    else:
        rows_ids, cols_ids = X, Y
    tol = ZERO_TOL * len(X) * len(Y)
    value, mask = best_rows(B, tol)
    if value <= tol:
        return IrregularityWitness((), (), 0.0)
    rows = _mask_members(mask, rows_ids)
    sel = np.array([(mask >> j) & 1 for j in range(len(rows_ids))], dtype=bool)
    f = B[sel].sum(axis=0)
    cols = tuple(np.asarray(cols_ids)[_closed_form_side(f, ZERO_TOL * len(rows_ids))].tolist())
    U, W = (cols, rows) if swapped else (rows, cols)
    return IrregularityWitness(U, W, deviation(g, U, W, d))


def deviation(g: WeightedGraph, U, W, d: float) -> float:
    """``|e(U, W) - |U||W| d|``, the quantity a witness certifies."""
    return abs(edge_sum(g, U, W) - len(U) * len(W) * d)


def irreg_partition(g: WeightedGraph, P: VertexPartition, cap: int = DEFAULT_CAP):
    """Sum of ``irreg(V_i, V_j)`` over ordered block pairs, with witnesses.

    Only pairs with ``i <= j`` are searched; the witness for ``(j, i)`` is the
    transpose of the one for ``(i, j)`` and has the same value.
    """
    if P.n != g.n:
        raise InputError(f"partition covers {P.n} vertices but the graph has {g.n}")
    for b in P.blocks:
        _check_cap(b, b, cap)
    witnesses = {}
    total = 0.0
    k = len(P)
    for i in range(k):
        for j in range(i, k):
            w = irreg_exact(g, P[i], P[j], cap)
            witnesses[(i, j)] = w
            total += w.value
            if j != i:
                witnesses[(j, i)] = IrregularityWitness(w.W, w.U, w.value)
                total += w.value
    return total, witnesses


def irreg_partition_value(g: WeightedGraph, P: VertexPartition, cap: int = DEFAULT_CAP) -> float:
    return irreg_partition(g, P, cap)[0]


def pair_lower_bound(g: WeightedGraph, S, T, S1, S2, T1, T2) -> float:
    """Certified lower bound on ``irreg(S, T)`` from two sub-rectangles.

    Returns ``|e(S2,T2) - (|S2||T2| / |S1||T1|) e(S1,T1)| / 2``; requires
    ``|S2||T2| <= |S1||T1|``.
    """
    S, T, S1, S2, T1, T2 = (as_vertex_set(x, g.n) for x in (S, T, S1, S2, T1, T2))
    if not (S and T and S1 and S2 and T1 and T2):
        raise InputError("all four subsets must be non-empty")
    sset, tset = set(S), set(T)
    if not (set(S1) <= sset and set(S2) <= sset and set(T1) <= tset and set(T2) <= tset):
        raise InputError("S1, S2 must lie in S and T1, T2 in T")
    a1, a2 = len(S1) * len(T1), len(S2) * len(T2)
    if a2 > a1:
        raise InputError("need |S2||T2| <= |S1||T1|")
    return 0.5 * abs(edge_sum(g, S2, T2) - a2 / a1 * edge_sum(g, S1, T1))


def coarsen_bound(irreg_fine: float, k: int) -> float:
    """Lower bound ``I / (2k^2)`` on the irregularity of a coarsening."""
    if int(k) != k or k < 1:
        raise InputError("k must be a positive integer")
    if irreg_fine < 0:
        raise InputError("irregularity is non-negative")
    return irreg_fine / (2 * k * k)


def _subset_masks(m: int, min_size: int):
    masks = np.arange(1 << m, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(m)) & 1).astype(np.int8)
    return bits[bits.sum(axis=1) >= min_size]


def eps_regular_check(g: WeightedGraph, X, Y, eps: float, cap: int = DEFAULT_CAP) -> bool:
    """Exhaustive test of ``|d(U,W) - d(X,Y)| <= eps`` for all large ``U, W``.

    Subsets of the smaller side are enumerated; for each one and each size of
    the other side, the extreme densities come from the largest and smallest
    column sums.
    """
    X, Y = _pair(g, X, Y)
    if not (0 < eps <= 1):
        raise InputError("eps must lie in (0, 1]")
    _check_cap(X, Y, cap)
    d = density(g, X, Y)
    M = g.weights[np.ix_(X, Y)]
    if len(Y) < len(X):
        M = M.T
    m, p = M.shape
    slack = 1e-12
    kmin_r = max(1, math.ceil(eps * m - slack))
    kmin_c = max(1, math.ceil(eps * p - slack))
    ks = np.arange(kmin_c, p + 1)
    chunk = max(1, (1 << 20) // max(1, p * m))
    masks = _subset_masks(m, kmin_r)
    for start in range(0, len(masks), chunk):
        bits = masks[start:start + chunk]
        sizes = bits.sum(axis=1)[:, None].astype(float)
        colsum = np.sort(bits @ M, axis=1)
        csum = np.cumsum(colsum, axis=1)
        low = csum[:, ks - 1] / (sizes * ks)
        top = (csum[:, -1:] - np.concatenate([np.zeros((len(bits), 1)), csum], axis=1)[:, p - ks]) / (sizes * ks)
        if np.any(np.abs(low - d) > eps + slack) or np.any(np.abs(top - d) > eps + slack):
            return False
    return True
