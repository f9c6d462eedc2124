"""Top singular values, the bipartite mixing bounds, blow-ups and the trace bound."""

from __future__ import annotations

import hashlib
import math
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, InputError, NumericalError
from .graph import _content_lines, _parse_rows, format_weight

GRAM_FALLBACK_DIM = 64


def as_matrix(A) -> np.ndarray:
    M = np.array(A, dtype=float)
    if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
        raise InputError(f"expected a non-empty 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise InputError("matrix entries must be finite")
    return M


def _start_vector(M: np.ndarray) -> np.ndarray:
    digest = hashlib.blake2b(M.tobytes() + repr(M.shape).encode(), digest_size=8).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    v = rng.standard_normal(M.shape[1])
    return v / np.linalg.norm(v)


def _gram_top(M: np.ndarray) -> float:
    G = M.T @ M if M.shape[1] <= M.shape[0] else M @ M.T
    return math.sqrt(max(float(np.linalg.eigvalsh(G)[-1]), 0.0))


def top_singular_value(A, tol: float = 1e-10, max_iter: int | None = None) -> float:
    """Largest singular value by power iteration on ``A^T A``.

    The start vector is derived from a hash of the entries, so results are
    reproducible. Iteration stops once the eigen-residual certifies accuracy
    ``tol * max(1, sigma)``. Without convergence, matrices with a side of at
    most 64 fall back to a dense Gram eigenvalue; larger ones raise
    :class:`NumericalError` with a bracket.
    """
    if not tol > 0:
        raise InputError("tol must be positive")
    M = as_matrix(A)
    if not np.any(M):
        return 0.0
    dim = max(M.shape)
    if max_iter is None:
        max_iter = max(10, math.ceil(10 * dim * math.log(1 / min(tol, 0.5))))
    v = _start_vector(M)
    rho = 0.0
    resid = math.inf
    for _ in range(max_iter):
        u = M @ v
        w = M.T @ u
        rho = float(v @ w)
        resid = float(np.linalg.norm(w - rho * v))
        sigma = math.sqrt(max(rho, 0.0))
        # |rho - sigma_max^2| <= resid, so sigma is within resid / sigma
        if sigma > 0 and resid <= tol * max(1.0, sigma) * sigma:
            return sigma
        nw = np.linalg.norm(w)
        if nw == 0:
            break
        v = w / nw
    if min(M.shape) <= GRAM_FALLBACK_DIM:
        return _gram_top(M)
    sigma = math.sqrt(max(rho, 0.0))
    hi = math.sqrt(max(rho, 0.0) + resid)
    raise NumericalError(
        f"power iteration did not converge in {max_iter} steps", bracket=(sigma, hi)
    )


class MixingReport(NamedTuple):
    lhs1: float  # sum over rows v of d_C(v)^2
    rhs1: float  # lambda^2 |C|
    lhs2: float  # |e(B, C)|
    rhs2: float  # lambda sqrt(|B||C|)


def _indices(idx, size, what):
    arr = np.unique(np.asarray(list(idx), dtype=np.int64))
    if arr.size and (arr[0] < 0 or arr[-1] >= size):
        raise InputError(f"{what} index out of range")
    return arr


def mixing_report(A, B, C, lam: float | None = None) -> MixingReport:
    """Both sides of the two bipartite mixing inequalities for row set ``B``, column set ``C``."""
    M = as_matrix(A)
    b = _indices(B, M.shape[0], "row")
    c = _indices(C, M.shape[1], "column")
    if lam is None:
        lam = top_singular_value(M)
    dC = M[:, c].sum(axis=1)
    lhs1 = float(dC @ dC)
    lhs2 = abs(float(dC[b].sum()))
    return MixingReport(lhs1, lam * lam * c.size, lhs2, lam * math.sqrt(b.size * c.size))


def _all_masks(m: int) -> np.ndarray:
    return ((np.arange(1 << m)[:, None] >> np.arange(m)) & 1).astype(float)


def mixing_violations(A, tol: float = 1e-8, lam: float | None = None) -> tuple:
    """Exhaustive check over every row subset and column subset.

    Returns ``(part1_violations, part2_violations)``: the number of column sets
    ``C`` breaking part 1 and of pairs ``(B, C)`` breaking part 2. Intended for
    matrices with at most about 12 rows and columns.
    """
    M = as_matrix(A)
    r, c = M.shape
    if max(r, c) > 14:
        raise CapacityError("exhaustive mixing check is limited to 14 rows and columns")
    if lam is None:
        lam = top_singular_value(M)
    Rm, Cm = _all_masks(r), _all_masks(c)
    D = M @ Cm.T  # D[v, C] = d_C(v)
    csize = Cm.sum(axis=1)
    lhs1 = (D * D).sum(axis=0)
    bad1 = int(np.sum(lhs1 > lam * lam * csize + tol))
    E = np.abs(Rm @ D)  # E[B, C] = |e(B, C)|
    rhs2 = lam * np.sqrt(np.outer(Rm.sum(axis=1), csize))
    bad2 = int(np.sum(E > rhs2 + tol))
    return bad1, bad2


def blow_up(A, k: int, max_entries: int = 1 << 26) -> np.ndarray:
    """Replace every entry by a ``k x k`` constant block."""
    M = as_matrix(A)
    if int(k) != k or k < 1:
        raise InputError("k must be a positive integer")
    if M.size * k * k > max_entries:
        raise CapacityError(f"blow-up would have {M.size * k * k} entries (cap {max_entries})")
    return np.kron(M, np.ones((k, k)))


def trace_m2_bound(A) -> tuple:
    """``(tr((A A^T)^2), sigma_max^4)`` for a square matrix."""
    M = as_matrix(A)
    if M.shape[0] != M.shape[1]:
        raise InputError("trace bound needs a square matrix")
    G = M @ M.T
    lam = top_singular_value(M)
    return float(np.sum(G * G)), lam ** 4


def format_matrix(A) -> str:
    M = as_matrix(A)
    lines = [f"mat {M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(format_weight(x) for x in row) for row in M]
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    lines = _content_lines(text)
    if not lines:
        raise InputError("empty matrix file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "mat":
        raise InputError(f"bad matrix header {lines[0]!r}")
    try:
        r, c = int(head[1]), int(head[2])
    except ValueError:
        raise InputError(f"bad matrix header {lines[0]!r}") from None
    if r < 1 or c < 1:
        raise InputError("matrix dimensions must be positive")
    return as_matrix(_parse_rows(lines[1:], r, c, "matrix"))
