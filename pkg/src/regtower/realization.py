"""Rounding weighted graphs to 0/1 graphs and the irregularity perturbation bounds."""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._cutkernel import max_cut_value
from .errors import CapacityError, InputError
from .graph import VertexPartition, WeightedGraph
from .irregularity import DEFAULT_CAP, irreg_exact, irreg_partition

DEVIATION_CAP = 12


def round_to_unweighted(g: WeightedGraph, seed: int) -> WeightedGraph:
    """Keep each pair as an edge with probability equal to its weight.

    One uniform draw per unordered pair, taken in row-major order over the
    upper triangle, so the result depends only on ``g`` and ``seed``.
    """
    W = g.weights
    if W.min() < 0 or W.max() > 1:
        raise InputError("rounding needs weights in [0, 1]")
    n = g.n
    iu = np.triu_indices(n, 1)
    u = np.random.default_rng(seed).random(iu[0].size)
    keep = (u < W[iu]).astype(float)
    out = np.zeros((n, n))
    out[iu] = keep
    return WeightedGraph(out + out.T)


def max_deviation_exact(g: WeightedGraph, g2: WeightedGraph) -> float:
    """``max_{A, B} |e_g(A, B) - e_g2(A, B)|`` over all vertex subsets (n <= 12)."""
    if g.n != g2.n:
        raise InputError("graphs have different vertex counts")
    if g.n > DEVIATION_CAP:
        raise CapacityError(f"exact deviation is limited to {DEVIATION_CAP} vertices")
    D = g.weights - g2.weights
    return float(max_cut_value(D)[0])


class GapReport(NamedTuple):
    gap: float
    bound: float

    @property
    def holds(self) -> bool:
        return self.gap <= self.bound + 1e-9


def perturbation_irreg_gap(g: WeightedGraph, g2: WeightedGraph, target, t: float | None = None,
                           cap: int = DEFAULT_CAP) -> GapReport:
    """Compare irregularities of two graphs on a pair ``(U, W)`` or a partition.

    For a pair the bound is ``2t``; for a partition with ``k`` parts it is
    ``2 k^2 t``, where ``t`` is the exact maximum deviation between the graphs.
    """
    if t is None:
        t = max_deviation_exact(g, g2)
    if isinstance(target, VertexPartition):
        a = irreg_partition(g, target, cap)[0]
        b = irreg_partition(g2, target, cap)[0]
        k = len(target)
        return GapReport(abs(a - b), 2 * k * k * t)
    U, W = target
    a = irreg_exact(g, U, W, cap).value
    b = irreg_exact(g2, U, W, cap).value
    return GapReport(abs(a - b), 2 * t)


def round_with_check(g: WeightedGraph, seed: int, attempts: int = 10):
    """Resample until the deviation is at most ``4 N^(3/2)``.

    Returns ``(graph, deviation, attempts_used)``; the graph is ``None`` when
    every attempt failed. Draw ``a`` uses seed ``[seed, a]``.
    """
    if attempts < 1:
        raise InputError("attempts must be positive")
    limit = 4 * g.n ** 1.5
    dev = None
    for a in range(attempts):
        h = round_to_unweighted(g, [seed, a])
        dev = max_deviation_exact(g, h)
        if dev <= limit:
            return h, dev, a + 1
    return None, dev, attempts
