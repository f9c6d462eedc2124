"""Blue/red accounting of a candidate partition against a construction trace.

A vertex ``v`` in candidate part ``S`` is blue at level ``i`` when the level-``i``
part containing ``v`` holds strictly more than half of ``S``. Ties are red.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .construction import (
    INACTIVE_BENCHMARK,
    SEPARATION_BENCHMARK,
    ConstructionTrace,
    _inactive_fraction,
    _separation_fraction,
)
from .errors import CapacityError, InputError
from .graph import VertexPartition, common_refinement
from .irregularity import DEFAULT_CAP, irreg_exact

# Constant of the counting bounds: the share of W lost to inactive or
# non-separating peers.
LOSS = 0.8


class PartColoring(NamedTuple):
    block: tuple
    i_S: int
    never_blue: bool
    chain: tuple  # chain[j] = blue vertices of the part at level j, j = 0..s


@dataclass
class ColorTrace:
    v: list  # blue fraction of V per level
    w: list  # blue fraction of W per level
    blue: np.ndarray  # (s + 1, 2N) bool
    parts: list

    @property
    def steps(self) -> int:
        return len(self.v) - 1


def _level_labels(trace: ConstructionTrace, i: int) -> np.ndarray:
    """Global id of the level-``i`` part holding each vertex (W parts offset by ``k_i``)."""
    N, b, k = trace.N, trace.part_len(i), trace.k(i)
    idx = np.arange(2 * trace.N)
    return np.where(idx < N, idx // b, k + (idx - N) // b)


def _check_candidate(trace: ConstructionTrace, candidate: VertexPartition):
    if candidate.n != 2 * trace.N:
        raise InputError(f"candidate covers {candidate.n} vertices, the trace has {2 * trace.N}")


def color_trace(trace: ConstructionTrace, candidate: VertexPartition) -> ColorTrace:
    _check_candidate(trace, candidate)
    N, s = trace.N, trace.s
    cand = candidate.labels()
    sizes = candidate.sizes()
    blue = np.zeros((s + 1, 2 * N), dtype=bool)
    for i in range(s + 1):
        lab = _level_labels(trace, i)
        key = cand * (2 * trace.k(i)) + lab
        _, inv, counts = np.unique(key, return_inverse=True, return_counts=True)
        blue[i] = 2 * counts[inv] > sizes[cand]
    parts = []
    for bidx, block in enumerate(candidate.blocks):
        arr = np.asarray(block)
        chain = tuple(tuple(arr[blue[i, arr]].tolist()) for i in range(s + 1))
        nonempty = [i for i in range(s + 1) if chain[i]]
        parts.append(PartColoring(block, nonempty[-1] if nonempty else 0, not nonempty, chain))
    v = [float(blue[i, :N].mean()) for i in range(s + 1)]
    w = [float(blue[i, N:].mean()) for i in range(s + 1)]
    return ColorTrace(v, w, blue, parts)


def refinement_closeness(trace: ConstructionTrace, candidate: VertexPartition) -> tuple:
    """Share of each side lying in candidate parts with a strict-majority home block at level ``s``."""
    _check_candidate(trace, candidate)
    N, s = trace.N, trace.s
    lab = _level_labels(trace, s)
    close = np.zeros(2 * N, dtype=bool)
    for block in candidate.blocks:
        arr = np.asarray(block)
        counts = np.bincount(lab[arr])
        if 2 * counts.max() > arr.size:
            close[arr] = True
    return float(close[:N].mean()), float(close[N:].mean())


class CountingRow(NamedTuple):
    lemma: str
    part: int | None
    measured: float
    paper_bound: float
    premises_hold: bool
    status: str


@dataclass
class CountingReport:
    step: int
    premises_hold: bool
    rows: list

    def format(self) -> str:
        lines = ["lemma,part,measured,paper_bound,premises_hold,status"]
        for r in self.rows:
            part = "" if r.part is None else str(r.part)
            lines.append(f"{r.lemma},{part},{r.measured!r},{r.paper_bound!r},{int(r.premises_hold)},{r.status}")
        return "\n".join(lines) + "\n"

    @property
    def failures(self) -> list:
        return [r for r in self.rows if r.status == "fail"]


def counting_premises(trace: ConstructionTrace) -> bool:
    """Strict properties, large-scale parameters, few inactive pairs and enough separation."""
    p = trace.params
    if not (p.strict_properties and p.paper_scale()):
        return False
    m = p.grid
    if any(_inactive_fraction(trace.cumulative[i], m) > INACTIVE_BENCHMARK for i in range(p.s + 1)):
        return False
    for i in range(2, p.s + 1):
        if min(_separation_fraction(trace.labels_V[i]), _separation_fraction(trace.labels_W[i])) < SEPARATION_BENCHMARK:
            return False
    return True


def _split_by_side(trace: ConstructionTrace, candidate: VertexPartition) -> VertexPartition:
    N = trace.N
    sides = VertexPartition([range(N), range(N, 2 * N)], 2 * N)
    return common_refinement(candidate, sides)


def _row(lemma, part, measured, bound, gate):
    if gate:
        status = "pass" if measured >= bound - 1e-9 else "fail"
    else:
        status = "report"
    return CountingRow(lemma, part, float(measured), float(bound), gate, status)


def counting_report(trace: ConstructionTrace, candidate: VertexPartition, j: int,
                    cap: int = DEFAULT_CAP) -> CountingReport:
    """Measured sides of the counting bounds at step ``j`` next to their large-scale bounds.

    Candidate parts that straddle both sides are first split by side. ``W'`` is
    the set of blue ``W`` vertices at level ``j``. The irregularity terms are
    exact sums over pairs of a ``V`` part and a ``W`` part; when a part is too
    large for the exact oracle the measured value is ``nan``.
    """
    s = trace.s
    if int(j) != j or not (2 <= j <= s):
        raise InputError(f"step {j} out of range 2..{s}")
    _check_candidate(trace, candidate)
    N = trace.N
    p = trace.params
    alpha = float(p.alpha)
    cand = _split_by_side(trace, candidate)
    ct = color_trace(trace, cand)
    gate = counting_premises(trace)
    rows = []

    blueW = ct.blue[j, N:]
    C = float(blueW.mean())
    in_Wp = np.zeros(2 * N, dtype=bool)
    in_Wp[N:] = blueW
    b_prev = trace.part_len(j - 1)
    act = trace.active[j]
    for idx, part in enumerate(ct.parts):
        if part.block[0] >= N or part.never_blue or part.i_S < j - 1:
            continue
        S_prev = np.asarray(part.chain[j - 1])
        X = int(S_prev[0]) // b_prev
        measured = 0.0
        for Y in np.flatnonzero(act[X]):
            Y = int(Y)
            h0 = np.isin(S_prev, trace.half_vertices(j, "V", X, Y, 0))
            n0, n1 = int(h0.sum()), int((~h0).sum())
            small = min(n0, n1)  # ties resolve to group 0, same size either way
            Yv = np.arange(N + Y * b_prev, N + (Y + 1) * b_prev)
            measured += small * int(in_Wp[Yv].sum())
        if part.i_S >= j:
            tilde = len(part.chain[j - 1]) - len(part.chain[j])
            bound = tilde * (C - LOSS) * N
            rows.append(_row("sumalot.1", idx, measured, bound, gate))
        else:
            bound = 0.5 * (len(S_prev) - len(part.block) / 2) * (C - LOSS) * N
            rows.append(_row("sumalot.2", idx, measured, bound, gate))

    irr = _cross_irregularity(cand, N, trace.final_graph(), cap)
    VW = alpha * N * N
    x = p.x
    red = 1.0 - ct.v[j]
    bound = red / 12 * (C - LOSS) * VW - 0.5 * x[1] ** -0.25 * VW if len(x) > 1 else float("nan")
    rows.append(_row("addingup", None, irr, bound, gate))

    beta, beta2, C1 = ct.v[j - 1], ct.v[j], ct.w[j - 1]
    bound = 0.25 * (beta - (beta2 + 1) / 2) * (C1 - LOSS) * VW - x[j - 1] ** -0.25 * VW
    rows.append(_row("onestep", None, irr, bound, gate and beta > (beta2 + 1) / 2))
    return CountingReport(j, gate, rows)


def _cross_irregularity(cand: VertexPartition, N: int, g, cap: int) -> float:
    Vparts = [b for b in cand.blocks if b[0] < N]
    Wparts = [b for b in cand.blocks if b[0] >= N]
    total = 0.0
    try:
        for S in Vparts:
            for T in Wparts:
                total += irreg_exact(g, S, T, cap).value
    except CapacityError:
        return float("nan")
    return total
