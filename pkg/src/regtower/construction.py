"""The layered weighted-graph construction that forces tall regular partitions.

Vertex layout: side ``V`` is ``0..N-1`` and side ``W`` is ``N..2N-1``. At level
``i`` each side is cut into ``k_i`` contiguous parts of equal size, and part
``p`` of level ``i-1`` owns the level-``i`` parts ``p*2x_i .. (p+1)*2x_i - 1``.

Weights between the sides are kept as integer multiples of ``alpha`` (units),
with ``m = 1/alpha`` units meaning weight 1. The graph ``G_0`` has ``m/2`` units
everywhere. At step ``i`` every active pair ``(X, Y)`` of level ``i-1`` splits
the children of ``X`` (and of ``Y``) into two groups of ``x_i``; the increment
``G_i`` is ``+1`` unit between same-index groups and ``-1`` unit between
opposite ones. A pair whose cumulative weight reaches exactly 0 or 1 becomes
inactive and receives no further increments.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, ConstructionInfeasible, InputError, RegimeError
from .graph import (
    VertexPartition,
    WeightedGraph,
    format_blocks,
    parse_blocks,
    read_graph,
    write_graph,
)
from .spectral import top_singular_value

DEFAULT_SIDE_CAP = 4096
INACTIVE_BENCHMARK = 0.05
SEPARATION_BENCHMARK = 0.25
_SEED_LIMIT = 1 << 64


def parse_alpha(value) -> Fraction:
    """Exact ``alpha`` from a ``Fraction``, an int or a ``"p/q"`` string; decimals are refused."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text for ch in ".eE"):
            raise InputError(f"alpha must be an exact rational p/q, got {value!r}")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"bad rational {value!r}") from None
    raise InputError(f"alpha must be an exact rational p/q, got {value!r}")


@dataclass(frozen=True)
class ConstructionParams:
    alpha: Fraction
    x: tuple
    block_size: int = 1
    seed: int = 0
    strict_properties: bool = True
    max_attempts: int = 1000
    r_scale: float = 1.0
    t_scale: float = 1.0

    def __post_init__(self):
        alpha = parse_alpha(self.alpha)
        if alpha <= 0 or alpha.numerator != 1 or alpha.denominator % 2:
            raise InputError(f"1/alpha must be an even positive integer, got alpha={alpha}")
        object.__setattr__(self, "alpha", alpha)
        try:
            x = tuple(int(v) for v in self.x)
        except (TypeError, ValueError):
            raise InputError(f"x must be a sequence of integers, got {self.x!r}") from None
        if any(v < 2 for v in x) or any(int(a) != a for a in self.x):
            raise InputError(f"every x_i must be an integer >= 2, got {self.x!r}")
        object.__setattr__(self, "x", x)
        for name in ("block_size", "max_attempts"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise InputError(f"{name} must be a positive integer")
        if int(self.seed) != self.seed or not (0 <= self.seed < _SEED_LIMIT):
            raise InputError("seed must be an integer in [0, 2^64)")
        if not (self.r_scale > 0 and self.t_scale > 0):
            raise InputError("r_scale and t_scale must be positive")

    @property
    def grid(self) -> int:
        """Units per unit weight, ``1/alpha``."""
        return self.alpha.denominator

    @property
    def s(self) -> int:
        return len(self.x)

    @property
    def part_counts(self) -> list:
        k = [1]
        for v in self.x:
            k.append(k[-1] * 2 * v)
        return k

    @property
    def side_size(self) -> int:
        return self.part_counts[-1] * self.block_size

    def r(self, i: int) -> float:
        """Property-1 threshold for the bipartitions drawn at step ``i >= 2``."""
        return math.sqrt(6 * self.x[i - 1] * math.log(self.x[i - 2])) * self.r_scale

    def t(self, i: int) -> float:
        """Property-2 threshold for the bipartitions drawn at step ``i >= 2``."""
        return self.x[i - 2] / 2 * self.t_scale

    def paper_scale(self) -> bool:
        """Whether the growth and step-count premises of the large-scale analysis hold."""
        if not self.x:
            return False
        if self.x[0] < 1 << 10:
            return False
        if any(b < 2 ** (a / 16) for a, b in zip(self.x, self.x[1:])):
            return False
        return self.s <= Fraction(1, 36) / (self.alpha * self.alpha)


class PropertyRecord(NamedTuple):
    step: int
    side: str
    part: int
    max_z: int
    r: float
    max_y: int
    t: float
    attempts: int


@dataclass
class ConstructionTrace:
    params: ConstructionParams
    increments: list  # level-i unit matrices, k_i x k_i
    cumulative: list
    active: dict  # step i -> bool (k_{i-1}, k_{i-1}), [X, Y]
    labels_V: dict  # step i -> int8 (k_{i-1}, k_{i-1}, 2x_i), [X, Y, child]
    labels_W: dict  # step i -> int8 (k_{i-1}, k_{i-1}, 2x_i), [Y, X, child]
    property_log: list = field(default_factory=list)
    dense_steps: dict = field(default_factory=dict)  # overrides read from disk
    dense_final: WeightedGraph | None = None

    # -- structure ---------------------------------------------------------
    @property
    def s(self) -> int:
        return self.params.s

    @property
    def N(self) -> int:
        return self.params.side_size

    def k(self, i: int) -> int:
        return self.params.part_counts[i]

    def part_len(self, i: int) -> int:
        return self.N // self.k(i)

    def _check_level(self, i):
        if int(i) != i or not (0 <= i <= self.s):
            raise InputError(f"level {i} out of range 0..{self.s}")

    def blocks_V(self, i: int) -> list:
        self._check_level(i)
        b = self.part_len(i)
        return [tuple(range(p * b, (p + 1) * b)) for p in range(self.k(i))]

    def blocks_W(self, i: int) -> list:
        self._check_level(i)
        b, N = self.part_len(i), self.N
        return [tuple(range(N + p * b, N + (p + 1) * b)) for p in range(self.k(i))]

    def joint_partition(self, i: int) -> VertexPartition:
        """``P_i`` followed by ``Q_i`` as one partition of all ``2N`` vertices."""
        return VertexPartition(self.blocks_V(i) + self.blocks_W(i), 2 * self.N)

    def children(self, i: int, part: int) -> range:
        """Level-``i`` parts inside level-``(i-1)`` part ``part``."""
        c = 2 * self.params.x[i - 1]
        return range(part * c, (part + 1) * c)

    def half(self, i: int, side: str, part: int, peer: int, a: int) -> list:
        """Level-``i`` parts of ``part`` in group ``a`` of its split by ``peer``."""
        lab = (self.labels_V if side == "V" else self.labels_W)[i][part, peer]
        base = part * lab.size
        return [base + int(c) for c in np.flatnonzero(lab == a)]

    def half_vertices(self, i: int, side: str, part: int, peer: int, a: int) -> np.ndarray:
        b = self.part_len(i)
        off = 0 if side == "V" else self.N
        parts = self.half(i, side, part, peer, a)
        return np.concatenate([np.arange(off + p * b, off + (p + 1) * b) for p in parts])

    # -- dense graphs ------------------------------------------------------
    def _dense(self, units: np.ndarray, weight_range) -> WeightedGraph:
        N = self.N
        b = N // units.shape[0]
        vw = np.repeat(np.repeat(units / self.params.grid, b, axis=0), b, axis=1)
        full = np.zeros((2 * N, 2 * N))
        full[:N, N:] = vw
        full[N:, :N] = vw.T
        return WeightedGraph(full, weight_range)

    def step_graph(self, i: int) -> WeightedGraph:
        """The increment ``G_i`` (``G_0`` is the constant-1/2 start)."""
        self._check_level(i)
        if i in self.dense_steps:
            return self.dense_steps[i]
        return self._dense(self.increments[i], (-1.0, 1.0))

    def cumulative_graph(self, i: int) -> WeightedGraph:
        self._check_level(i)
        return self._dense(self.cumulative[i], (-1.0, 1.0))

    def final_graph(self) -> WeightedGraph:
        if self.dense_final is not None:
            return self.dense_final
        return self._dense(self.cumulative[self.s], (0.0, 1.0))


# ----------------------------------------------------------------------------
# building


def _expand(units: np.ndarray, c: int) -> np.ndarray:
    return np.repeat(np.repeat(units, c, axis=0), c, axis=1)


def _draw_labels(seed, step, side, part, peers, c, attempt):
    """Seeded equipartitions of ``c`` children, one per peer (0/1 labels)."""
    out = np.empty((peers, c), dtype=np.int8)
    half = c // 2
    for q in range(peers):
        rng = np.random.default_rng([seed, step, side, part, q, attempt])
        lab = np.zeros(c, dtype=np.int8)
        lab[rng.permutation(c)[half:]] = 1
        out[q] = lab
    return out


def _increment(LV, LW, act):
    """Unit increment matrix for one step from the labels and the active map."""
    kp, _, c = LV.shape
    same = LV[:, :, :, None] == LW.transpose(1, 0, 2)[:, :, None, :]  # [X, Y, c, e]
    sign = np.where(same, 1, -1).astype(np.int32) * act[:, :, None, None]
    return sign.transpose(0, 2, 1, 3).reshape(kp * c, kp * c)


def _peer_groups(prev_labels_peer, act, c_prev):
    """Groups of level-(i-1) peers that share a parent and a group index.

    For a part ``B`` of level ``i-1`` with parent ``P``: a peer ``C`` with parent
    ``Q`` belongs to group ``(Q, label of C in the split of Q by P)``. Only
    groups whose block pair with ``B`` is active are kept.
    """
    kp = act.shape[0]
    groups = []
    for part in range(kp):
        parent = part // c_prev
        bucket: dict = {}
        for peer in range(kp):
            if not act[part, peer]:
                continue
            pq, local = divmod(peer, c_prev)
            key = (pq, int(prev_labels_peer[pq, parent, local]))
            bucket.setdefault(key, []).append(peer)
        groups.append([np.array(v) for _, v in sorted(bucket.items())])
    return groups


def _family_stats(L: np.ndarray, groups) -> tuple:
    """Largest ``|z(C, C')|`` and ``|y(u, v)|`` over the given peer groups."""
    max_z = 0
    max_y = 0
    for g in groups:
        sg = 1 - 2 * L[g].astype(np.int64)  # +1 for group 0, -1 for group 1
        if len(g) > 1:
            Z = sg @ sg.T
            np.fill_diagonal(Z, 0)
            max_z = max(max_z, int(np.abs(Z).max()) // 2)
        Y = sg.T @ sg
        np.fill_diagonal(Y, 0)
        max_y = max(max_y, int(np.abs(Y).max()))
    return max_z, max_y


def build(params: ConstructionParams, side_cap: int = DEFAULT_SIDE_CAP) -> ConstructionTrace:
    """Materialise the construction for ``params``."""
    N = params.side_size
    if N > side_cap:
        raise CapacityError(f"{N} vertices per side exceeds the cap of {side_cap}")
    m = params.grid
    k = params.part_counts
    start = np.full((1, 1), m // 2, dtype=np.int32)
    increments, cumulative = [start], [start.copy()]
    active, labels_V, labels_W, log = {}, {}, {}, []
    for i in range(1, params.s + 1):
        c = 2 * params.x[i - 1]
        kp = k[i - 1]
        prev = cumulative[-1]
        act = (prev > 0) & (prev < m)
        LV = np.empty((kp, kp, c), dtype=np.int8)
        LW = np.empty((kp, kp, c), dtype=np.int8)
        constrained = params.strict_properties and i >= 2
        if constrained:
            cp = 2 * params.x[i - 2]
            groups_V = _peer_groups(labels_W[i - 1], act, cp)
            groups_W = _peer_groups(labels_V[i - 1], act.T, cp)
        for side_idx, (side, L) in enumerate((("V", LV), ("W", LW))):
            for part in range(kp):
                if not constrained:
                    L[part] = _draw_labels(params.seed, i, side_idx, part, kp, c, 0)
                    continue
                groups = (groups_V if side == "V" else groups_W)[part]
                L[part], rec = _draw_strict(params, i, side_idx, side, part, kp, c, groups)
                log.append(rec)
        labels_V[i], labels_W[i] = LV, LW
        active[i] = act
        inc = _increment(LV, LW, act)
        increments.append(inc)
        cumulative.append(_expand(prev, c) + inc)
    return ConstructionTrace(params, increments, cumulative, active, labels_V, labels_W, log)


def _draw_strict(params, i, side_idx, side, part, kp, c, groups):
    r, t = params.r(i), params.t(i)
    best = None
    for attempt in range(params.max_attempts):
        L = _draw_labels(params.seed, i, side_idx, part, kp, c, attempt)
        mz, my = _family_stats(L, groups)
        m1, m2 = r - mz, t - my
        if m1 >= -1e-12 and m2 >= -1e-12:
            return L, PropertyRecord(i, side, part, mz, r, my, t, attempt + 1)
        worst = min((m1, "property 1"), (m2, "property 2"))
        if best is None or worst[0] > best[0]:
            best = worst
    raise ConstructionInfeasible(i, side, part, best[1], best[0], params.max_attempts)


# ----------------------------------------------------------------------------
# large-scale parameter arithmetic

_PAPER_CONST = 2 ** 26 * 10 ** 4
_PAPER_EPS_LIMIT = Fraction(1, 10 ** 13)


class PaperPlan(NamedTuple):
    alpha: Fraction
    s: int
    x_description: str


def _exact_eps(eps) -> Fraction:
    if isinstance(eps, Fraction):
        return eps
    if isinstance(eps, int):
        return Fraction(eps)
    if isinstance(eps, str):
        return Fraction(eps)
    return Fraction(repr(float(eps)))


def plan_paper_params(eps) -> PaperPlan:
    """Smallest ``alpha = 1/(6m)`` above ``2^26 * 10^4 * eps`` and ``s = alpha^-2 / 36``.

    Floats are read through their shortest decimal form, so ``1e-14`` means
    exactly ``10^-14``. Only ``0 < eps < 10^-13`` is accepted.
    """
    e = _exact_eps(eps)
    if not (0 < e < _PAPER_EPS_LIMIT):
        raise RegimeError("the large-scale parameters assume 0 < eps < 1e-13")
    bound = 1 / (6 * _PAPER_CONST * e)  # need m < bound
    m = math.ceil(bound) - 1
    alpha = Fraction(1, 6 * m)
    return PaperPlan(alpha, m * m, "x_1 = 2^10, x_(i+1) = 2^(x_i / 16)")


# ----------------------------------------------------------------------------
# verification


class Check(NamedTuple):
    name: str
    step: int | None
    status: str  # "pass", "fail" or "report"
    detail: str


@dataclass
class ConstructionReport:
    checks: list
    property_margins: list
    inactive_fractions: dict
    separation_fractions: dict
    paper_scale: bool
    strict: bool

    @property
    def structural_ok(self) -> bool:
        return all(c.status != "fail" for c in self.checks)

    def failures(self) -> list:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def inactive_ok(self) -> bool:
        return all(v <= INACTIVE_BENCHMARK for v in self.inactive_fractions.values())

    @property
    def separation_ok(self) -> bool:
        return all(v >= SEPARATION_BENCHMARK for v in self.separation_fractions.values())

    @property
    def premises_hold(self) -> bool:
        """Gate for the constant-bearing counting bounds."""
        return self.strict and self.paper_scale and self.inactive_ok and self.separation_ok

    def format(self) -> str:
        lines = ["check,step,status,detail"]
        for c in self.checks:
            step = "" if c.step is None else str(c.step)
            lines.append(f"{c.name},{step},{c.status},{c.detail}")
        lines.append("")
        lines.append("step,side,part,max_z,r,max_y,t")
        for p in self.property_margins:
            lines.append(f"{p.step},{p.side},{p.part},{p.max_z},{p.r!r},{p.max_y},{p.t!r}")
        lines.append("")
        lines.append(f"paper_scale,{int(self.paper_scale)}")
        lines.append(f"premises_hold,{int(self.premises_hold)}")
        return "\n".join(lines) + "\n"


def _block_units(g: WeightedGraph, trace: ConstructionTrace, i: int):
    """Per-block units of a dense graph plus the first structural problem found."""
    N, k, b, m = trace.N, trace.k(i), trace.part_len(i), trace.params.grid
    W = g.weights
    if g.n != 2 * N:
        return None, f"graph has {g.n} vertices, expected {2 * N}"
    if np.any(W[:N, :N]) or np.any(W[N:, N:]):
        return None, "non-zero weight inside one side"
    blocks = W[:N, N:].reshape(k, b, k, b)
    ref = blocks[:, :1, :, :1]
    bad = np.argwhere((blocks != ref).any(axis=(1, 3)))
    if bad.size:
        X, Y = (int(v) for v in bad[0])
        return None, f"block (X={X}, Y={Y}) is not constant"
    ref = ref[:, 0, :, 0]
    units = np.rint(ref * m)
    off = np.argwhere(np.abs(ref * m - units) > 1e-9)
    if off.size:
        X, Y = (int(v) for v in off[0])
        return None, f"block (X={X}, Y={Y}) weight {ref[X, Y]!r} is off the alpha grid"
    return units.astype(np.int64), ""


def _separation_fraction(L: np.ndarray) -> float:
    """Smallest fraction of peers separating a pair of children, over all parts."""
    sg = 1 - 2 * L.astype(np.int64)  # [part, peer, child]
    peers = L.shape[1]
    agree = np.einsum("pqu,pqv->puv", sg, sg)  # (#same - #separating)
    c = L.shape[2]
    iu = np.triu_indices(c, 1)
    sep = (peers - agree[:, iu[0], iu[1]]) / (2 * peers)
    return float(sep.min()) if sep.size else 1.0


def _inactive_fraction(units: np.ndarray, m: int) -> float:
    frozen = (units <= 0) | (units >= m)
    return float(max(frozen.mean(axis=1).max(), frozen.mean(axis=0).max()))


def verify_construction(trace: ConstructionTrace) -> ConstructionReport:
    """Check every structural invariant of a trace and report the property margins."""
    p = trace.params
    m, s = p.grid, p.s
    checks = []
    units = []
    for i in range(s + 1):
        u, problem = _block_units(trace.step_graph(i), trace, i)
        name = "block-constancy"
        if u is None:
            checks.append(Check(name, i, "fail", f"step {i}: {problem}"))
        else:
            checks.append(Check(name, i, "pass", ""))
        units.append(u)
    if units[0] is not None:
        ok = np.all(units[0] == m // 2)
        checks.append(Check("start-weight", 0, "pass" if ok else "fail",
                            "" if ok else "G_0 is not constant 1/2"))
    cum = units[0]
    frozen = np.zeros((1, 1), dtype=bool)  # pairs with an inactive ancestor
    for i in range(1, s + 1):
        c = 2 * p.x[i - 1]
        if cum is None or units[i] is None:
            cum = None
            continue
        act = (cum > 0) & (cum < m)
        ok = np.array_equal(act, trace.active[i])
        checks.append(Check("active-map", i, "pass" if ok else "fail",
                            "" if ok else "recorded active map disagrees with the weights"))
        expected = _increment(trace.labels_V[i], trace.labels_W[i], act)
        kp = act.shape[0]
        diff = np.argwhere((expected != units[i]).reshape(kp, c, kp, c).any(axis=(1, 3)))
        if diff.size:
            X, Y = (int(v) for v in diff[0])
            kind = "active" if act[X, Y] else "inactive"
            checks.append(Check("alpha-pattern", i, "fail",
                                f"{kind} pair (X={X}, Y={Y}) breaks the +-alpha rule"))
        else:
            checks.append(Check("alpha-pattern", i, "pass", ""))
        leaked = np.argwhere(frozen & act)
        if leaked.size:
            X, Y = (int(v) for v in leaked[0])
            checks.append(Check("inactive-persistence", i, "fail",
                                f"pair (X={X}, Y={Y}) is active below an inactive pair"))
        else:
            checks.append(Check("inactive-persistence", i, "pass", ""))
        frozen = _expand(frozen | ~act, c)
        cum = _expand(cum, c) + units[i]
    if cum is not None:
        fin, problem = _block_units(trace.final_graph(), trace, s)
        if fin is None:
            checks.append(Check("final-grid", s, "fail", problem))
        else:
            in_range = bool(np.all((fin >= 0) & (fin <= m)))
            checks.append(Check("final-grid", s, "pass" if in_range else "fail",
                                "" if in_range else "final weight outside [0, 1]"))
            ok = np.array_equal(fin, cum)
            checks.append(Check("conservation", s, "pass" if ok else "fail",
                                "" if ok else "final graph differs from the sum of the steps"))
    margins, inactive, separation = _margins(trace)
    constrained = list(range(2, s + 1))
    if not constrained:
        checks.append(Check("properties", None, "pass", "no constrained steps"))
    for i in constrained:
        recs = [r for r in margins if r.step == i]
        ok = all(r.max_z <= r.r + 1e-12 and r.max_y <= r.t + 1e-12 for r in recs)
        status = ("pass" if ok else "fail") if p.strict_properties else "report"
        worst_z = max((r.max_z - r.r for r in recs), default=0.0)
        worst_y = max((r.max_y - r.t for r in recs), default=0.0)
        checks.append(Check("properties", i, status,
                            f"max |z|-r = {worst_z:.4g}; max |y|-t = {worst_y:.4g}"))
    paper = p.paper_scale()
    for i, frac in inactive.items():
        if p.strict_properties and paper:
            status = "pass" if frac <= INACTIVE_BENCHMARK else "fail"
        else:
            status = "report"
        checks.append(Check("inactive-fraction", i, status, f"{frac:.4g} vs {INACTIVE_BENCHMARK}"))
    for i, frac in separation.items():
        checks.append(Check("separation-fraction", i, "report", f"{frac:.4g} vs {SEPARATION_BENCHMARK}"))
    return ConstructionReport(checks, margins, inactive, separation, paper, p.strict_properties)


def _margins(trace: ConstructionTrace):
    p = trace.params
    margins = []
    for i in range(2, p.s + 1):
        act = trace.active[i]
        cp = 2 * p.x[i - 2]
        gV = _peer_groups(trace.labels_W[i - 1], act, cp)
        gW = _peer_groups(trace.labels_V[i - 1], act.T, cp)
        for side, L, groups in (("V", trace.labels_V[i], gV), ("W", trace.labels_W[i], gW)):
            for part in range(act.shape[0]):
                mz, my = _family_stats(L[part], groups[part])
                margins.append(PropertyRecord(i, side, part, mz, p.r(i), my, p.t(i), 0))
    inactive = {i: _inactive_fraction(trace.cumulative[i], p.grid) for i in range(p.s + 1)}
    separation = {}
    for i in range(1, p.s + 1):
        separation[i] = min(_separation_fraction(trace.labels_V[i]),
                            _separation_fraction(trace.labels_W[i]))
    return margins, inactive, separation


class ResidualRow(NamedTuple):
    X: int
    Y: int
    a: int
    b: int
    lambda_resid: float
    paper_bound: float


def residual_report(trace: ConstructionTrace, i: int) -> list:
    """Top singular value of ``G - G~_i`` on every half-block of the active step-``(i-1)`` pairs.

    The bound ``.9 x_i^(-1/4) alpha |X_Y^a|`` is emitted next to each value for
    comparison only.
    """
    if int(i) != i or not (1 <= i <= trace.s):
        raise InputError(f"step {i} out of range 1..{trace.s}")
    N = trace.N
    R = trace.final_graph().weights[:N, N:] - trace.cumulative_graph(i).weights[:N, N:]
    alpha = float(trace.params.alpha)
    xi = trace.params.x[i - 1]
    rows = []
    act = trace.active[i]
    for X, Y in zip(*np.nonzero(act)):
        X, Y = int(X), int(Y)
        for a in (0, 1):
            rv = trace.half_vertices(i, "V", X, Y, a)
            for b in (0, 1):
                cv = trace.half_vertices(i, "W", Y, X, b) - N
                lam = top_singular_value(R[np.ix_(rv, cv)])
                rows.append(ResidualRow(X, Y, a, b, lam, 0.9 * xi ** -0.25 * alpha * rv.size))
    return rows


# ----------------------------------------------------------------------------
# trace directories


def _params_text(p: ConstructionParams) -> str:
    return "".join([
        f"alpha={p.alpha.numerator}/{p.alpha.denominator}\n",
        f"x={','.join(str(v) for v in p.x)}\n",
        f"block_size={p.block_size}\n",
        f"seed={p.seed}\n",
        f"strict_properties={int(p.strict_properties)}\n",
        f"max_attempts={p.max_attempts}\n",
        f"r_scale={p.r_scale!r}\n",
        f"t_scale={p.t_scale!r}\n",
        f"s={p.s}\n",
        f"N={p.side_size}\n",
    ])


def _parse_params(text: str) -> ConstructionParams:
    kv = {}
    for line in text.splitlines():
        if line.strip():
            key, sep, val = line.partition("=")
            if not sep:
                raise InputError(f"bad params line {line!r}")
            kv[key.strip()] = val.strip()
    try:
        p = ConstructionParams(
            alpha=parse_alpha(kv["alpha"]),
            x=tuple(int(v) for v in kv["x"].split(",")) if kv["x"] else (),
            block_size=int(kv["block_size"]),
            seed=int(kv["seed"]),
            strict_properties=bool(int(kv["strict_properties"])),
            max_attempts=int(kv["max_attempts"]),
            r_scale=float(kv.get("r_scale", "1")),
            t_scale=float(kv.get("t_scale", "1")),
        )
    except KeyError as exc:
        raise InputError(f"params file lacks {exc}") from None
    except ValueError as exc:
        raise InputError(f"bad params value: {exc}") from None
    if "s" in kv and int(kv["s"]) != p.s:
        raise InputError("params: s does not match x")
    if "N" in kv and int(kv["N"]) != p.side_size:
        raise InputError("params: N does not match x and block_size")
    return p


def save_trace(trace: ConstructionTrace, path) -> None:
    """Write the trace directory layout (params, partitions, active map, graphs, bipartitions)."""
    p = trace.params
    for sub in ("partitions", "active", "graphs", "bipartitions"):
        os.makedirs(os.path.join(path, sub), exist_ok=True)
    with open(os.path.join(path, "params.txt"), "w") as fh:
        fh.write(_params_text(p))
    for i in range(p.s + 1):
        for side, blocks in (("V", trace.blocks_V(i)), ("W", trace.blocks_W(i))):
            with open(os.path.join(path, "partitions", f"step_{i}_{side}.txt"), "w") as fh:
                fh.write(format_blocks(blocks))
        write_graph(os.path.join(path, "graphs", f"g_{i}.wg"), trace.step_graph(i))
    write_graph(os.path.join(path, "final.wg"), trace.final_graph())
    for i in range(1, p.s + 1):
        act = trace.active[i]
        with open(os.path.join(path, "active", f"step_{i}.txt"), "w") as fh:
            for X in range(act.shape[0]):
                for Y in range(act.shape[1]):
                    fh.write(f"X={X} Y={Y} active={int(act[X, Y])}\n")
        with open(os.path.join(path, "bipartitions", f"step_{i}.txt"), "w") as fh:
            for side in ("V", "W"):
                L = trace.labels_V[i] if side == "V" else trace.labels_W[i]
                for parent in range(L.shape[0]):
                    for peer in range(L.shape[1]):
                        ids = ",".join(str(v) for v in trace.half(i, side, parent, peer, 0))
                        fh.write(f"side={side} parent={parent} peer={peer} group0={ids}\n")


def _kv_lines(path):
    out = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                try:
                    out.append(dict(tok.split("=", 1) for tok in line.split()))
                except ValueError:
                    raise InputError(f"{path}: bad line {line!r}") from None
    return out


def load_trace(path) -> ConstructionTrace:
    """Read a trace directory; the dense graph files are kept and used by verification."""
    with open(os.path.join(path, "params.txt")) as fh:
        p = _parse_params(fh.read())
    k, N, m = p.part_counts, p.side_size, p.grid
    for i in range(p.s + 1):
        for side, off in (("V", 0), ("W", N)):
            with open(os.path.join(path, "partitions", f"step_{i}_{side}.txt")) as fh:
                blocks = parse_blocks(fh.read())
            b = N // k[i]
            want = [tuple(range(off + q * b, off + (q + 1) * b)) for q in range(k[i])]
            if blocks != want:
                raise InputError(f"partition file for step {i} side {side} does not match params")
    dense = {i: read_graph(os.path.join(path, "graphs", f"g_{i}.wg"), (-1.0, 1.0))
             for i in range(p.s + 1)}
    final = read_graph(os.path.join(path, "final.wg"))
    active, LV, LW = {}, {}, {}
    for i in range(1, p.s + 1):
        kp, c = k[i - 1], 2 * p.x[i - 1]
        act = np.zeros((kp, kp), dtype=bool)
        for row in _kv_lines(os.path.join(path, "active", f"step_{i}.txt")):
            act[int(row["X"]), int(row["Y"])] = row["active"] == "1"
        active[i] = act
        lv = np.ones((kp, kp, c), dtype=np.int8)
        lw = np.ones((kp, kp, c), dtype=np.int8)
        for row in _kv_lines(os.path.join(path, "bipartitions", f"step_{i}.txt")):
            L = lv if row["side"] == "V" else lw
            parent, peer = int(row["parent"]), int(row["peer"])
            for sub in (int(v) for v in row["group0"].split(",") if v):
                if sub // c != parent:
                    raise InputError(f"subpart {sub} is not a child of part {parent}")
                L[parent, peer, sub % c] = 0
        LV[i], LW[i] = lv, lw
    increments, cumulative = [], []
    for i in range(p.s + 1):
        b = N // k[i]
        vw = dense[i].weights[:N, N:][::b, ::b]
        increments.append(np.rint(vw * m).astype(np.int32))
        if i == 0:
            cumulative.append(increments[0].copy())
        else:
            cumulative.append(_expand(cumulative[-1], 2 * p.x[i - 1]) + increments[i])
    return ConstructionTrace(p, increments, cumulative, active, LV, LW, [], dense, final)
