"""Witness-driven partition refinement and exact tower arithmetic."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import total_ordering

from .errors import CapacityError, InputError
from .graph import (
    VertexPartition,
    WeightedGraph,
    atoms_from_subsets,
    format_partition,
    format_weight,
    mean_square_density,
    parse_blocks,
)
from .irregularity import DEFAULT_CAP, irreg_partition

# ----------------------------------------------------------------------------
# refinement


def _witness_subsets(witnesses, k):
    subsets = []
    for i in range(k):
        for j in range(i, k):
            w = witnesses[(i, j)]
            if w.value > 0:
                subsets.append(w.U)
                subsets.append(w.W)
    return subsets


def refine_step(g: WeightedGraph, P: VertexPartition, cap: int = DEFAULT_CAP, witnesses=None):
    """One density-increment step: split every block by the witness subsets in it.

    Returns ``(P', q(P') - q(P))``. Precomputed ``witnesses`` from
    :func:`irreg_partition` may be passed to avoid recomputing them.
    """
    if witnesses is None:
        _, witnesses = irreg_partition(g, P, cap)
    P2 = atoms_from_subsets(P, _witness_subsets(witnesses, len(P)))
    return P2, mean_square_density(g, P2) - mean_square_density(g, P)


@dataclass
class RefinementRun:
    epsilon: float
    n: int
    partitions: list = field(default_factory=list)
    q_values: list = field(default_factory=list)
    irreg_values: list = field(default_factory=list)
    witnesses: list = field(default_factory=list)
    by_criterion: bool = False
    # True when the first partition was accepted from the bound irreg <= n^2/4
    # rather than from a computed value; irreg_values[0] then holds that bound.
    bound_only: bool = False

    @property
    def steps(self) -> int:
        return len(self.partitions) - 1

    @property
    def step_limit_hit(self) -> bool:
        return not self.by_criterion

    def format(self) -> str:
        out = [f"run eps={format_weight(self.epsilon)} steps={self.steps}\n"]
        for i, (P, q, irr) in enumerate(zip(self.partitions, self.q_values, self.irreg_values)):
            out.append(f"step {i} parts={len(P)} q={q!r} irreg={irr!r}\n")
            out.append(format_partition(P))
        return "".join(out)

    @classmethod
    def parse(cls, text: str) -> "RefinementRun":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InputError("empty run file")
        head = dict(tok.split("=", 1) for tok in lines[0].split()[1:])
        if not lines[0].startswith("run ") or set(head) != {"eps", "steps"}:
            raise InputError(f"bad run header {lines[0]!r}")
        run = cls(epsilon=float(head["eps"]), n=0)
        idx = 1
        while idx < len(lines):
            toks = lines[idx].split()
            if toks[0] != "step":
                raise InputError(f"expected a step line, found {lines[idx]!r}")
            fields = dict(t.split("=", 1) for t in toks[2:])
            idx += 1
            start = idx
            while idx < len(lines) and lines[idx].startswith("block "):
                idx += 1
            blocks = parse_blocks("\n".join(lines[start:idx]))
            P = VertexPartition(blocks)
            if int(fields["parts"]) != len(P):
                raise InputError("part count does not match the partition")
            run.partitions.append(P)
            run.q_values.append(float(fields["q"]))
            run.irreg_values.append(float(fields["irreg"]))
        if len(run.partitions) != int(head["steps"]) + 1:
            raise InputError("step count does not match the header")
        run.n = run.partitions[0].n
        return run


def regularize(g: WeightedGraph, eps: float, max_steps: int, cap: int = DEFAULT_CAP) -> RefinementRun:
    """Refine from the trivial partition until ``irreg <= eps n^2`` or ``max_steps``.

    For ``eps >= 1/4`` the trivial partition is accepted at once, because any
    graph with weights in ``[0, 1]`` has ``irreg(V, V) <= n^2 / 4``.
    """
    if not (0 < eps < 1):
        raise InputError("eps must lie in (0, 1)")
    if max_steps < 0:
        raise InputError("max_steps must be non-negative")
    n = g.n
    run = RefinementRun(epsilon=eps, n=n)
    P = VertexPartition.trivial(n)
    threshold = eps * n * n
    if eps >= 0.25 and g.weight_range[0] >= 0 and g.weight_range[1] <= 1:
        run.partitions.append(P)
        run.q_values.append(mean_square_density(g, P))
        run.irreg_values.append(n * n / 4)
        run.witnesses.append({})
        run.by_criterion = True
        run.bound_only = True
        return run
    while True:
        total, wit = irreg_partition(g, P, cap)
        run.partitions.append(P)
        run.q_values.append(mean_square_density(g, P))
        run.irreg_values.append(total)
        run.witnesses.append(wit)
        if total <= threshold:
            run.by_criterion = True
            return run
        if run.steps >= max_steps:
            return run
        P, _ = refine_step(g, P, cap, witnesses=wit)


def step_budget(eps: float) -> int:
    """``floor(eps^-2 / 16) + 1`` steps always suffice."""
    e = _exact(eps)
    return math.floor(1 / (16 * e * e)) + 1


def _exact(x) -> Fraction:
    """Exact rational for a number, reading floats by their shortest decimal."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(repr(float(x)))


# ----------------------------------------------------------------------------
# tower arithmetic

# Powers of two with exponents up to this are materialised as Python ints.
_MATERIALIZE_BITS = 1 << 20


@total_ordering
class TowerCounter:
    """Exact non-negative integer that may be too large to materialise.

    A value is either a plain ``int`` or ``2**exp + rem`` where ``exp`` is
    itself a ``TowerCounter`` (or int) and ``0 <= rem < 2**exp`` is an int.
    Comparison is exact and recursive on exponents.
    """

    __slots__ = ("_int", "_exp", "_rem")

    def __init__(self, value=0):
        if isinstance(value, TowerCounter):
            self._int, self._exp, self._rem = value._int, value._exp, value._rem
            return
        if int(value) != value or value < 0:
            raise InputError("TowerCounter holds non-negative integers")
        self._int, self._exp, self._rem = int(value), None, 0

    @classmethod
    def pow2(cls, e) -> "TowerCounter":
        """``2 ** e`` for an int or ``TowerCounter`` exponent."""
        return cls._make(TowerCounter(e), 0)

    @classmethod
    def _make(cls, exp: "TowerCounter", rem: int) -> "TowerCounter":
        out = cls.__new__(cls)
        if exp.is_materialized and exp._int <= _MATERIALIZE_BITS:
            out._int, out._exp, out._rem = (1 << exp._int) + rem, None, 0
            return out
        if TowerCounter(rem.bit_length()) > exp:
            raise CapacityError("remainder too large for the symbolic form")
        out._int, out._exp, out._rem = None, exp, rem
        return out

    @property
    def is_materialized(self) -> bool:
        return self._exp is None

    def __int__(self):
        if not self.is_materialized:
            raise CapacityError("value is too large to materialise as an int")
        return self._int

    def _cmp(self, other: "TowerCounter") -> int:
        a, b = self, other
        if a.is_materialized and b.is_materialized:
            return (a._int > b._int) - (a._int < b._int)
        if not a.is_materialized and not b.is_materialized:
            c = a._exp._cmp(b._exp)
            return c if c else (a._rem > b._rem) - (a._rem < b._rem)
        if a.is_materialized:
            return -b._cmp(a)
        # a symbolic (2**E + r), b a plain int z
        z = b._int
        if z == 0:
            return 1
        lead = TowerCounter(z.bit_length() - 1)
        c = a._exp._cmp(lead)
        if c:
            return c
        rest = z - (1 << (z.bit_length() - 1))
        return (a._rem > rest) - (a._rem < rest)

    @staticmethod
    def _coerce(x):
        if isinstance(x, TowerCounter):
            return x
        if isinstance(x, int):
            return TowerCounter(x)
        return NotImplemented

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) == 0

    def __lt__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self._cmp(other) < 0

    def __hash__(self):
        if self.is_materialized:
            return hash(self._int)
        return hash((self._exp, self._rem))

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        if not other.is_materialized:
            if not self.is_materialized:
                raise CapacityError("adding two symbolic values is not supported")
            return other + self
        if self.is_materialized:
            return TowerCounter(self._int + other._int)
        return TowerCounter._make(self._exp, self._rem + other._int)

    __radd__ = __add__

    def __mul__(self, other):
        """Multiplication by a power of two."""
        if not isinstance(other, int) or other < 1 or other & (other - 1):
            if self.is_materialized and isinstance(other, int) and other >= 0:
                return TowerCounter(self._int * other)
            return NotImplemented
        if self.is_materialized:
            return TowerCounter(self._int * other)
        shift = other.bit_length() - 1
        return TowerCounter._make(self._exp + shift, self._rem << shift)

    __rmul__ = __mul__

    def __repr__(self):
        if self.is_materialized:
            s = str(self._int) if self._int.bit_length() <= 256 else f"<int with {self._int.bit_length()} bits>"
            return f"TowerCounter({s})"
        rem = f" + {self._rem}" if self._rem else ""
        return f"TowerCounter(2**{self._exp!r}{rem})"


TOWER_MAX = 7
PARTS_MAX = 5


def tower(n: int) -> TowerCounter:
    """``T(1) = 2``, ``T(n) = 2**T(n-1)``, exact for ``1 <= n <= 7``."""
    if int(n) != n or not (1 <= n <= TOWER_MAX):
        raise CapacityError(f"tower height must lie in 1..{TOWER_MAX}")
    t = TowerCounter(2)
    for _ in range(n - 1):
        t = TowerCounter.pow2(t)
    return t


def parts_bound(i: int) -> TowerCounter:
    """``k_0 = 1``, ``k_{i+1} = k_i 2**(k_i + 1)``, exact for ``0 <= i <= 5``.

    Every ``k_i`` is a power of two, ``k_i = 2**e_i``, so the recursion is run
    on the exponents: ``e_{i+1} = e_i + 2**e_i + 1``.
    """
    if int(i) != i or not (0 <= i <= PARTS_MAX):
        raise CapacityError(f"parts_bound index must lie in 0..{PARTS_MAX}")
    e = TowerCounter(0)
    for _ in range(i):
        e = TowerCounter.pow2(e) + e + 1
    return TowerCounter.pow2(e)


def tower_height_upper(eps: float) -> int:
    """``ceil(2 + eps^-2 / 16)``."""
    if not (0 < eps < 1):
        raise InputError("eps must lie in (0, 1)")
    e = _exact(eps)
    return math.ceil(2 + 1 / (16 * e * e))
