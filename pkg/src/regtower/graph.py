"""Dense weighted graphs, vertex partitions and density arithmetic.

Graphs are stored as dense symmetric ``float64`` matrices with a zero diagonal.
Edge sums count ordered pairs, so ``edge_sum(g, A, A)`` counts every internal
edge twice and the diagonal never contributes.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InputError

VertexSet = tuple  # sorted tuple of distinct vertex ids


def as_vertex_set(members: Iterable[int], n: int | None = None) -> VertexSet:
    """Normalise ``members`` into a sorted tuple of distinct ints, checking the range."""
    try:
        ids = sorted({int(v) for v in members})
    except (TypeError, ValueError) as exc:
        raise InputError(f"vertex ids must be integers: {exc}") from None
    if ids and ids[0] < 0:
        raise InputError(f"negative vertex id {ids[0]}")
    if n is not None and ids and ids[-1] >= n:
        raise InputError(f"vertex id {ids[-1]} out of range for n={n}")
    return tuple(ids)


class WeightedGraph:
    """Immutable symmetric weight matrix with zero diagonal.

    ``weight_range`` is the closed interval every weight must lie in; it
    defaults to ``(0, 1)``. Intermediate graphs of the lower-bound construction
    use ``(-1, 1)``.
    """

    __slots__ = ("_w", "weight_range")

    def __init__(self, weights, weight_range=(0.0, 1.0)):
        w = np.array(weights, dtype=float, copy=True)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise InputError(f"weights must be a non-empty square matrix, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise InputError("weights must be finite")
        if np.any(np.diag(w) != 0):
            raise InputError("diagonal weights must be zero")
        if not np.array_equal(w, w.T):
            i, j = np.argwhere(w != w.T)[0]
            raise InputError(f"weights are not symmetric at ({i}, {j})")
        lo, hi = float(weight_range[0]), float(weight_range[1])
        if lo > hi:
            raise InputError(f"empty weight range [{lo}, {hi}]")
        if w.min() < lo or w.max() > hi:
            raise InputError(f"weights leave the range [{lo}, {hi}]")
        w += 0.0  # normalise -0.0
        w.setflags(write=False)
        self._w = w
        self.weight_range = (lo, hi)

    @classmethod
    def constant(cls, n: int, c: float, weight_range=(0.0, 1.0)) -> "WeightedGraph":
        w = np.full((n, n), float(c))
        np.fill_diagonal(w, 0.0)
        return cls(w, weight_range)

    @classmethod
    def from_edges(cls, n: int, edges, weight: float = 1.0, weight_range=(0.0, 1.0)):
        """Build a graph from ``(u, v)`` or ``(u, v, w)`` tuples."""
        w = np.zeros((n, n))
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise InputError("self-loops are not allowed")
            if not (0 <= u < n and 0 <= v < n):
                raise InputError(f"edge ({u}, {v}) out of range for n={n}")
            w[u, v] = w[v, u] = float(e[2]) if len(e) > 2 else weight
        return cls(w, weight_range)

    @property
    def n(self) -> int:
        return self._w.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Read-only view of the weight matrix."""
        return self._w

    def weight(self, x: int, y: int) -> float:
        return float(self._w[x, y])

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.weight_range == other.weight_range and np.array_equal(self._w, other._w)

    def __hash__(self):
        return hash((self.n, self._w.tobytes()))

    def __repr__(self):
        return f"WeightedGraph(n={self.n}, weight_range={self.weight_range})"


class VertexPartition:
    """Ordered tuple of disjoint non-empty blocks covering ``0..n-1``."""

    __slots__ = ("blocks", "n", "_labels")

    def __init__(self, blocks: Iterable[Iterable[int]], n: int | None = None):
        bl = tuple(as_vertex_set(b) for b in blocks)
        if not bl:
            raise InputError("a partition needs at least one block")
        if any(len(b) == 0 for b in bl):
            raise InputError("partition blocks must be non-empty")
        total = sum(len(b) for b in bl)
        if n is None:
            n = total
        labels = np.full(n, -1, dtype=np.int64)
        for idx, b in enumerate(bl):
            if b[-1] >= n:
                raise InputError(f"vertex {b[-1]} out of range for n={n}")
            arr = np.asarray(b)
            if np.any(labels[arr] >= 0):
                raise InputError("partition blocks overlap")
            labels[arr] = idx
        if np.any(labels < 0):
            raise InputError(f"partition does not cover vertex {int(np.argmin(labels))}")
        labels.setflags(write=False)
        self.blocks = bl
        self.n = int(n)
        self._labels = labels

    @classmethod
    def trivial(cls, n: int) -> "VertexPartition":
        return cls([range(n)], n)

    @classmethod
    def singletons(cls, n: int) -> "VertexPartition":
        return cls([[v] for v in range(n)], n)

    @classmethod
    def from_labels(cls, labels: Sequence[int]) -> "VertexPartition":
        """Blocks ordered by first appearance of each label."""
        order: dict = {}
        for v, lab in enumerate(labels):
            order.setdefault(lab, []).append(v)
        return cls(order.values(), len(labels))

    def labels(self) -> np.ndarray:
        """Block index of every vertex."""
        return self._labels

    def block_of(self, v: int) -> int:
        return int(self._labels[v])

    def sizes(self) -> np.ndarray:
        return np.array([len(b) for b in self.blocks])

    def indicator(self) -> np.ndarray:
        """``n x k`` 0/1 membership matrix."""
        s = np.zeros((self.n, len(self.blocks)))
        s[np.arange(self.n), self._labels] = 1.0
        return s

    def same_blocks(self, other: "VertexPartition") -> bool:
        """Equality up to block order."""
        return self.n == other.n and set(self.blocks) == set(other.blocks)

    def __len__(self):
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __getitem__(self, i):
        return self.blocks[i]

    def __eq__(self, other):
        if not isinstance(other, VertexPartition):
            return NotImplemented
        return self.n == other.n and self.blocks == other.blocks

    def __hash__(self):
        return hash((self.n, self.blocks))

    def __repr__(self):
        return f"VertexPartition(n={self.n}, blocks={len(self.blocks)})"


def _check_sets(g: WeightedGraph, *sets):
    return [as_vertex_set(s, g.n) for s in sets]


def edge_sum(g: WeightedGraph, A, B) -> float:
    """Sum of ``weight(x, y)`` over ordered pairs ``(x, y)`` in ``A x B``."""
    A, B = _check_sets(g, A, B)
    if not A or not B:
        return 0.0
    return float(g.weights[np.ix_(A, B)].sum())


def density(g: WeightedGraph, A, B) -> float:
    A, B = _check_sets(g, A, B)
    if not A or not B:
        raise InputError("density needs non-empty vertex sets")
    return edge_sum(g, A, B) / (len(A) * len(B))


def block_sums(g: WeightedGraph, P: VertexPartition) -> np.ndarray:
    """``k x k`` matrix of ``e(V_i, V_j)``."""
    _check_partition(g, P)
    S = P.indicator()
    return S.T @ g.weights @ S


def _check_partition(g: WeightedGraph, P: VertexPartition):
    if P.n != g.n:
        raise InputError(f"partition covers {P.n} vertices but the graph has {g.n}")


def mean_square_density(g: WeightedGraph, P: VertexPartition) -> float:
    """``sum_{i,j} |V_i||V_j| d(V_i,V_j)^2 / n^2`` over ordered block pairs."""
    E = block_sums(g, P)
    sz = P.sizes().astype(float)
    return float(np.sum(E * E / np.outer(sz, sz)) / g.n ** 2)


def _check_same(P: VertexPartition, Q: VertexPartition):
    if P.n != Q.n:
        raise InputError(f"partitions cover different vertex sets ({P.n} vs {Q.n})")


def common_refinement(P: VertexPartition, Q: VertexPartition) -> VertexPartition:
    """All non-empty intersections, ordered by (P block, Q block)."""
    _check_same(P, Q)
    key = P.labels() * len(Q) + Q.labels()
    cells: dict = {}
    for v in np.lexsort((np.arange(P.n), key)):
        cells.setdefault(int(key[v]), []).append(int(v))
    return VertexPartition([cells[k] for k in sorted(cells)], P.n)


def atoms_from_subsets(P: VertexPartition, subsets) -> VertexPartition:
    """Split every block into the Venn cells of the subsets lying inside it.

    Within one block, cells are ordered by their membership signature read as a
    binary number (first subset most significant), largest first, so cells
    inside more of the early subsets come first. Blocks keep their order.
    """
    sigs = [[] for _ in P.blocks]
    labels = P.labels()
    for sub in subsets:
        sub = as_vertex_set(sub, P.n)
        if not sub:
            continue
        owners = np.unique(labels[np.asarray(sub)])
        if owners.size != 1:
            raise InputError(f"subset {sub} straddles blocks {owners.tolist()}")
        sigs[int(owners[0])].append(set(sub))
    out = []
    for b, subs in zip(P.blocks, sigs):
        if not subs:
            out.append(b)
            continue
        cells: dict = {}
        for v in b:
            sig = tuple(v in s for s in subs)
            cells.setdefault(sig, []).append(v)
        for sig in sorted(cells, reverse=True):
            out.append(cells[sig])
    return VertexPartition(out, P.n)


def is_refinement(Q: VertexPartition, P: VertexPartition) -> bool:
    """True iff every block of ``Q`` lies inside a block of ``P``."""
    _check_same(P, Q)
    lab = P.labels()
    return all(np.unique(lab[np.asarray(b)]).size == 1 for b in Q.blocks)


# ----------------------------------------------------------------------------
# text formats


def format_weight(x: float) -> str:
    """Shortest positional decimal that round-trips to the same double."""
    return np.format_float_positional(float(x) + 0.0, unique=True, trim="-")


def format_graph(g: WeightedGraph) -> str:
    lines = [f"wgraph {g.n}"]
    for row in g.weights:
        lines.append(" ".join(format_weight(x) for x in row))
    return "\n".join(lines) + "\n"


def _parse_rows(lines, rows, cols, what):
    if len(lines) != rows:
        raise InputError(f"{what}: expected {rows} rows, found {len(lines)}")
    out = np.empty((rows, cols))
    for i, line in enumerate(lines):
        toks = line.split(" ")
        if len(toks) != cols:
            raise InputError(f"{what}: row {i} has {len(toks)} entries, expected {cols}")
        try:
            out[i] = [float(t) for t in toks]
        except ValueError as exc:
            raise InputError(f"{what}: row {i}: {exc}") from None
    return out


def _content_lines(text: str):
    return [ln.strip() for ln in text.splitlines() if ln.strip()]


def parse_graph(text: str, weight_range=(0.0, 1.0)) -> WeightedGraph:
    lines = _content_lines(text)
    if not lines:
        raise InputError("empty graph file")
    head = lines[0].split()
    if len(head) != 2 or head[0] != "wgraph":
        raise InputError(f"bad graph header {lines[0]!r}")
    try:
        n = int(head[1])
    except ValueError:
        raise InputError(f"bad vertex count {head[1]!r}") from None
    if n < 1:
        raise InputError("graph needs at least one vertex")
    return WeightedGraph(_parse_rows(lines[1:], n, n, "graph"), weight_range)


def write_graph(path, g: WeightedGraph):
    with open(path, "w") as fh:
        fh.write(format_graph(g))


def read_graph(path, weight_range=(0.0, 1.0)) -> WeightedGraph:
    with open(path) as fh:
        return parse_graph(fh.read(), weight_range)


def format_blocks(blocks) -> str:
    return "".join(
        f"block {i}: {' '.join(str(v) for v in b)}\n" for i, b in enumerate(blocks)
    )


def format_partition(P: VertexPartition) -> str:
    return format_blocks(P.blocks)


def parse_blocks(text: str) -> list:
    """Parse ``block <id>: v1 v2 ...`` lines; ids must run 0, 1, 2, ... in order."""
    blocks = []
    for line in _content_lines(text):
        head, sep, body = line.partition(":")
        parts = head.split()
        if not sep or len(parts) != 2 or parts[0] != "block":
            raise InputError(f"bad partition line {line!r}")
        if parts[1] != str(len(blocks)):
            raise InputError(f"expected block id {len(blocks)}, found {parts[1]!r}")
        try:
            ids = [int(t) for t in body.split()]
        except ValueError:
            raise InputError(f"bad vertex id in {line!r}") from None
        if ids != sorted(set(ids)):
            raise InputError(f"vertex ids must be ascending and distinct in {line!r}")
        blocks.append(tuple(ids))
    return blocks


def parse_partition(text: str, n: int | None = None) -> VertexPartition:
    return VertexPartition(parse_blocks(text), n)


def write_partition(path, P: VertexPartition):
    with open(path, "w") as fh:
        fh.write(format_partition(P))


def read_partition(path, n: int | None = None) -> VertexPartition:
    with open(path) as fh:
        return parse_partition(fh.read(), n)
