"""Downward closed multi-index sets and their ragged projections.

Multi-indices are plain tuples of non-negative ints. Sets are kept in
lexicographic order with the first coordinate most significant, so the last
coordinate varies fastest in a sorted listing. All ranks exposed here are
1-based, matching the usual mathematical convention; ``RankEmbedding.index``
gives the equivalent 0-based numpy gather array.
"""

from __future__ import annotations

import math
import operator
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from typing import Callable, Iterable, Sequence

import numpy as np

MultiIndex = tuple  # tuple[int, ...]

_EPS = sys.float_info.epsilon


class NotDownwardClosedError(ValueError):
    """Raised when an index set misses a componentwise predecessor."""

    def __init__(self, alpha, missing):
        self.alpha = tuple(alpha)
        self.missing = tuple(missing)
        super().__init__(f"set is not downward closed: {self.alpha} is present but {self.missing} is not")


class ContainmentError(ValueError):
    """Raised when a rank embedding is requested for A' that is not a subset of A."""


class StructureError(ValueError):
    """Raised for ragged projection data with inconsistent row lengths or blocks."""


def lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Return -1, 0 or 1 as ``a`` precedes, equals or follows ``b``."""
    if len(a) != len(b):
        raise ValueError(f"dimension mismatch: {len(a)} vs {len(b)}")
    for x, y in zip(a, b):
        if x != y:
            return -1 if x < y else 1
    return 0


# ---------------------------------------------------------------------------
# ragged projection containers


def _ragged_norm(rows) -> int:
    return sum(sum(r) for r in rows)


@dataclass(frozen=True)
class TubeProjections:
    """Rows ``t_1..t_m``; row ``i`` holds one run length per element of the
    projection of A onto its first ``i - 1`` coordinates."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def norm(self) -> int:
        return _ragged_norm(self.rows)

    @property
    def cardinality(self) -> int:
        return sum(self.rows[-1]) if self.rows else 1

    def validate(self) -> None:
        expected = 1
        for i, row in enumerate(self.rows, start=1):
            if len(row) != expected:
                raise StructureError(f"row {i} has {len(row)} entries, expected {expected}")
            if any(v < 1 for v in row):
                raise StructureError(f"row {i} contains a non-positive run length")
            expected = sum(row)

    def __str__(self) -> str:
        return "(" + ", ".join(_fmt_row(r) for r in self.rows) + ")"


@dataclass(frozen=True)
class FiberProjections:
    """Rows ``f_1..f_m``; ``f_i`` lists the fiber sizes under fixing the first
    ``i - 1`` coordinates."""

    rows: tuple

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(tuple(int(v) for v in r) for r in self.rows))

    def __str__(self) -> str:
        return "(" + ", ".join(_fmt_row(r) for r in self.rows) + ")"


@dataclass(frozen=True)
class FiberTubeProjections:
    """``levels[i - 1][b]`` holds the tube projection rows of the ``b``-th
    fiber at level ``i`` with its first ``i - 1`` coordinates dropped."""

    levels: tuple

    def level_norm(self, i: int) -> int:
        """Sum of all entries of level ``i`` (1-based)."""
        return sum(_ragged_norm(s) for s in self.levels[i - 1])

    def __str__(self) -> str:
        return "\n".join(
            "(" + ", ".join("(" + ", ".join(_fmt_row(r) for r in s) + ")" for s in lvl) + ")"
            for lvl in self.levels
        )


def _fmt_row(row) -> str:
    return "(" + ",".join(str(v) for v in row) + ")"


@dataclass(frozen=True)
class RankEmbedding:
    """Strictly increasing 1-based positions of A' inside A."""

    image: tuple

    @property
    def index(self) -> np.ndarray:
        return np.asarray(self.image, dtype=np.intp) - 1

    def __len__(self) -> int:
        return len(self.image)


# ---------------------------------------------------------------------------
# the set type


@dataclass(frozen=True, eq=False)
class DownwardClosedSet:
    """A finite downward closed subset of N_0^m in lexicographic order.

    Build instances with :func:`lp_set`, :func:`from_indices` or
    :func:`from_tubes`; the constructor trusts its input.
    """

    indices: np.ndarray
    _tubes: TubeProjections | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        arr = np.ascontiguousarray(self.indices, dtype=np.int64)
        if arr.ndim != 2 or arr.shape[0] == 0 or arr.shape[1] == 0:
            raise ValueError("indices must be a non-empty (N, m) array with m >= 1")
        arr.setflags(write=False)
        object.__setattr__(self, "indices", arr)

    @property
    def m(self) -> int:
        return self.indices.shape[1]

    def __len__(self) -> int:
        return self.indices.shape[0]

    def __iter__(self):
        return (tuple(int(v) for v in row) for row in self.indices)

    def __contains__(self, alpha) -> bool:
        return tuple(alpha) in self._ranks

    def __eq__(self, other) -> bool:
        if not isinstance(other, DownwardClosedSet):
            return NotImplemented
        return self.indices.shape == other.indices.shape and bool(np.all(self.indices == other.indices))

    __hash__ = None

    def __repr__(self) -> str:
        return f"DownwardClosedSet(m={self.m}, size={len(self)}, max_degrees={self.max_degrees})"

    @cached_property
    def max_degrees(self) -> tuple:
        return tuple(int(v) for v in self.indices.max(axis=0))

    @property
    def mean_degree(self) -> Fraction:
        return Fraction(sum(self.max_degrees), self.m)

    @property
    def max_degree(self) -> int:
        return max(self.max_degrees)

    @cached_property
    def _ranks(self) -> dict:
        return {alpha: k for k, alpha in enumerate(self, start=1)}

    def rank(self, alpha: Sequence[int]) -> int:
        if len(alpha) != self.m:
            raise ValueError(f"dimension mismatch: {len(alpha)} vs {self.m}")
        try:
            return self._ranks[tuple(int(v) for v in alpha)]
        except KeyError:
            raise KeyError(f"{tuple(alpha)} is not in the set") from None

    def unrank(self, k: int) -> tuple:
        if not 1 <= k <= len(self):
            raise IndexError(f"rank {k} out of range 1..{len(self)}")
        return tuple(int(v) for v in self.indices[k - 1])

    @property
    def tubes(self) -> TubeProjections:
        if self._tubes is None:
            object.__setattr__(self, "_tubes", tube_projections(self))
        return self._tubes


# ---------------------------------------------------------------------------
# construction


def _is_integer(p) -> bool:
    return not math.isinf(p) and float(p).is_integer()


def lp_set(m: int, n: int, p: float) -> DownwardClosedSet:
    """All multi-indices with ``||alpha||_p <= n``, in lexicographic order.

    ``p`` may be ``math.inf``. Integer exponents are compared exactly; other
    exponents compare ``sum alpha_i**p`` against ``n**p`` with a slack of
    8 ulp toward inclusion.
    """
    if m < 1:
        raise ValueError(f"dimension must be positive, got {m}")
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    if not p > 0:
        raise ValueError(f"exponent must be positive, got {p}")

    degrees = np.arange(n + 1, dtype=np.int64)
    if math.isinf(p):
        cost, budget = np.zeros(n + 1, dtype=np.int64), 0
    elif _is_integer(p):
        q = int(p)
        cost, budget = degrees**q, n**q
    else:
        cost = degrees.astype(float) ** p
        budget = float(n) ** p * (1.0 + 8 * _EPS)

    prefixes = np.zeros((1, 0), dtype=np.int64)
    partial = np.zeros(1, dtype=cost.dtype)
    for _ in range(m):
        # rows are emitted prefix by prefix, so lex order is preserved
        keep = partial[:, None] + cost[None, :] <= budget
        rows, cols = np.nonzero(keep)
        prefixes = np.column_stack([prefixes[rows], degrees[cols]])
        partial = partial[rows] + cost[cols]
    return DownwardClosedSet(prefixes)


def check_downward_closed(indices: Iterable[Sequence[int]]) -> None:
    """Raise :class:`NotDownwardClosedError` unless every immediate
    predecessor ``alpha - e_i`` of every member is present."""
    members = {tuple(int(v) for v in a) for a in indices}
    for alpha in sorted(members):
        for i, a in enumerate(alpha):
            if a > 0:
                beta = alpha[:i] + (a - 1,) + alpha[i + 1:]
                if beta not in members:
                    raise NotDownwardClosedError(alpha, beta)


def from_indices(indices: Iterable[Sequence[int]]) -> DownwardClosedSet:
    """Deduplicate, sort and validate a user-supplied index collection."""
    members = {tuple(int(v) for v in a) for a in indices}
    if not members:
        raise ValueError("index set must be non-empty")
    dims = {len(a) for a in members}
    if len(dims) != 1:
        raise ValueError(f"indices have mixed dimensions {sorted(dims)}")
    if any(v < 0 for a in members for v in a):
        raise ValueError("indices must be non-negative")
    check_downward_closed(members)
    return DownwardClosedSet(np.array(sorted(members), dtype=np.int64))


def tube_projections(dcs: DownwardClosedSet) -> TubeProjections:
    """Run lengths of A along each axis, from one carry-detecting pass."""
    m = dcs.m
    rows = [[] for _ in range(m)]
    k = [1] * (m - 1) + [0]
    for alpha in dcs.indices.tolist():
        for i in range(m - 1, -1, -1):
            if k[i] == alpha[i]:
                k[i] += 1
                break
            rows[i].append(k[i])
            k[i] = 1
    for i in range(m):
        rows[i].append(k[i])
    return TubeProjections(tuple(tuple(r) for r in rows))


def indices_from_tubes(T: TubeProjections) -> np.ndarray:
    """Decode the lex-sorted index array encoded by ``T``."""
    T.validate()
    prefixes = np.zeros((1, 0), dtype=np.int64)
    for row in T.rows:
        counts = np.asarray(row, dtype=np.int64)
        parent = np.repeat(np.arange(len(counts)), counts)
        local = np.arange(parent.size) - np.repeat(np.cumsum(counts) - counts, counts)
        prefixes = np.column_stack([prefixes[parent], local])
    return prefixes


def from_tubes(T: TubeProjections) -> DownwardClosedSet:
    idx = indices_from_tubes(T)
    check_downward_closed(idx.tolist())
    return DownwardClosedSet(idx, _tubes=T)


# ---------------------------------------------------------------------------
# pushforwards along block surjections


def block_pushforward(values: Sequence, blocks: Sequence[int], op: Callable = operator.add, identity=0) -> list:
    """Fold ``values`` blockwise with the monoid ``(op, identity)``."""
    if any(b < 1 for b in blocks):
        raise StructureError("block sizes must be positive")
    if sum(blocks) != len(values):
        raise StructureError(f"blocks sum to {sum(blocks)} but there are {len(values)} values")
    out, pos = [], 0
    for b in blocks:
        out.append(reduce(op, values[pos:pos + b], identity))
        pos += b
    return out


def block_aggregate(values: Sequence[int], blocks: Sequence[int]) -> list:
    return block_pushforward(values, blocks)


def block_concat(lists: Sequence[Sequence], blocks: Sequence[int]) -> list:
    return block_pushforward([tuple(v) for v in lists], blocks, operator.add, ())


def _zip_concat(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if len(a) != len(b):
        raise StructureError("componentwise concatenation of tuples with different lengths")
    return tuple(x + y for x, y in zip(a, b))


def block_concat_componentwise(tuples: Sequence[Sequence[Sequence]], blocks: Sequence[int]) -> list:
    """Concatenate tuples-of-lists row by row within each block."""
    items = [tuple(tuple(r) for r in t) for t in tuples]
    return block_pushforward(items, blocks, _zip_concat, ())


# ---------------------------------------------------------------------------
# fiber and fiber-tube reconstruction from tubes


def fibers_from_tubes(T: TubeProjections) -> FiberProjections:
    T.validate()
    rows = [T.rows[-1]]
    for i in range(T.m - 2, -1, -1):
        rows.append(tuple(block_aggregate(rows[-1], T.rows[i])))
    return FiberProjections(tuple(reversed(rows)))


def fiber_tubes_from_tubes(T: TubeProjections) -> FiberTubeProjections:
    T.validate()
    m = T.m
    levels = [tuple(((t,),) for t in T.rows[m - 1])]
    for i in range(m - 2, -1, -1):
        merged = block_concat_componentwise(levels[-1], T.rows[i])
        levels.append(tuple(((t,),) + s for t, s in zip(T.rows[i], merged)))
    return FiberTubeProjections(tuple(reversed(levels)))


def carry_count(T: TubeProjections, cardinality: int) -> Fraction:
    """Tube norm divided by |A|."""
    if cardinality != T.cardinality:
        raise ValueError(f"cardinality {cardinality} does not match the {T.cardinality} elements encoded in T")
    return Fraction(T.norm, cardinality)


# ---------------------------------------------------------------------------
# rank embeddings


def rank_embedding(T_sub: TubeProjections, T_super: TubeProjections) -> RankEmbedding:
    """Positions of A' inside A from a synchronized walk of both tube tries.

    Every node of A's trie is visited once, so the cost is ``O(||T(A)||)``.
    A child count of A' exceeding the matching one of A means A' is not a
    subset of A.
    """
    if T_sub.m != T_super.m:
        raise ValueError(f"dimension mismatch: {T_sub.m} vs {T_super.m}")
    m = T_super.m
    if m == 0:
        return RankEmbedding((1,))
    sub, sup = T_sub.rows, T_super.rows
    p = [0] * m  # cursor into each row of T(A)
    q = [0] * m  # cursor into each row of T(A')
    image: list = []
    rank = 0

    def walk(i: int, inside: bool) -> None:
        nonlocal rank
        c = sup[i][p[i]]
        p[i] += 1
        c_sub = 0
        if inside:
            c_sub = sub[i][q[i]]
            q[i] += 1
            if c_sub > c:
                raise ContainmentError(f"A' is not contained in A: row {i + 1} run {c_sub} exceeds {c}")
        if i == m - 1:
            image.extend(range(rank + 1, rank + c_sub + 1))
            rank += c
            return
        for child in range(c):
            walk(i + 1, inside and child < c_sub)

    try:
        walk(0, True)
    except IndexError:
        raise StructureError("tube projections are malformed") from None
    if any(q[i] != len(sub[i]) for i in range(m)):
        raise ContainmentError("A' is not contained in A")
    return RankEmbedding(tuple(image))


# ---------------------------------------------------------------------------
# text serialization of a set as its tube projections


def dumps_set(dcs: DownwardClosedSet) -> str:
    lines = [f"m={dcs.m}"] + [" ".join(str(v) for v in row) for row in dcs.tubes.rows]
    return "\n".join(lines) + "\n"


def loads_set(text: str) -> DownwardClosedSet:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or not lines[0].startswith("m="):
        raise ValueError("expected a first line of the form 'm=<int>'")
    m = int(lines[0][2:])
    if len(lines) != m + 1:
        raise ValueError(f"expected {m} tube rows, found {len(lines) - 1}")
    rows = tuple(tuple(int(v) for v in ln.split()) for ln in lines[1:])
    return from_tubes(TubeProjections(rows))
