"""Fast transforms between values on a non-tensorial grid and coefficients.

All per-axis operators used here are triangular, or products ``L @ U`` of
triangular factors. Restricted to a downward closed set ``A``, such an
operator acts along every line ``{alpha + k e_i}`` of ``A`` through the
leading ``t x t`` block of its matrix, where ``t`` is the line length. The
plan stores these lines as index tables grouped by length, so that one
sweep over an axis is a handful of dense matrix products.

The lines are derived from consecutive rank embeddings of the fiber blocks
(the selection maps of the lower block product). The same tables also come
out of the coordinate shifts ``psi_i`` used for differentiation, and the
tests check that both constructions agree.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.linalg import solve_triangular

from . import basis1d
from .basis1d import axis_basis
from .multiindex import (
    DownwardClosedSet,
    FiberProjections,
    FiberTubeProjections,
    TubeProjections,
    fiber_tubes_from_tubes,
    fibers_from_tubes,
    rank_embedding,
)
from .nodes import NonTensorialGrid, grid as make_grid

DENSE_CAP = 5000
SOLVERS = ("substitution", "matmul")


class OracleCapError(ValueError):
    pass


# ---------------------------------------------------------------------------
# lower block product


def lower_block_product(L, x, f: Sequence[int], S: Sequence[TubeProjections] | None = None, maps=None) -> np.ndarray:
    """Blockwise action ``y_i = sum_{j<=i} L[i, j] x_j[Phi_{S_i, S_j}]``.

    ``x`` is the concatenation of blocks of sizes ``f``; block ``i`` holds
    values on a downward closed set encoded by ``S[i]`` and the sets form a
    decreasing chain. ``S=None`` means every block is a single value.
    ``maps[i][j]`` may supply precomputed 0-based gathers.
    """
    L = np.asarray(L, dtype=float)
    x = np.asarray(x, dtype=float)
    f = [int(v) for v in f]
    k = len(f)
    if L.shape[0] < k or L.shape[1] < k:
        raise ValueError(f"matrix of shape {L.shape} is too small for {k} blocks")
    if sum(f) != x.shape[0]:
        raise ValueError(f"block sizes sum to {sum(f)} but x has length {x.shape[0]}")
    if any(a < b for a, b in zip(f, f[1:])):
        raise ValueError("block sizes must be non-increasing")
    offsets = np.concatenate([[0], np.cumsum(f)])
    blocks = [x[offsets[j]:offsets[j + 1]] for j in range(k)]
    out = np.empty_like(x)
    for i in range(k):
        acc = np.zeros(f[i])
        for j in range(i + 1):
            if L[i, j] == 0.0:
                continue
            if maps is not None:
                idx = maps[i][j]
            elif S is None or i == j:
                idx = slice(0, f[i])
            else:
                idx = rank_embedding(S[i], S[j]).index
            acc += L[i, j] * blocks[j][idx]
        out[offsets[i]:offsets[i + 1]] = acc
    return out


# ---------------------------------------------------------------------------
# plan


def _prefix_last_coords(t_row: Sequence[int]) -> np.ndarray:
    """Last coordinate of every prefix in pi_{<i+1}A given the tube row t_i."""
    t = np.asarray(t_row, dtype=np.int64)
    starts = np.repeat(np.cumsum(t) - t, t)
    return np.arange(int(t.sum()), dtype=np.int64) - starts


def _predecessors(T: TubeProjections, F: FiberProjections, S: FiberTubeProjections, axis: int) -> tuple:
    """Position of ``alpha - e_axis`` for every alpha (-1 if alpha_axis = 0).

    Built from consecutive rank embeddings of the blocks of each fiber; the
    embeddings are returned alongside, one 0-based array per block (None
    for the first block of a fiber).
    """
    m = T.m
    n_total = T.cardinality
    last = _prefix_last_coords(T.rows[axis])
    if axis == m - 1:
        # blocks are single elements laid out along contiguous tubes
        pred = np.arange(n_total, dtype=np.int64) - 1
        pred[last == 0] = -1
        return pred, None
    sizes = np.asarray(F.rows[axis + 1], dtype=np.int64)
    offsets = np.cumsum(sizes) - sizes
    blocks = S.levels[axis + 1]
    pred = np.full(n_total, -1, dtype=np.int64)
    embeddings: list = [None] * len(blocks)
    for g in range(len(blocks)):
        if last[g] == 0:
            continue
        emb = rank_embedding(TubeProjections(blocks[g]), TubeProjections(blocks[g - 1])).index
        embeddings[g] = emb
        pred[offsets[g]:offsets[g] + sizes[g]] = offsets[g - 1] + emb
    return pred, embeddings


def _line_tables(pred: np.ndarray) -> dict:
    """Group lines by length; table ``t`` has shape ``(count, t)``."""
    n = pred.size
    succ = np.full(n, -1, dtype=np.int64)
    has = pred >= 0
    succ[pred[has]] = np.flatnonzero(has)
    roots = np.flatnonzero(~has)
    cols = [roots]
    length = np.ones(roots.size, dtype=np.int64)
    cur = roots
    alive = np.ones(roots.size, dtype=bool)
    while True:
        nxt = np.where(alive, succ[cur], -1)
        alive = nxt >= 0
        if not alive.any():
            break
        length += alive
        cur = np.where(alive, nxt, cur)
        cols.append(cur)
    grid_ = np.column_stack(cols)
    tables = {}
    for t in np.unique(length):
        rows = grid_[length == t, :t]
        tables[int(t)] = np.ascontiguousarray(rows)
    return tables


def shift_permutations(dcs: DownwardClosedSet) -> list:
    """Permutations ``psi_1..psi_m`` (0-based axes) bringing axis i last.

    A single shift regroups the lex-sorted list stably by its last
    coordinate, which is the lex order of the set with coordinates rotated
    one step to the right. ``psi_i`` composes ``m - i`` such shifts, so
    ``c[psi_i]`` lists the coefficients in the lex order of the rotated
    set, where axis i is the fastest coordinate; ``psi_m`` is the identity.
    """
    m = dcs.m
    idx = dcs.indices
    perms = [None] * m
    perm = np.arange(len(dcs), dtype=np.int64)
    cur = idx.copy()
    for i in range(m - 1, -1, -1):
        perms[i] = perm.copy()
        if i == 0:
            break
        order = np.argsort(cur[:, -1], kind="stable")
        cur = np.roll(cur[order], 1, axis=1)
        perm = perm[order]
    return perms


def _tables_from_shift(dcs: DownwardClosedSet, psi: np.ndarray, axis: int) -> dict:
    """Tubes of the rotated set, mapped back to original positions."""
    coord = dcs.indices[psi, axis]
    starts = np.flatnonzero(coord == 0)
    lengths = np.diff(np.append(starts, coord.size))
    tables = {}
    for t in np.unique(lengths):
        s = starts[lengths == t]
        tables[int(t)] = psi[s[:, None] + np.arange(t)]
    return tables


def _inverse_perm(p: np.ndarray) -> np.ndarray:
    inv = np.empty_like(p)
    inv[p] = np.arange(p.size, dtype=p.dtype)
    return inv


@dataclass(frozen=True, eq=False)
class TransformPlan:
    """Everything precomputed for one ``(A, grid, basis kind)``.

    ``lines[i]`` maps a line length ``t`` to a ``(count, t)`` table of
    positions; ``embeddings[i][g]`` is the 0-based rank embedding of block
    ``g`` of the prefix set ``pi_{<i+2}A`` into its predecessor block.
    ``psi[i]`` and ``psi_inv[i]`` are the shift permutations for axis i.
    """

    set: DownwardClosedSet
    grid: NonTensorialGrid
    kind: str
    bases: tuple
    T: TubeProjections
    F: FiberProjections
    S: FiberTubeProjections
    lines: tuple
    embeddings: tuple
    psi: tuple
    psi_inv: tuple
    diff_lines: tuple
    solver: str = "substitution"
    _inverses: dict = field(default_factory=dict, repr=False)

    @property
    def m(self) -> int:
        return self.set.m

    @property
    def size(self) -> int:
        return len(self.set)

    def inverse_factor(self, axis: int, name: str) -> np.ndarray:
        """Inverse of a full per-axis triangular factor (cached)."""
        key = (axis, name)
        if key not in self._inverses:
            M = getattr(self.bases[axis], name)
            lower = name != "U"
            inv = solve_triangular(M, np.eye(M.shape[0]), lower=lower)
            inv.setflags(write=False)
            self._inverses[key] = inv
        return self._inverses[key]

    def selection_map(self, axis: int, block: int) -> np.ndarray | None:
        """0-based gather embedding a fiber block into the previous one."""
        emb = self.embeddings[axis]
        if emb is None:
            return None
        return emb[block]


def plan(dcs: DownwardClosedSet, grid: NonTensorialGrid | None = None, kind: str = "newton",
         solver: str = "substitution") -> TransformPlan:
    """Precompute projections, per-axis factors, selection maps and shifts."""
    if kind not in basis1d.KINDS:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {basis1d.KINDS}")
    if solver not in SOLVERS:
        raise ValueError(f"unknown solver {solver!r}; expected one of {SOLVERS}")
    if grid is None:
        grid = make_grid(dcs)
    if grid.set != dcs:
        raise ValueError("grid was built for a different set")
    bases = tuple(axis_basis(kind, ax) for ax in grid.axes)
    T = dcs.tubes
    F = fibers_from_tubes(T)
    S = fiber_tubes_from_tubes(T)
    lines, embeddings = [], []
    for i in range(dcs.m):
        pred, emb = _predecessors(T, F, S, i)
        lines.append(_line_tables(pred))
        embeddings.append(emb)
    psi = shift_permutations(dcs)
    psi_inv = [_inverse_perm(p) for p in psi]
    diff_lines = [_tables_from_shift(dcs, psi[i], i) for i in range(dcs.m)]
    for p in psi + psi_inv:
        p.setflags(write=False)
    return TransformPlan(
        set=dcs, grid=grid, kind=kind, bases=bases, T=T, F=F, S=S,
        lines=tuple(lines), embeddings=tuple(embeddings),
        psi=tuple(psi), psi_inv=tuple(psi_inv), diff_lines=tuple(diff_lines), solver=solver,
    )


# ---------------------------------------------------------------------------
# sweeps


def _apply_axis(x: np.ndarray, tables: dict, M: np.ndarray) -> None:
    """In place: every line of length t gets ``M[:t, :t] @ line``."""
    for t, tab in tables.items():
        x[tab] = x[tab] @ M[:t, :t].T


def _solve_axis(x: np.ndarray, tables: dict, M: np.ndarray, lower: bool) -> None:
    for t, tab in tables.items():
        rhs = x[tab].T
        x[tab] = solve_triangular(M[:t, :t], rhs, lower=lower, check_finite=False).T


def _check_vector(plan_: TransformPlan, v, name: str) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != plan_.size:
        raise ValueError(f"{name} must have length {plan_.size}, got shape {arr.shape}")
    return arr


def _factor_passes(plan_: TransformPlan) -> list:
    """``(name, lower)`` factors whose product is the per-axis V."""
    if plan_.kind == "newton":
        return [("V", True)]
    return [("L", True), ("U", False)]


def fnt_inverse(plan_: TransformPlan, c, out: np.ndarray | None = None) -> np.ndarray:
    """Values of ``sum_alpha c_alpha Q_alpha`` at all grid points."""
    c = _check_vector(plan_, c, "coefficient vector")
    x = out if out is not None else np.empty_like(c)
    x[...] = c
    # V = L U, so U acts first
    for name, _ in reversed(_factor_passes(plan_)):
        for i in range(plan_.m):
            _apply_axis(x, plan_.lines[i], getattr(plan_.bases[i], name))
    return x


def fnt_forward(plan_: TransformPlan, f, out: np.ndarray | None = None) -> np.ndarray:
    """Coefficients ``c`` with ``V c = f`` on the grid."""
    f = _check_vector(plan_, f, "value vector")
    x = out if out is not None else np.empty_like(f)
    x[...] = f
    for name, lower in _factor_passes(plan_):
        for i in range(plan_.m):
            if plan_.solver == "matmul":
                _apply_axis(x, plan_.lines[i], plan_.inverse_factor(i, name))
            else:
                _solve_axis(x, plan_.lines[i], getattr(plan_.bases[i], name), lower)
    return x


def diff_coeffs(plan_: TransformPlan, c, axis: int, out: np.ndarray | None = None) -> np.ndarray:
    """Coefficients of the derivative along ``axis`` (1-based).

    The coefficients are shifted so that ``axis`` becomes the fastest
    coordinate, the coefficient-space derivative is applied tube by tube,
    and the result is shifted back.
    """
    c = _check_vector(plan_, c, "coefficient vector")
    if not 1 <= axis <= plan_.m:
        raise ValueError(f"axis must lie in 1..{plan_.m}, got {axis}")
    i = axis - 1
    Dc = plan_.bases[i].Dc
    x = out if out is not None else np.empty_like(c)
    x[...] = c
    _apply_axis(x, plan_.diff_lines[i], Dc)
    return x


def hierarchical_apply(plan_: TransformPlan, axis: int, M) -> callable:
    """Reference path for one axis through nested lower block products.

    Returns a function computing ``Phi (I x .. M .. x I) Phi^T x`` for a
    lower triangular ``M`` by calling :func:`lower_block_product` once per
    prefix in ``pi_{<axis}A``. Intended for cross-checks, not speed.
    """
    i = axis - 1
    M = np.asarray(M, dtype=float)
    T, F, S = plan_.T, plan_.F, plan_.S
    fiber_sizes = np.asarray(F.rows[i], dtype=np.int64)
    fiber_offsets = np.cumsum(fiber_sizes) - fiber_sizes
    t_row = np.asarray(T.rows[i], dtype=np.int64)
    child0 = np.cumsum(t_row) - t_row
    last = i == plan_.m - 1

    def apply(x):
        x = _check_vector(plan_, x, "vector")
        out = np.empty_like(x)
        for b in range(len(t_row)):
            k = int(t_row[b])
            seg = slice(fiber_offsets[b], fiber_offsets[b] + fiber_sizes[b])
            if last:
                out[seg] = lower_block_product(M, x[seg], [1] * k)
            else:
                g = slice(child0[b], child0[b] + k)
                f = F.rows[i + 1][g]
                blocks = [TubeProjections(s) for s in S.levels[i + 1][g]]
                out[seg] = lower_block_product(M, x[seg], f, blocks)
        return out

    return apply


# ---------------------------------------------------------------------------
# dense oracles


def _oracle_points(dcs: DownwardClosedSet, grid: NonTensorialGrid | None, cap: int):
    if len(dcs) > cap:
        raise OracleCapError(f"|A| = {len(dcs)} exceeds the dense oracle cap {cap}")
    return make_grid(dcs) if grid is None else grid


def _axis_factor(kind: str, nodes, x: np.ndarray, degree: int, derivative: bool) -> np.ndarray:
    if kind == "newton":
        fn = basis1d.newton_basis_derivative if derivative else basis1d.newton_basis
        return fn(nodes, x, degree)
    if kind == "chebyshev":
        fn = basis1d.chebyshev_basis_derivative if derivative else basis1d.chebyshev_basis
        return fn(x, degree)
    raise ValueError(f"unknown basis kind {kind!r}")


def _dense(dcs, grid_, kind, diff_axis):
    pts = grid_.points()
    idx = dcs.indices
    out = np.ones((len(dcs), len(dcs)))
    for i, (ax, n_i) in enumerate(zip(grid_.axes, dcs.max_degrees)):
        B = _axis_factor(kind, ax, pts[:, i], n_i, derivative=(i == diff_axis))
        out *= B[:, idx[:, i]]
    return out


def dense_vandermonde(dcs: DownwardClosedSet, grid: NonTensorialGrid | None = None, kind: str = "newton",
                      cap: int = DENSE_CAP) -> np.ndarray:
    """``V[a, b] = Q_b(p_a)`` by direct evaluation."""
    return _dense(dcs, _oracle_points(dcs, grid, cap), kind, None)


def dense_diff_matrix(dcs: DownwardClosedSet, grid: NonTensorialGrid | None = None, kind: str = "newton",
                      axis: int = 1, cap: int = DENSE_CAP) -> np.ndarray:
    """``D[a, b] = (d/dx_axis Q_b)(p_a)`` by direct evaluation."""
    if not 1 <= axis <= dcs.m:
        raise ValueError(f"axis must lie in 1..{dcs.m}, got {axis}")
    return _dense(dcs, _oracle_points(dcs, grid, cap), kind, axis - 1)


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product ordered to match the lex order (axis 1 slowest)."""
    out = np.ones((1, 1))
    for M in mats:
        out = np.kron(out, M)
    return out


def box_ranks(dcs: DownwardClosedSet, shape: Sequence[int] | None = None) -> np.ndarray:
    """0-based positions of A inside the box ``prod_i {0..n_i}`` (lex order)."""
    shape = tuple(n + 1 for n in dcs.max_degrees) if shape is None else tuple(shape)
    return np.ravel_multi_index(tuple(dcs.indices.T), shape)


def selected_kron(dcs: DownwardClosedSet, mats: Sequence[np.ndarray], cap: int = DENSE_CAP) -> np.ndarray:
    """``Phi (M_1 x ... x M_m) Phi^T`` without forming the full product."""
    if len(dcs) > cap:
        raise OracleCapError(f"|A| = {len(dcs)} exceeds the dense oracle cap {cap}")
    idx = dcs.indices
    out = np.ones((len(dcs), len(dcs)))
    for i, M in enumerate(mats):
        out *= np.asarray(M)[np.ix_(idx[:, i], idx[:, i])]
    return out
