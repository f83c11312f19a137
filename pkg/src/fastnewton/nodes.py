"""One-dimensional node families, Leja ordering and non-tensorial grids."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .multiindex import DownwardClosedSet

# relative band within which multiplicative distances count as tied
LEJA_TIE_RTOL = 1e-12
# above this many nodes the running products are accumulated as log sums
LEJA_LOG_THRESHOLD = 64


@dataclass(frozen=True, eq=False)
class AxisNodes:
    """Pairwise distinct nodes in [-1, 1] for one axis."""

    values: np.ndarray
    family: str = "custom"
    leja_permutation: tuple | None = None

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("an axis needs at least one node")
        if np.unique(vals).size != vals.size:
            raise ValueError("axis nodes must be pairwise distinct")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return self.values.size

    def __eq__(self, other):
        if not isinstance(other, AxisNodes):
            return NotImplemented
        return self.family == other.family and np.array_equal(self.values, other.values)

    __hash__ = None


def chebyshev_lobatto(n: int) -> AxisNodes:
    """Nodes ``cos(k pi / n)`` for ``k = 0..n``.

    Evaluated as ``sin(pi (n - 2k) / (2n))`` so the set is exactly symmetric
    about zero and contains an exact 0 for even ``n``.
    """
    if n < 0:
        raise ValueError(f"degree must be non-negative, got {n}")
    if n == 0:
        return AxisNodes(np.array([1.0]), family="chebyshev-lobatto")
    k = np.arange(n + 1)
    return AxisNodes(np.sin(np.pi * (n - 2 * k) / (2 * n)), family="chebyshev-lobatto")


def leja_order(nodes: AxisNodes) -> AxisNodes:
    """Greedy Leja reordering; ties go to the earliest node in input order."""
    x = nodes.values
    n = x.size
    use_log = n > LEJA_LOG_THRESHOLD
    remaining = np.ones(n, dtype=bool)
    # the first pick maximizes |x|; later picks the product over chosen nodes
    if use_log:
        with np.errstate(divide="ignore"):
            score = np.log(np.abs(x))
    else:
        score = np.abs(x)
    order = []
    for step in range(n):
        cand = np.where(remaining, score, -np.inf)
        best = cand.max()
        if use_log:
            tied = cand >= best + np.log1p(-LEJA_TIE_RTOL)
        else:
            tied = cand >= best * (1.0 - LEJA_TIE_RTOL)
        j = int(np.flatnonzero(tied & remaining)[0])
        order.append(j)
        remaining[j] = False
        if step == 0:
            score = np.zeros(n) if use_log else np.ones(n)
        dist = np.abs(x - x[j])
        if use_log:
            with np.errstate(divide="ignore"):
                score = score + np.log(dist)
        else:
            score = score * dist
    perm = tuple(order)
    return AxisNodes(x[list(perm)], family=nodes.family, leja_permutation=perm)


def leja_chebyshev_lobatto(n: int) -> AxisNodes:
    return leja_order(chebyshev_lobatto(n))


@dataclass(frozen=True, eq=False)
class NonTensorialGrid:
    """Points ``p_alpha = (p_{alpha_1,1}, ..., p_{alpha_m,m})`` for alpha in A."""

    set: DownwardClosedSet
    axes: tuple

    def __post_init__(self):
        axes = tuple(self.axes)
        if len(axes) != self.set.m:
            raise ValueError(f"need {self.set.m} axes, got {len(axes)}")
        trimmed = []
        for i, (ax, n_i) in enumerate(zip(axes, self.set.max_degrees), start=1):
            if len(ax) < n_i + 1:
                raise ValueError(f"axis {i} has {len(ax)} nodes but degree {n_i} needs {n_i + 1}")
            if len(ax) > n_i + 1:
                perm = ax.leja_permutation[: n_i + 1] if ax.leja_permutation else None
                ax = AxisNodes(ax.values[: n_i + 1], family=ax.family, leja_permutation=perm)
            trimmed.append(ax)
        object.__setattr__(self, "axes", tuple(trimmed))

    @property
    def m(self) -> int:
        return self.set.m

    def __len__(self) -> int:
        return len(self.set)

    def point(self, k: int) -> np.ndarray:
        """Grid point attached to 1-based rank ``k``."""
        alpha = self.set.unrank(k)
        return np.array([ax.values[a] for ax, a in zip(self.axes, alpha)])

    def points(self) -> np.ndarray:
        """All grid points as an ``(|A|, m)`` array in rank order."""
        idx = self.set.indices
        return np.column_stack([ax.values[idx[:, i]] for i, ax in enumerate(self.axes)])


def grid(dcs: DownwardClosedSet, axes: Sequence[AxisNodes] | None = None) -> NonTensorialGrid:
    """Assemble the grid; defaults to Leja-ordered Chebyshev-Lobatto axes."""
    if axes is None:
        axes = [leja_chebyshev_lobatto(n_i) for n_i in dcs.max_degrees]
    return NonTensorialGrid(dcs, tuple(axes))


def format_nodes(nodes: AxisNodes) -> str:
    return " ".join(f"{v:.17g}" for v in nodes.values)


def parse_nodes(line: str, family: str = "custom") -> AxisNodes:
    return AxisNodes(np.array([float(tok) for tok in line.split()]), family=family)
