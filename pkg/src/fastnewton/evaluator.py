"""Interpolants evaluated at arbitrary points, and error metrics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .transform import TransformPlan, _prefix_last_coords, diff_coeffs, fnt_forward

ERROR_FLOOR = 1e-300
# points per chunk are chosen so a chunk holds about this many products
_CHUNK_ENTRIES = 1 << 22


@dataclass(frozen=True, eq=False)
class Interpolant:
    """``q(x) = sum_alpha c_alpha Q_alpha(x)`` for a plan's set and basis."""

    plan: TransformPlan
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float)
        if c.shape != (self.plan.size,):
            raise ValueError(f"expected {self.plan.size} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def m(self) -> int:
        return self.plan.m

    def __call__(self, x) -> np.ndarray:
        """Evaluate at an ``(N, m)`` batch of points."""
        x = np.asarray(x, dtype=float)
        if x.ndim == 1 and self.m == 1:
            x = x[:, None]
        if x.ndim != 2 or x.shape[1] != self.m:
            raise ValueError(f"points must have shape (N, {self.m}), got {x.shape}")
        chunk = max(1, _CHUNK_ENTRIES // max(1, self.plan.size))
        out = np.empty(x.shape[0])
        for s in range(0, x.shape[0], chunk):
            out[s:s + chunk] = self._eval_batch(x[s:s + chunk])
        return out

    def eval_point(self, x) -> float:
        x = np.asarray(x, dtype=float).ravel()
        if x.size != self.m:
            raise ValueError(f"point must have {self.m} coordinates, got {x.size}")
        return float(self._eval_batch(x[None, :])[0])

    def _eval_batch(self, x: np.ndarray) -> np.ndarray:
        # sum over the last coordinate within each tube, then fold the
        # partial sums up one prefix level at a time
        T = self.plan.T
        r = np.broadcast_to(self.coeffs, (x.shape[0], self.coeffs.size))
        for i in range(self.m - 1, -1, -1):
            b = self.plan.bases[i].values(x[:, i])
            loc = _prefix_last_coords(T.rows[i])
            t = np.asarray(T.rows[i], dtype=np.int64)
            starts = np.cumsum(t) - t
            r = np.add.reduceat(r * b[:, loc], starts, axis=1)
        return r[:, 0]

    def derivative(self, axis: int) -> "Interpolant":
        return Interpolant(self.plan, diff_coeffs(self.plan, self.coeffs, axis))


def interpolate(plan: TransformPlan, f: Callable) -> Interpolant:
    """Interpolant of ``f`` (vectorized over ``(N, m)`` points) on the plan's grid."""
    values = np.asarray(f(plan.grid.points()), dtype=float)
    return Interpolant(plan, fnt_forward(plan, values))


def uniform_samples(m: int, count: int, seed: int) -> np.ndarray:
    """Seeded uniform points in ``[-1, 1]^m`` (PCG64)."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(count, m))


def max_rel_error(interp: Interpolant, f: Callable, samples) -> float:
    """``max |q - f| / max(max |f|, 1e-300)`` over the samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] == 0:
        raise ValueError("need at least one sample")
    q = interp(samples)
    fv = np.asarray(f(samples), dtype=float)
    return float(np.max(np.abs(q - fv)) / max(float(np.max(np.abs(fv))), ERROR_FLOOR))
