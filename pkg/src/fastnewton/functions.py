"""Test functions for convergence studies, vectorized over ``(N, m)`` points.

The formulas are our own stand-ins chosen for their qualitative character
(Runge-type functions with poles near the cube, and entire functions).
"""

from __future__ import annotations

from typing import Callable

import numpy as np


def _sq(x: np.ndarray) -> np.ndarray:
    return np.sum(x * x, axis=1)


def runge(x):
    return 1.0 / (1.0 + 25.0 * _sq(x))


def perturbed_runge(x):
    return 1.0 / (1.0 + 25.0 * _sq(x)) + 0.1 * np.sin(20.0 * x[:, 0]) * np.sin(20.0 * x[:, 1])


def simple_runge(x):
    return 1.0 / (1.0 + _sq(x))


def radial_cosine(x):
    return np.cos(np.pi * _sq(x) / 2.0)


def sine_product(x):
    return np.prod(np.sin(np.pi * x), axis=1)


def gaussian_stripe(x):
    return np.exp(-4.0 * (x[:, 0] - x[:, 1]) ** 2)


# name -> (callable, allowed dimensions or None for any)
FUNCTIONS: dict = {
    "runge": (runge, None),
    "perturbed-runge": (perturbed_runge, (2,)),
    "simple-runge": (simple_runge, None),
    "radial-cosine": (radial_cosine, None),
    "sine-product": (sine_product, None),
    "gaussian-stripe": (gaussian_stripe, "m>=2"),
}


def get_function(name: str, m: int) -> Callable:
    """Look up a test function and check it is defined in dimension ``m``."""
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}; choose from {', '.join(FUNCTIONS)}")
    fn, dims = FUNCTIONS[name]
    if dims == "m>=2" and m < 2:
        raise ValueError(f"{name} needs m >= 2")
    if isinstance(dims, tuple) and m not in dims:
        raise ValueError(f"{name} is defined only for m in {dims}")

    def wrapped(x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[:, None] if m == 1 else x[None, :]
        if x.shape[1] != m:
            raise ValueError(f"{name} expects {m} coordinates, got {x.shape[1]}")
        return fn(x)

    wrapped.__name__ = name
    return wrapped
