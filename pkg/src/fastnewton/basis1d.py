"""Per-axis basis matrices for Newton and Chebyshev bases.

For nodes ``p_0..p_n`` and basis polynomials ``Q_0..Q_n``:

* ``V[j, k] = Q_k(p_j)``   (values of the basis at the nodes)
* ``D[j, k] = Q_k'(p_j)``  (values of the basis derivatives at the nodes)
* ``Dc``                   maps coefficients of ``q`` to coefficients of ``q'``

so that ``D = V @ Dc``. Newton uses ``Q_k(x) = prod_{l<k} (x - p_l)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .nodes import AxisNodes

KINDS = ("newton", "chebyshev")


class FactorizationError(ArithmeticError):
    pass


def _values(nodes) -> np.ndarray:
    x = nodes.values if isinstance(nodes, AxisNodes) else np.asarray(nodes, dtype=float)
    if np.unique(x).size != x.size:
        raise ValueError("nodes must be pairwise distinct")
    return x


# ---------------------------------------------------------------------------
# basis evaluation at arbitrary points


def newton_basis(nodes, x, degree: int | None = None) -> np.ndarray:
    """``out[..., k] = prod_{l<k} (x - p_l)`` for ``k = 0..degree``."""
    p = np.asarray(nodes.values if isinstance(nodes, AxisNodes) else nodes, dtype=float)
    degree = p.size - 1 if degree is None else degree
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (degree + 1,))
    out[..., 0] = 1.0
    for k in range(1, degree + 1):
        out[..., k] = out[..., k - 1] * (x - p[k - 1])
    return out


def newton_basis_derivative(nodes, x, degree: int | None = None) -> np.ndarray:
    p = np.asarray(nodes.values if isinstance(nodes, AxisNodes) else nodes, dtype=float)
    degree = p.size - 1 if degree is None else degree
    x = np.asarray(x, dtype=float)
    q = newton_basis(p, x, degree)
    out = np.zeros_like(q)
    for k in range(1, degree + 1):
        out[..., k] = q[..., k - 1] + (x - p[k - 1]) * out[..., k - 1]
    return out


def chebyshev_basis(x, degree: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape + (degree + 1,))
    out[..., 0] = 1.0
    if degree >= 1:
        out[..., 1] = x
    for k in range(2, degree + 1):
        out[..., k] = 2 * x * out[..., k - 1] - out[..., k - 2]
    return out


def chebyshev_basis_derivative(x, degree: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    t = chebyshev_basis(x, degree)
    out = np.zeros_like(t)
    if degree >= 1:
        out[..., 1] = 1.0
    for k in range(2, degree + 1):
        out[..., k] = 2 * t[..., k - 1] + 2 * x * out[..., k - 1] - out[..., k - 2]
    return out


def basis_values(kind: str, nodes, x, degree: int | None = None) -> np.ndarray:
    if kind == "newton":
        return newton_basis(nodes, x, degree)
    if kind == "chebyshev":
        n = (len(nodes) - 1) if degree is None else degree
        return chebyshev_basis(x, n)
    raise ValueError(f"unknown basis kind {kind!r}")


# ---------------------------------------------------------------------------
# Newton matrices


def newton_vandermonde(nodes) -> np.ndarray:
    p = _values(nodes)
    return np.tril(newton_basis(p, p))


def newton_coefficients(nodes, values) -> np.ndarray:
    """Divided differences: the ``c`` with ``newton_vandermonde(nodes) @ c = values``."""
    p = _values(nodes)
    c = np.array(values, dtype=float)
    if c.shape != p.shape:
        raise ValueError(f"expected {p.size} values, got {c.size}")
    for k in range(1, p.size):
        c[k:] = (c[k:] - c[k - 1:-1]) / (p[k:] - p[:-k])
    return c


def newton_diff_coeff_matrix(nodes) -> np.ndarray:
    """Coefficient-space derivative of the Newton basis, strictly upper triangular.

    Row ``j`` of ``d`` expands ``Q_j'`` in ``Q_0..Q_{j-1}``:
    ``d[j, l] = d[j-1, l-1] + (p_l - p_{j-1}) d[j-1, l] + [l == j-1]``.
    The returned matrix is ``d.T``.
    """
    p = _values(nodes)
    n = p.size
    d = np.zeros((n, n))
    for j in range(1, n):
        d[j, j - 1] = j
        for l in range(j - 1):
            d[j, l] = (p[l] - p[j - 1]) * d[j - 1, l] + (d[j - 1, l - 1] if l > 0 else 0.0)
    return d.T.copy()


def newton_diff_matrix(nodes) -> np.ndarray:
    """``D[j, l] = Q_l'(p_j)``."""
    p = _values(nodes)
    return newton_basis_derivative(p, p)


# ---------------------------------------------------------------------------
# Chebyshev matrices


def chebyshev_vandermonde(nodes) -> np.ndarray:
    p = _values(nodes)
    return chebyshev_basis(p, p.size - 1)


def chebyshev_diff_matrix(nodes) -> np.ndarray:
    p = _values(nodes)
    return chebyshev_basis_derivative(p, p.size - 1)


def chebyshev_diff_coeff_matrix(n: int) -> np.ndarray:
    """``T_l' = sum_{k<l, l-k odd} 2 l / (1 + [k == 0]) T_k`` as a matrix."""
    dc = np.zeros((n + 1, n + 1))
    for l in range(1, n + 1):
        for k in range(l - 1, -1, -2):
            dc[k, l] = 2 * l if k else l
    return dc


# ---------------------------------------------------------------------------
# factorizations and block solves


def lu_factorize(V: np.ndarray) -> tuple:
    """Doolittle LU without pivoting: ``V = L @ U`` with unit-diagonal ``L``.

    Pivoting is not an option here: the selection identities need the
    factors of the original node order.
    """
    V = np.asarray(V, dtype=float)
    n = V.shape[0]
    if V.shape != (n, n):
        raise ValueError("matrix must be square")
    L = np.eye(n)
    U = np.zeros((n, n))
    for k in range(n):
        U[k, k:] = V[k, k:] - L[k, :k] @ U[:k, k:]
        if U[k, k] == 0.0:
            raise FactorizationError(
                f"zero pivot at position {k}; reorder the nodes (e.g. Leja ordering) so that all "
                "leading principal minors are non-zero"
            )
        L[k + 1:, k] = (V[k + 1:, k] - L[k + 1:, :k] @ U[:k, k]) / U[k, k]
    return L, U


def _is_lower(T: np.ndarray) -> bool:
    return not np.any(np.triu(T, 1))


def tri_block_solve(T: np.ndarray, r: int, x, lower: bool | None = None) -> np.ndarray:
    """Solve with the leading ``r x r`` block of a triangular matrix."""
    T = np.asarray(T, dtype=float)
    if not 1 <= r <= T.shape[0]:
        raise ValueError(f"block size {r} out of range 1..{T.shape[0]}")
    x = np.asarray(x, dtype=float)
    if x.shape[0] != r:
        raise ValueError(f"right-hand side has length {x.shape[0]}, expected {r}")
    if lower is None:
        lower = _is_lower(T)
    block = T[:r, :r]
    if np.any(np.diag(block) == 0.0):
        raise ZeroDivisionError("zero diagonal entry in triangular block")
    return solve_triangular(block, x, lower=lower, check_finite=False)


# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class AxisBasis:
    kind: str
    nodes: AxisNodes
    V: np.ndarray
    D: np.ndarray
    Dc: np.ndarray
    L: np.ndarray
    U: np.ndarray

    @property
    def size(self) -> int:
        return self.V.shape[0]

    def values(self, x) -> np.ndarray:
        return basis_values(self.kind, self.nodes, x, self.size - 1)


def axis_basis(kind: str, nodes: AxisNodes) -> AxisBasis:
    if kind == "newton":
        V = newton_vandermonde(nodes)
        D = newton_diff_matrix(nodes)
        Dc = newton_diff_coeff_matrix(nodes)
        # triangular input: Doolittle reduces to column scaling
        U = np.diag(np.diag(V))
        L = V / np.diag(V)[None, :]
    elif kind == "chebyshev":
        V = chebyshev_vandermonde(nodes)
        D = chebyshev_diff_matrix(nodes)
        Dc = chebyshev_diff_coeff_matrix(len(nodes) - 1)
        L, U = lu_factorize(V)
    else:
        raise ValueError(f"unknown basis kind {kind!r}; expected one of {KINDS}")
    for a in (V, D, Dc, L, U):
        a.setflags(write=False)
    return AxisBasis(kind, nodes, V, D, Dc, L, U)
