import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from fastnewton.basis1d import (
    FactorizationError,
    axis_basis,
    chebyshev_diff_coeff_matrix,
    chebyshev_diff_matrix,
    chebyshev_vandermonde,
    lu_factorize,
    newton_basis,
    newton_coefficients,
    newton_diff_coeff_matrix,
    newton_diff_matrix,
    newton_vandermonde,
    tri_block_solve,
)
from fastnewton.nodes import AxisNodes, leja_chebyshev_lobatto

EPS = np.finfo(float).eps


def sym_newton(nodes):
    x = sp.Symbol("x")
    polys = [sp.Integer(1)]
    for p in nodes[:-1]:
        polys.append(sp.expand(polys[-1] * (x - sp.nsimplify(p))))
    return x, polys


def test_newton_vandermonde_examples():
    np.testing.assert_array_equal(newton_vandermonde([1.0, -1.0]), [[1, 0], [1, -2]])
    np.testing.assert_array_equal(newton_vandermonde([1.0, -1.0, 0.0]), [[1, 0, 0], [1, -2, 0], [1, -1, -1]])
    np.testing.assert_array_equal(newton_vandermonde([0.3]), [[1.0]])
    with pytest.raises(ValueError):
        newton_vandermonde([0.0, 0.0])


@pytest.mark.parametrize("n", [1, 5, 12])
def test_newton_vandermonde_degree_graded(n):
    p = leja_chebyshev_lobatto(n).values
    V = newton_vandermonde(p)
    assert np.all(np.triu(V, 1) == 0)
    assert np.all(V[:, 0] == 1)
    assert np.all(np.diag(V) != 0)
    full = newton_basis(p, p)
    for k in range(n + 1):
        assert np.all(full[:k, k] == 0)


def test_newton_coefficients_examples(rng):
    np.testing.assert_allclose(newton_coefficients([1.0, -1.0, 0.5], [2.0, 2.0, 2.0]), [2, 0, 0])
    np.testing.assert_allclose(newton_coefficients([1.0, -1.0], [1.0, -1.0]), [1, 1])
    p = rng.uniform(-1, 1, 6)
    f = rng.standard_normal(6)
    V = newton_vandermonde(p)
    np.testing.assert_allclose(newton_coefficients(p, f), np.linalg.solve(V, f), rtol=1e-10, atol=1e-10)


def test_newton_diff_matrix_examples():
    np.testing.assert_array_equal(newton_diff_matrix([1.0, -1.0]), [[0, 1], [0, 1]])
    D = newton_diff_matrix([1.0, -1.0, 0.0])
    np.testing.assert_array_equal(D[:, 2], [2, -2, 0])
    np.testing.assert_array_equal(D[:, 0], 0)


@pytest.mark.parametrize("n", [1, 2, 4, 7, 10])
def test_newton_matrices_match_symbolic(n):
    p = leja_chebyshev_lobatto(n).values
    x, polys = sym_newton(p)
    D_sym = np.array([[float(sp.diff(q, x).subs(x, sp.nsimplify(pj))) for q in polys] for pj in p])
    np.testing.assert_allclose(newton_diff_matrix(p), D_sym, atol=1e-12)
    # coefficient-space derivative: Q_k' expanded in Q_0..Q_{k-1}
    Dc = newton_diff_coeff_matrix(p)
    assert np.all(np.tril(Dc) == 0)
    for k, q in enumerate(polys):
        recon = sum(sp.nsimplify(Dc[l, k]) * polys[l] for l in range(n + 1))
        diff = sp.Poly(sp.expand(recon - sp.diff(q, x)), x)
        assert max((abs(float(c)) for c in diff.all_coeffs()), default=0.0) < 1e-10
    np.testing.assert_allclose(newton_vandermonde(p) @ Dc, newton_diff_matrix(p), atol=1e-12)


@pytest.mark.parametrize("n", [1, 3, 8])
def test_chebyshev_matrices_match_symbolic(n):
    p = leja_chebyshev_lobatto(n).values
    x = sp.Symbol("x")
    polys = [sp.chebyshevt(k, x) for k in range(n + 1)]
    V_sym = np.array([[float(q.subs(x, pj)) for q in polys] for pj in p])
    D_sym = np.array([[float(sp.diff(q, x).subs(x, pj)) for q in polys] for pj in p])
    np.testing.assert_allclose(chebyshev_vandermonde(p), V_sym, atol=1e-12)
    np.testing.assert_allclose(chebyshev_diff_matrix(p), D_sym, atol=1e-11)
    np.testing.assert_allclose(chebyshev_vandermonde(p) @ chebyshev_diff_coeff_matrix(n), D_sym, atol=1e-11)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 20), st.integers(0, 2**32 - 1), st.sampled_from(["newton", "chebyshev"]))
def test_diff_matrix_against_finite_differences(n, seed, kind):
    rng = np.random.default_rng(seed)
    basis = axis_basis(kind, leja_chebyshev_lobatto(n))
    c = rng.standard_normal(n + 1)
    h = 1e-5
    p = basis.nodes.values
    fd = (basis.values(p + h) @ c - basis.values(p - h) @ c) / (2 * h)
    np.testing.assert_allclose(basis.D @ c, fd, atol=1e-6 * max(1.0, np.abs(fd).max()))


def test_lu_factorize_examples():
    V = newton_vandermonde([1.0, -1.0, 0.0])
    L, U = lu_factorize(V)
    np.testing.assert_allclose(U, np.diag(np.diag(V)))
    np.testing.assert_allclose(L, V / np.diag(V))
    L, U = lu_factorize(np.array([[1.0, 1.0], [1.0, -1.0]]))
    np.testing.assert_array_equal(L, [[1, 0], [1, 1]])
    np.testing.assert_array_equal(U, [[1, 1], [0, -2]])
    L, U = lu_factorize(np.eye(4))
    np.testing.assert_array_equal(L, np.eye(4))
    np.testing.assert_array_equal(U, np.eye(4))


def test_lu_zero_pivot_error():
    with pytest.raises(FactorizationError, match="reorder"):
        lu_factorize(np.array([[0.0, 1.0], [1.0, 0.0]]))


@pytest.mark.parametrize("n", [2, 10, 31])
def test_lu_reproduces_chebyshev_vandermonde(n):
    V = chebyshev_vandermonde(leja_chebyshev_lobatto(n))
    L, U = lu_factorize(V)
    assert np.all(np.triu(L, 1) == 0) and np.all(np.diag(L) == 1)
    assert np.all(np.tril(U, -1) == 0)
    assert np.max(np.abs(L @ U - V)) <= 4 * (n + 1) * EPS * np.max(np.abs(V))


def test_axis_basis_newton_factors():
    b = axis_basis("newton", leja_chebyshev_lobatto(6))
    np.testing.assert_allclose(b.L @ b.U, b.V, atol=4 * EPS * np.abs(b.V).max())
    with pytest.raises(ValueError):
        axis_basis("legendre", leja_chebyshev_lobatto(2))


def test_tri_block_solve_examples(rng):
    T = np.tril(rng.standard_normal((5, 5))) + 5 * np.eye(5)
    y = rng.standard_normal(5)
    np.testing.assert_allclose(tri_block_solve(T, 5, T @ y), y)
    np.testing.assert_allclose(tri_block_solve(T, 1, [3.0]), [3.0 / T[0, 0]])
    x = rng.standard_normal(3)
    np.testing.assert_allclose(tri_block_solve(T, 3, x), np.linalg.solve(T[:3, :3], x))
    Up = T.T.copy()
    np.testing.assert_allclose(tri_block_solve(Up, 3, x), np.linalg.solve(Up[:3, :3], x))
    Z = T.copy()
    Z[1, 1] = 0.0
    with pytest.raises(ZeroDivisionError):
        tri_block_solve(Z, 3, x)
    with pytest.raises(ValueError):
        tri_block_solve(T, 6, rng.standard_normal(6))


@pytest.mark.parametrize("n", [4, 16, 32])
def test_selection_inversion_identity(n):
    # inverse of a leading block equals the leading block of the inverse
    for kind in ("newton", "chebyshev"):
        b = axis_basis(kind, leja_chebyshev_lobatto(n))
        for M, lower in ((b.L, True), (b.U, False)):
            Minv = np.linalg.inv(M)
            for r in range(1, n + 2):
                block_inv = np.linalg.inv(M[:r, :r])
                err = np.max(np.abs(block_inv - Minv[:r, :r])) / np.max(np.abs(Minv[:r, :r]))
                assert err <= 1e-12


def test_custom_nodes_accepted():
    b = axis_basis("newton", AxisNodes([0.2, -0.7, 0.9]))
    assert b.size == 3
