import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fastnewton.coeffile import CoefficientFile, CoefficientFileError
from fastnewton.evaluator import Interpolant, interpolate, max_rel_error, uniform_samples
from fastnewton.functions import FUNCTIONS, get_function
from fastnewton.multiindex import lp_set
from fastnewton.transform import fnt_forward, fnt_inverse, plan

from conftest import dc_sets, rel_err


def naive_eval(P, c, x):
    """Direct basis sum over all multi-indices."""
    total = 0.0
    for coef, alpha in zip(c, P.set):
        term = coef
        for i, a in enumerate(alpha):
            term *= P.bases[i].values(np.array([x[i]]))[0, a]
        total += term
    return total


def test_eval_examples(rng):
    A = lp_set(3, 2, 2)
    P = plan(A)
    f = rng.standard_normal(len(A))
    q = Interpolant(P, fnt_forward(P, f))
    np.testing.assert_allclose(q(P.grid.points()), f, rtol=1e-12, atol=1e-12)
    e1 = np.zeros(len(A))
    e1[0] = 1
    one = Interpolant(P, e1)
    np.testing.assert_allclose(one(rng.uniform(-1, 1, (20, 3))), 1.0)
    c = rng.standard_normal(len(A))
    qc = Interpolant(P, c)
    for x in rng.uniform(-1, 1, (10, 3)):
        assert qc.eval_point(x) == pytest.approx(naive_eval(P, c, x), rel=1e-12, abs=1e-12)


def test_eval_dimension_checks():
    P = plan(lp_set(2, 2, 1))
    q = Interpolant(P, np.zeros(P.size))
    with pytest.raises(ValueError):
        q.eval_point([0.1, 0.2, 0.3])
    with pytest.raises(ValueError):
        q(np.zeros((4, 3)))
    with pytest.raises(ValueError):
        Interpolant(P, np.zeros(P.size + 1))


@settings(max_examples=40, deadline=None)
@given(dc_sets(max_m=4, max_degree=5), st.sampled_from(["newton", "chebyshev"]), st.integers(0, 2**32 - 1))
def test_grid_evaluation_reproduces_inverse(A, kind, seed):
    rng = np.random.default_rng(seed)
    P = plan(A, kind=kind)
    c = rng.standard_normal(len(A))
    q = Interpolant(P, c)
    assert rel_err(q(P.grid.points()), fnt_inverse(P, c)) <= 1e-11
    x = rng.uniform(-1, 1, A.m)
    assert q.eval_point(x) == pytest.approx(naive_eval(P, c, x), rel=1e-11, abs=1e-11 * np.abs(c).sum())


@settings(max_examples=30, deadline=None)
@given(dc_sets(max_m=4, max_degree=5), st.integers(0, 2**32 - 1))
def test_polynomial_reproduction(A, seed):
    rng = np.random.default_rng(seed)
    P = plan(A)
    c = rng.standard_normal(len(A))
    q = Interpolant(P, c)
    back = interpolate(P, q)
    assert rel_err(back.coeffs, c) <= 1e-11
    samples = uniform_samples(A.m, 200, seed)
    assert max_rel_error(back, q, samples) <= 1e-12 * max(1.0, np.abs(c).sum())


def test_max_rel_error_examples():
    P = plan(lp_set(2, 3, 2))
    zero = Interpolant(P, np.zeros(P.size))
    assert max_rel_error(zero, lambda x: np.zeros(len(x)), uniform_samples(2, 50, 0)) == 0.0
    with pytest.raises(ValueError):
        max_rel_error(zero, lambda x: np.zeros(len(x)), np.zeros((0, 2)))


def test_runge_1d_high_degree():
    f = get_function("runge", 1)
    P = plan(lp_set(1, 200, 2))
    assert max_rel_error(interpolate(P, f), f, uniform_samples(1, 10**5, 0)) <= 1e-12


def test_derivative_interpolant(rng):
    P = plan(lp_set(2, 6, 2), kind="chebyshev")
    c = rng.standard_normal(P.size)
    q = Interpolant(P, c)
    dq = q.derivative(2)
    x = rng.uniform(-0.9, 0.9, (30, 2))
    h = 1e-6
    fd = (q(x + [0, h]) - q(x - [0, h])) / (2 * h)
    np.testing.assert_allclose(dq(x), fd, atol=1e-6 * np.abs(fd).max())


def test_uniform_samples_deterministic():
    a = uniform_samples(3, 100, 7)
    assert np.array_equal(a, uniform_samples(3, 100, 7))
    assert not np.array_equal(a, uniform_samples(3, 100, 8))
    assert a.min() >= -1 and a.max() <= 1


# ---------------------------------------------------------------------------
# test functions


def test_function_formulas():
    x = np.array([[0.3, -0.4]])
    r2 = 0.25
    assert get_function("runge", 2)(x)[0] == pytest.approx(1 / (1 + 25 * r2))
    assert get_function("simple-runge", 2)(x)[0] == pytest.approx(1 / (1 + r2))
    assert get_function("radial-cosine", 2)(x)[0] == pytest.approx(math.cos(math.pi * r2 / 2))
    assert get_function("sine-product", 2)(x)[0] == pytest.approx(math.sin(0.3 * math.pi) * math.sin(-0.4 * math.pi))
    assert get_function("gaussian-stripe", 2)(x)[0] == pytest.approx(math.exp(-4 * 0.49))
    pr = 1 / (1 + 25 * r2) + 0.1 * math.sin(6) * math.sin(-8)
    assert get_function("perturbed-runge", 2)(x)[0] == pytest.approx(pr)


def test_function_dimension_rules():
    with pytest.raises(ValueError):
        get_function("perturbed-runge", 3)
    with pytest.raises(ValueError):
        get_function("gaussian-stripe", 1)
    with pytest.raises(ValueError):
        get_function("nope", 2)
    for name in FUNCTIONS:
        m = 2
        vals = get_function(name, m)(uniform_samples(m, 100, 1))
        assert np.all(np.isfinite(vals)) and np.all(np.abs(vals) <= 2)


# ---------------------------------------------------------------------------
# coefficient files


@pytest.mark.parametrize("kind", ["newton", "chebyshev"])
def test_coefficient_file_roundtrip(kind, rng, tmp_path):
    P = plan(lp_set(3, 4, 1.5), kind=kind)
    c = rng.standard_normal(P.size)
    cf = CoefficientFile.from_plan(P, c)
    path = tmp_path / "c.fnt"
    cf.save(path)
    back = CoefficientFile.load(path)
    assert back.to_bytes() == cf.to_bytes()
    assert back.kind == kind and back.tubes == P.T
    assert back.coeffs.tobytes() == np.asarray(c, dtype="<f8").tobytes()
    for a, b in zip(back.axes, P.grid.axes):
        assert np.array_equal(a, b.values)
    P2 = back.to_plan()
    assert P2.set == P.set
    np.testing.assert_array_equal(fnt_inverse(P2, back.coeffs), fnt_inverse(P, c))


def test_coefficient_file_rejects_garbage(rng):
    P = plan(lp_set(2, 2, 1))
    data = CoefficientFile.from_plan(P, np.zeros(P.size)).to_bytes()
    with pytest.raises(CoefficientFileError):
        CoefficientFile.from_bytes(b"XXXX" + data[4:])
    with pytest.raises(CoefficientFileError):
        CoefficientFile.from_bytes(data[:-3])
    with pytest.raises(CoefficientFileError):
        CoefficientFile.from_bytes(data + b"\0")
    with pytest.raises(CoefficientFileError):
        CoefficientFile("newton", tuple(ax.values for ax in P.grid.axes), P.T, np.zeros(P.size + 1))
