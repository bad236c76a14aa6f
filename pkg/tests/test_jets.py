"""Jet arithmetic against the central-difference oracle and algebraic
identities that exact derivatives must satisfy."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from confflat.jets import (ChartDomain, Jet, SmoothMap, cos, cosh, dot,
                           evaluate_jet, exp, finite_difference_jet, log,
                           norm_sq, sin, sinh, sqrt, variable)

finite = st.floats(-2.0, 2.0, allow_nan=False)
positive = st.floats(0.2, 2.0, allow_nan=False)


def seed_jets(values):
    n = len(values)
    return [variable(v, i, n) for i, v in enumerate(values)]


def jets_close(a, b, tol=1e-10):
    scale = max(1.0, abs(a.v), abs(b.v))
    assert abs(a.v - b.v) <= tol * scale
    assert np.allclose(a.g, b.g, atol=tol * scale)
    assert np.allclose(a.h, b.h, atol=tol * scale)
    assert np.allclose(a.t, b.t, atol=tol * scale)


@given(finite, finite, finite)
def test_product_rule_symmetry(x, y, z):
    a, b, c = seed_jets([x, y, z])
    jets_close((a * b) * c, a * (b * c))
    jets_close(a * b, b * a)


@given(finite, finite)
def test_distributivity(x, y):
    a, b = seed_jets([x, y])
    jets_close(a * (a + b), a * a + a * b)


@given(positive, finite)
def test_exp_log_roundtrip(x, y):
    a, _ = seed_jets([x, y])
    jets_close(log(exp(a)), a, tol=1e-9)
    jets_close(exp(log(a)), a, tol=1e-9)


@given(finite, finite)
def test_pythagorean_identity(x, y):
    a, b = seed_jets([x, y])
    one = sin(a + b) * sin(a + b) + cos(a + b) * cos(a + b)
    jets_close(one, Jet.constant(1.0, 2), tol=1e-9)


@given(finite)
def test_hyperbolic_identity(x):
    a = variable(x, 0, 1)
    jets_close(cosh(a) * cosh(a) - sinh(a) * sinh(a),
               Jet.constant(1.0, 1), tol=1e-8)


@given(positive)
def test_sqrt_squares(x):
    a = variable(x, 0, 1)
    jets_close(sqrt(a) * sqrt(a), a, tol=1e-9)


@given(st.lists(finite, min_size=2, max_size=4))
def test_quotient_of_self_is_one(vals):
    js = seed_jets(vals)
    denom = norm_sq(js) + 1.0
    jets_close(denom / denom, Jet.constant(1.0, len(vals)), tol=1e-9)


@settings(deadline=None, max_examples=25)
@given(st.floats(-0.6, 0.6), st.floats(-0.6, 0.6))
def test_jets_match_finite_differences(u, v):
    dom = ChartDomain(2, ((-1.0, 1.0), (-1.0, 1.0)))

    def evaluator(x):
        return [sin(x[0]) * cosh(x[1]),
                exp(0.5 * x[0] - x[1]),
                dot(x, x) + cos(x[0] * x[1])]

    m = SmoothMap(dom, 3, evaluator, "mixed")
    pt = np.array([u, v])
    exact = evaluate_jet(m, pt)
    approx = finite_difference_jet(m, pt, h=1e-3)
    assert np.allclose(exact.value, approx.value, atol=1e-10)
    assert np.allclose(exact.d1, approx.d1, atol=1e-5)
    assert np.allclose(exact.d2, approx.d2, atol=1e-4)
    assert np.allclose(exact.d3, approx.d3, atol=2e-2)


def test_second_and_third_derivatives_symmetric():
    dom = ChartDomain(3, ((-1.0, 1.0),) * 3)
    m = SmoothMap(dom, 1, lambda x: [exp(x[0]) * sin(x[1] * x[2])], "sym")
    j = evaluate_jet(m, np.array([0.3, -0.2, 0.5]))
    assert np.allclose(j.d2, np.transpose(j.d2, (1, 0, 2)))
    for perm in ((1, 0, 2, 3), (0, 2, 1, 3), (2, 1, 0, 3)):
        assert np.allclose(j.d3, np.transpose(j.d3, perm))


def test_domain_guard():
    from confflat.errors import DomainError
    dom = ChartDomain(1, ((0.0, 1.0),))
    m = SmoothMap(dom, 1, lambda x: [x[0]], "id")
    with pytest.raises(DomainError):
        evaluate_jet(m, np.array([2.0]))


def test_backend_agreement():
    """The compiled and the numpy Taylor kernels produce identical jets."""
    from confflat.jets import _taylor_cy, _taylor_py
    rng = np.random.default_rng(3)
    for _ in range(20):
        n = int(rng.integers(1, 5))
        args = [rng.standard_normal(), rng.standard_normal(n),
                rng.standard_normal((n, n)), rng.standard_normal((n, n, n))]
        brgs = [rng.standard_normal(), rng.standard_normal(n),
                rng.standard_normal((n, n)), rng.standard_normal((n, n, n))]
        coeffs = rng.standard_normal(4)
        def compare(out_cy, out_py):
            for a, b in zip(out_cy, out_py):
                if a is None or b is None:
                    assert a is None and b is None
                else:
                    assert np.allclose(a, b, atol=1e-13)

        for order in (1, 2, 3):
            compare(_taylor_cy.mul(order, *args, *brgs),
                    _taylor_py.mul(order, *args, *brgs))
            compare(_taylor_cy.compose(order, *args, *coeffs),
                    _taylor_py.compose(order, *args, *coeffs))
