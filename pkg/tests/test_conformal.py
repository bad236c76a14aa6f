"""Conformal change of metric, the quadruple flatness identity, and the
Q-tensor identities for proper holonomic immersions."""
import numpy as np
import pytest

from confflat.conformal import (conformal_change, conformal_flatness_test,
                                immersion_curvature_provider, lemma_q_suite)
from confflat.jets import ChartDomain, SmoothMap, cos, exp, norm_sq, sin

from conftest import interior_points

DOM = ChartDomain(4, ((-0.7, 0.7),) * 4)

# three unrelated conformal exponents on the same chart
FACTORS = [
    SmoothMap(DOM, 1, lambda x: [x[0] - 0.5 * x[1]], "linear"),
    SmoothMap(DOM, 1, lambda x: [sin(x[0]) * cos(x[2]) * 0.3], "wavy"),
    SmoothMap(DOM, 1, lambda x: [exp(-norm_sq(x) * 0.25)], "bump"),
]


@pytest.mark.parametrize("omega", FACTORS, ids=lambda m: m.name)
def test_conformal_curvature_crosscheck(omega, rng):
    """Curvature of e^{2w} delta assembled through the Q formula agrees with
    direct differentiation of the conformal metric."""
    for pt in rng.uniform(-0.5, 0.5, size=(3, 4)):
        res = conformal_change(omega, pt)
        assert res.crosscheck_residual < 1e-7
        assert np.allclose(res.r_star, res.r_star_direct, atol=1e-7)


def test_flatness_identity_positive(catalog):
    for name in ("s3xs1", "s2xpseudosphere", "cone_t3", "example2"):
        item = catalog[name]
        pts = interior_points(item, 4)
        provider = immersion_curvature_provider(item.smooth_map, item.ambient)
        assert conformal_flatness_test(provider, pts, trials=30) < 1e-6


def test_flatness_identity_negative_control(catalog):
    item = catalog["s2xs2_control"]
    pts = interior_points(item, 4)
    provider = immersion_curvature_provider(item.smooth_map, item.ambient)
    assert conformal_flatness_test(provider, pts, trials=30) > 0.05


def test_flatness_identity_on_conformal_metrics(rng):
    """The identity holds for any metric conformal to a flat one, whatever
    the factor."""
    for omega in FACTORS:
        def provider(pt, omega=omega):
            res = conformal_change(omega, pt)

            class Pack:
                riemann = res.r_star_direct
                n = 4

                @staticmethod
                def sectional(X, Y):
                    # r_star indices: R(d_i, d_j) d_k = r[l, i, j, k] d_l,
                    # lowered with the conformal metric
                    e2 = np.exp(2.0 * float(omega.value(pt)[0]))
                    low = np.einsum("lijk->ijkl", res.r_star_direct) * e2
                    num = np.einsum("ijkl,i,j,k,l->", low, X, Y, Y, X)
                    gX = e2 * X @ X
                    gY = e2 * Y @ Y
                    gXY = e2 * X @ Y
                    return num / (gX * gY - gXY ** 2)
            return Pack
        pts = rng.uniform(-0.5, 0.5, size=(3, 4))
        assert conformal_flatness_test(provider, pts, trials=20) < 1e-6


def test_q_suite(catalog):
    for name in ("s3xs1", "cone_t3", "cylinder_r1xs3"):
        item = catalog[name]
        pts = interior_points(item, 4)
        rep = lemma_q_suite(item.smooth_map, item.ambient, item.conformal, pts)
        assert rep.offblock_residual < 1e-7
        assert rep.duality_residual < 1e-7
        if rep.high_mult_residual is not None:
            assert rep.high_mult_residual < 1e-7
