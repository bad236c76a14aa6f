"""Catalog integrity: every item evaluates cleanly, metadata is coherent,
and the constructed inputs satisfy the constraints they advertise."""
import numpy as np
import pytest

from confflat.catalog import (SphericalCircle, WobblySphericalCurve,
                              default_catalog, space_form_exp,
                              validate_unit_speed)
from confflat import ambient as amb_mod
from confflat.jets import evaluate_jet, finite_difference_jet

from conftest import interior_points


def test_catalog_names_consistent(catalog):
    for name, item in catalog.items():
        assert item.name == name
        assert item.smooth_map.codomain_dim == item.ambient.flat_dim
        assert "k" in item.expected and "multiplicities" in item.expected
        assert sum(item.expected["multiplicities"]) == item.smooth_map.domain.dim


def test_all_items_evaluate(catalog):
    for item in catalog.values():
        for pt in interior_points(item, 2):
            j = evaluate_jet(item.smooth_map, pt)
            assert np.all(np.isfinite(j.value))
            # immersion: the differential has full rank
            s = np.linalg.svd(j.d1, compute_uv=False)
            assert s[-1] > 1e-6


def test_jets_against_fd_oracle(catalog):
    """Spot check the analytic jets of every catalog evaluator against
    central differences."""
    for item in catalog.values():
        pt = interior_points(item, 1, seed=5)[0]
        exact = evaluate_jet(item.smooth_map, pt)
        approx = finite_difference_jet(item.smooth_map, pt, h=1e-3)
        assert np.allclose(exact.d1, approx.d1, atol=1e-5)
        assert np.allclose(exact.d2, approx.d2, atol=1e-4)


def test_space_form_exp_stays_on_quadric(rng):
    amb = amb_mod.sphere_form(3, 1.0)
    p = np.array([1.0, 0.0, 0.0, 0.0])
    for _ in range(5):
        v = rng.standard_normal(4)
        v -= (v @ p) * p
        q = np.array(space_form_exp(amb, list(p), list(v)))
        assert amb.quadric_defect(q) < 1e-12


def test_unit_speed_curves():
    box = (0.1, 2.0)
    validate_unit_speed(SphericalCircle(0.8, 1.1), box)
    validate_unit_speed(WobblySphericalCurve(0.8, 1.2, 0.2, 1.5), box)


def test_unit_speed_rejects_bad_curve():
    from confflat.errors import CurveError

    class Bad:
        def value(self, t):
            return [t, t * t, 0.0 * t]

        def deriv(self, t):
            return [1.0 + 0.0 * t, 2.0 * t, 0.0 * t]

    with pytest.raises(CurveError):
        validate_unit_speed(Bad(), (0.1, 1.0))


def test_liftable_items_have_valid_conformal(catalog):
    for name in ("s3xs1", "cone_t3", "cylinder_r1xs3"):
        item = catalog[name]
        pts = interior_points(item, 3)
        assert item.conformal.metric_residual(
            item.smooth_map, item.ambient, pts) < 1e-8
