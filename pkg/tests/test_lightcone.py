"""Light-cone model of flat space, flat lifts, and the projection back."""
import numpy as np
import pytest

from confflat.errors import ConformalStructureError, ModelMembershipError
from confflat.lightcone import (build_cone_model, flat_lift,
                                lift_correspondence_check,
                                lift_second_fundamental_form, project_from_cone,
                                psi_embed, psi_invert,
                                psi_second_fundamental_residual)

from conftest import interior_points

LIFTABLE = ["s3xs1", "cone_t3", "cylinder_r1xs3"]


def test_model_vectors():
    model = build_cone_model(4)
    assert abs(model.inner(model.v, model.v)) < 1e-14
    assert abs(model.inner(model.w, model.w)) < 1e-14
    assert abs(model.inner(model.v, model.w) - 1.0) < 1e-14
    gram = model.A.T @ np.diag(model.form.signature) @ model.A
    assert np.allclose(gram, np.eye(4), atol=1e-14)


def test_embed_invert_roundtrip(rng):
    model = build_cone_model(5)
    for x in rng.uniform(-2.0, 2.0, size=(10, 5)):
        V = psi_embed(model, x)
        assert abs(model.inner(V, V)) < 1e-12 * max(1.0, V @ V)
        assert np.allclose(psi_invert(model, V), x, atol=1e-12)


def test_invert_rejects_off_cone(rng):
    model = build_cone_model(3)
    V = psi_embed(model, np.array([0.3, -0.2, 0.9]))
    with pytest.raises(ModelMembershipError):
        psi_invert(model, V + 0.01 * model.w)


def test_model_totally_geodesic(rng):
    model = build_cone_model(4)
    pts = rng.uniform(-1.0, 1.0, size=(4, 4))
    assert psi_second_fundamental_residual(model, pts) < 1e-10


@pytest.mark.parametrize("name", LIFTABLE)
def test_flat_lift_is_on_cone(catalog, name):
    item = catalog[name]
    model = build_cone_model(item.smooth_map.codomain_dim)
    pts = interior_points(item, 4)
    lift = flat_lift(item.smooth_map, item.conformal, model, check_points=pts)
    for pt in pts:
        F = lift.F.value(pt)
        assert abs(model.inner(F, F)) < 1e-10 * max(1.0, F @ F)


@pytest.mark.parametrize("name", LIFTABLE)
def test_lift_is_isometric_to_flat_chart(catalog, name):
    """The lift induces exactly the metric of the flat representative."""
    item = catalog[name]
    model = build_cone_model(item.smooth_map.codomain_dim)
    lift = flat_lift(item.smooth_map, item.conformal, model)
    sig = model.form.signature
    for pt in interior_points(item, 3):
        jF = lift.F.jet(pt, order=1)
        jx = item.conformal.flat_chart.jet(pt, order=1)
        gF = np.einsum("iA,A,jA->ij", jF.d1, sig, jF.d1)
        gx = jx.d1 @ jx.d1.T
        assert np.allclose(gF, gx, atol=1e-9 * max(1.0, np.max(np.abs(gx))))


def test_lift_second_fundamental_closed_form(catalog):
    item = catalog["s3xs1"]
    model = build_cone_model(6)
    lift = flat_lift(item.smooth_map, item.conformal, model)
    for pt in interior_points(item, 3):
        _, resid = lift_second_fundamental_form(lift, pt)
        assert resid < 1e-7


@pytest.mark.parametrize("name", LIFTABLE)
def test_projection_roundtrip(catalog, name):
    item = catalog[name]
    model = build_cone_model(item.smooth_map.codomain_dim)
    lift = flat_lift(item.smooth_map, item.conformal, model)
    pts = interior_points(item, 4)
    proj = project_from_cone(lift.F, model, points=pts)
    for pt in pts:
        assert np.allclose(proj.f.value(pt), item.smooth_map.value(pt),
                           atol=1e-9)
        w_back = proj.omega.value(pt)[0]
        w_orig = item.conformal.omega.value(pt)[0]
        assert abs(w_back - w_orig) < 1e-9


def test_lift_correspondence(catalog):
    item = catalog["s3xs1"]
    model = build_cone_model(6)
    pts = interior_points(item, 4)
    rep = lift_correspondence_check(item.smooth_map, item.conformal, model, pts)
    assert rep.applicable
    assert rep.offdiag_F < 1e-7
    assert rep.k_F == rep.k_f
    assert rep.multiplicities_match
    assert rep.lemma_residual < 1e-7


def test_flat_lift_rejects_wrong_factor(catalog):
    """A conformal exponent that does not match the induced metric must be
    refused when check points are supplied."""
    from confflat.conformal import ConformalStructure
    from confflat.jets import SmoothMap
    item = catalog["s3xs1"]
    bad_omega = SmoothMap(item.smooth_map.domain, 1,
                          lambda x: [0.7 * x[0]], "wrong")
    bad = ConformalStructure(bad_omega, item.conformal.flat_chart)
    model = build_cone_model(6)
    with pytest.raises(ConformalStructureError):
        flat_lift(item.smooth_map, bad, model,
                  check_points=interior_points(item, 3))
