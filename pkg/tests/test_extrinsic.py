"""Pointwise extrinsic data: Gauss equation, frame orthonormality, flat
normal bundle detection, and the intrinsic curvature cross-checks."""
import numpy as np
import pytest

from confflat import ambient as amb_mod
from confflat.extrinsic import (fundamental_forms, intrinsic_curvatures,
                                normal_connection_and_curvature)

from conftest import interior_points


def _ext(item, pt):
    return fundamental_forms(item.smooth_map, item.ambient, pt)


@pytest.mark.parametrize("name", ["s3xs1", "s2xpseudosphere", "s2xs2_control",
                                  "cone_t3", "cylinder_r1xs3", "example2"])
def test_frame_is_pseudo_orthonormal(catalog, name):
    item = catalog[name]
    sig = item.ambient.signature
    for pt in interior_points(item, 3):
        ext = _ext(item, pt)
        gram = np.einsum("aA,A,bA->ab", ext.frame, sig, ext.frame)
        assert np.allclose(gram, np.diag(ext.frame_eps), atol=1e-10)
        # normal frame really is normal to the tangent space
        mixed = np.einsum("iA,A,aA->ia", ext.tangent, sig, ext.frame)
        assert np.max(np.abs(mixed)) < 1e-10


@pytest.mark.parametrize("name", ["s3xs1", "s2xpseudosphere", "example2"])
def test_alpha_reconstructs_from_components(catalog, name):
    item = catalog[name]
    for pt in interior_points(item, 3):
        ext = _ext(item, pt)
        rebuilt = np.einsum("a,aij,aA->ijA", ext.frame_eps.astype(float),
                            ext.h_comp, ext.frame)
        assert np.allclose(rebuilt, ext.alpha, atol=1e-9)


@pytest.mark.parametrize("name", ["s3xs1", "s2xpseudosphere", "s2xs2_control",
                                  "cone_t3", "example2"])
def test_flat_normal_bundle(catalog, name):
    """All catalog immersions carry flat normal bundles, including the
    negative control (flatness of the normal connection does not imply
    conformal flatness of the metric)."""
    item = catalog[name]
    for pt in interior_points(item, 3):
        nb = normal_connection_and_curvature(item.smooth_map, item.ambient, pt)
        assert np.max(np.abs(nb.r_perp_frame)) < 1e-8
        assert nb.disagreement < 1e-8


def test_shape_operators_commute(catalog):
    item = catalog["s3xs1"]
    for pt in interior_points(item, 3):
        ext = _ext(item, pt)
        for a in range(len(ext.S)):
            for b in range(a):
                comm = ext.S[a] @ ext.S[b] - ext.S[b] @ ext.S[a]
                assert np.max(np.abs(comm)) < 1e-9


def test_sphere_curvature_constant(catalog):
    """Stereographic patch of the round sphere: sectional curvature 1."""
    item = catalog["sphere_stereographic"]
    c = item.expected["constant_curvature"]
    rng = np.random.default_rng(1)
    for pt in interior_points(item, 3):
        pack = intrinsic_curvatures(_ext(item, pt))
        for _ in range(5):
            q, _ = np.linalg.qr(rng.standard_normal((pack.riemann.shape[0], 2)))
            assert abs(pack.sectional(q[:, 0], q[:, 1]) - c) < 1e-8


def test_flat_items_have_zero_curvature(catalog):
    for name in ("flat_inclusion", "flat_cylinder"):
        item = catalog[name]
        for pt in interior_points(item, 2):
            pack = intrinsic_curvatures(_ext(item, pt))
            assert np.max(np.abs(pack.riemann)) < 1e-9


def test_ricci_crosscheck(catalog):
    for name in ("s3xs1", "s2xpseudosphere", "cone_t3"):
        item = catalog[name]
        for pt in interior_points(item, 2):
            pack = intrinsic_curvatures(_ext(item, pt))
            assert pack.ricci_crosscheck_residual < 1e-9


def test_space_form_quadric():
    amb = amb_mod.sphere_form(4, 2.0)
    p = np.zeros(5)
    p[0] = amb.radius
    assert amb.quadric_defect(p) < 1e-14
    hyp = amb_mod.hyperbolic_form(4, -0.5)
    q = np.zeros(5)
    q[0] = hyp.radius
    assert hyp.quadric_defect(q) < 1e-14


def test_conformal_metric_residual(catalog):
    for name in ("s3xs1", "cone_t3", "cylinder_r1xs3"):
        item = catalog[name]
        pts = interior_points(item, 4)
        resid = item.conformal.metric_residual(item.smooth_map, item.ambient, pts)
        assert resid < 1e-8
