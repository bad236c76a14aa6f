"""Principal normal census, holonomicity, quasiumbilical frames and the
nullity/leaf invariants over the catalog."""
import numpy as np
import pytest

from confflat.errors import NotApplicable, QuasiumbilicError
from confflat.extrinsic import fundamental_forms
from confflat.principal import (holonomicity_check, joint_diagonalize,
                                nullity_and_leaf_invariants,
                                principal_decomposition, properness_and_census,
                                quasiumbilical_frame, separation_check,
                                span_structure, traceless_relations)

from conftest import interior_points

CENSUS_ITEMS = ["s3xs1", "s2xpseudosphere", "s2xs2_control", "cone_t3",
                "cylinder_r1xs3", "flat_cylinder", "example2",
                "flat_inclusion", "sphere_stereographic"]


def test_joint_diagonalize_random_commuting(rng):
    """Simultaneously diagonalizable families come back diagonal."""
    n = 5
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    mats = [q @ np.diag(rng.standard_normal(n)) @ q.T for _ in range(3)]
    v = joint_diagonalize(np.array(mats), seed=0)
    for m in mats:
        d = v.T @ m @ v
        off = d - np.diag(np.diag(d))
        assert np.max(np.abs(off)) < 1e-9 * max(1.0, np.max(np.abs(d)))


@pytest.mark.parametrize("name", CENSUS_ITEMS)
def test_census_matches_expectation(catalog, name):
    item = catalog[name]
    pts = interior_points(item, 5)
    census = properness_and_census(item.smooth_map, item.ambient, pts)
    assert census.k == item.expected["k"]
    assert tuple(sorted(census.multiplicities)) == \
        tuple(sorted(item.expected["multiplicities"]))
    assert census.reconstruction_residual < 1e-7


@pytest.mark.parametrize("name", ["s3xs1", "example2", "cone_t3"])
def test_holonomicity(catalog, name):
    item = catalog[name]
    pts = interior_points(item, 4)
    rep = holonomicity_check(item.smooth_map, item.ambient, pts)
    assert rep.net_offdiag < 1e-7
    assert rep.alpha_offdiag < 1e-7


def test_dupin_condition(catalog):
    """Principal normals with multiplicity >= 2 are parallel along their own
    eigendistribution."""
    item = catalog["example2"]
    pts = interior_points(item, 3)
    census = properness_and_census(item.smooth_map, item.ambient, pts)
    for idx, worst in census.dupin_residuals.items():
        if census.multiplicities[idx] >= 2:
            assert worst < 1e-4


@pytest.mark.parametrize("name", ["s2xpseudosphere", "example2", "cone_t3"])
def test_separation_positive(catalog, name):
    item = catalog[name]
    pt = interior_points(item, 1)[0]
    dec = principal_decomposition(
        fundamental_forms(item.smooth_map, item.ambient, pt))
    assert separation_check(dec) > 1e-3


@pytest.mark.parametrize("name", ["s3xs1", "s2xpseudosphere", "example2"])
def test_quasiumbilical_frame_exists(catalog, name):
    item = catalog[name]
    n = item.smooth_map.domain.dim
    for pt in interior_points(item, 3):
        dec = principal_decomposition(
            fundamental_forms(item.smooth_map, item.ambient, pt))
        qf = quasiumbilical_frame(dec)
        assert all(m >= n - 1 for m in qf.eigen_multiplicities)
        assert qf.orthogonality_defect < 1e-8
        # codimension bound p >= n - m for the high multiplicity m
        m_high = max(dec.multiplicities)
        assert dec.ext.p >= n - m_high


def test_quasiumbilical_frame_negative_control(catalog):
    item = catalog["s2xs2_control"]
    pt = interior_points(item, 1)[0]
    dec = principal_decomposition(
        fundamental_forms(item.smooth_map, item.ambient, pt))
    with pytest.raises(QuasiumbilicError):
        quasiumbilical_frame(dec)


def test_traceless_relations(catalog):
    for name in ("s3xs1", "s2xpseudosphere"):
        item = catalog[name]
        pt = interior_points(item, 1)[0]
        dec = principal_decomposition(
            fundamental_forms(item.smooth_map, item.ambient, pt))
        rep = traceless_relations(dec)
        if rep.high_mult_norm_residual is not None:
            assert rep.high_mult_norm_residual < 1e-7
        if rep.colinearity_residual is not None:
            assert rep.colinearity_residual < 1e-7
        if rep.pair_sum_residual is not None:
            assert rep.pair_sum_residual < 1e-7


def test_span_structure_umbilic_direction(catalog):
    """For the cylinder over S^3 the principal normals span one more
    direction than their differences; the extra direction is umbilic."""
    item = catalog["cylinder_r1xs3"]
    pt = interior_points(item, 1)[0]
    dec = principal_decomposition(
        fundamental_forms(item.smooth_map, item.ambient, pt))
    st = span_structure(dec)
    if st.delta is not None:
        assert st.umbilic_residual < 1e-7


def test_nullity_invariants_cone(catalog):
    item = catalog["cone_t3"]
    for pt in interior_points(item, 3):
        rep = nullity_and_leaf_invariants(item.smooth_map, item.ambient, pt)
        assert rep.nullity_dim == item.expected["nullity"]
        assert rep.lam_spread < 1e-7
        assert rep.leaf_derivative < 1e-5


def test_nullity_trivial_when_absent(catalog):
    item = catalog["s3xs1"]
    pt = interior_points(item, 1)[0]
    with pytest.raises(NotApplicable):
        nullity_and_leaf_invariants(item.smooth_map, item.ambient, pt)


def test_flat_cylinder_nullity(catalog):
    item = catalog["flat_cylinder"]
    pt = interior_points(item, 1)[0]
    rep = nullity_and_leaf_invariants(item.smooth_map, item.ambient, pt)
    assert rep.nullity_dim == item.expected["nullity"]
