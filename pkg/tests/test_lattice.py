import numpy as np
import pytest

from gswlab.lattice import (
    LatticeGeometry,
    amplitude,
    chern_flux,
    constant_spinor_field,
    covariant_derivative,
    curvature,
    gauge_transform,
    identity_background,
    l2_inner,
    l2_norm,
    normalize,
    plaquette_angles,
    uniform_flux_field,
    wrap_angle,
    zero_gauge_field,
)
from gswlab.quat import killing_field, quat_mul

from conftest import make_random_instance


def right_phase(psi, g):
    """Reference right multiplication by exp(i g(x)) used by the tests."""
    phase = np.stack(
        [np.cos(g), np.sin(g), np.zeros_like(g), np.zeros_like(g)], axis=-1
    )
    return quat_mul(psi, phase[..., None, :])


def test_wrap_angle_range_and_fixed_points():
    theta = np.linspace(-10, 10, 2001)
    w = wrap_angle(theta)
    assert np.all(w <= np.pi) and np.all(w > -np.pi)
    assert wrap_angle(np.pi) == np.pi
    assert wrap_angle(-np.pi) == np.pi
    assert wrap_angle(3 * np.pi) == np.pi
    assert wrap_angle(0.25) == 0.25


def test_geometry_validation():
    with pytest.raises(ValueError):
        LatticeGeometry(3, 1.0)
    with pytest.raises(ValueError):
        LatticeGeometry(8, 0.0)
    g = LatticeGeometry(8, 2.0)
    assert g.h == 0.25


# ---------------------------------------------------------------------------
# covariant derivative


def test_constant_field_flat_connection(geom4):
    psi = constant_spinor_field(geom4, np.array([[1.0, 0.5, -0.25, 2.0]]))
    a = zero_gauge_field(geom4)
    b = identity_background(geom4, 1)
    for axis in (1, 2, 3):
        assert np.array_equal(covariant_derivative(geom4, a, b, psi, axis), np.zeros_like(psi))


def test_reduces_to_plain_centered_difference(geom4, rng):
    psi = rng.standard_normal(geom4.shape + (2, 4))
    a = zero_gauge_field(geom4)
    b = identity_background(geom4, 2)
    for axis in (1, 2, 3):
        ax = axis - 1
        plain = (np.roll(psi, -1, axis=ax) - np.roll(psi, 1, axis=ax)) / (2 * geom4.h)
        assert np.allclose(covariant_derivative(geom4, a, b, psi, axis), plain, atol=1e-14)


def test_linearity(geom4, rng):
    links, psi, background = make_random_instance(geom4, 2, rng)
    phi = rng.standard_normal(psi.shape)
    for axis in (1, 2, 3):
        lhs = covariant_derivative(geom4, links, background, 2.0 * psi - 3.0 * phi, axis)
        rhs = 2.0 * covariant_derivative(geom4, links, background, psi, axis) - 3.0 * covariant_derivative(geom4, links, background, phi, axis)
        assert np.allclose(lhs, rhs, atol=1e-12)


def test_gauge_covariance(geom4, rng):
    """derivative(transformed data) = transformed derivative, to roundoff."""
    links, psi, background = make_random_instance(geom4, 2, rng, link_scale=1.0)
    g = rng.uniform(-np.pi, np.pi, geom4.shape)
    new_links, new_psi = gauge_transform(g, links, psi)
    for axis in (1, 2, 3):
        lhs = covariant_derivative(geom4, new_links, background, new_psi, axis)
        rhs = right_phase(covariant_derivative(geom4, links, background, psi, axis), g)
        scale = np.abs(rhs).max()
        assert np.abs(lhs - rhs).max() < 1e-12 * scale


def test_small_angle_expansion(geom8):
    """A constant link angle -theta acts like the Killing field of theta/h
    up to O(theta^2) (the stored angle represents a_j = -theta_j / h)."""
    theta = 1e-3
    psi = constant_spinor_field(geom8, np.array([[0.7, -0.1, 0.4, 0.2]]))
    b = identity_background(geom8, 1)
    a = zero_gauge_field(geom8)
    a[..., 0] = -theta
    d = covariant_derivative(geom8, a, b, psi, 1)
    expected = killing_field(theta / geom8.h, psi)
    assert np.abs(d - expected).max() < theta**2 / geom8.h * np.abs(psi).max()


def test_centered_difference_skew_adjointness(geom4, rng):
    links, psi, background = make_random_instance(geom4, 2, rng, link_scale=1.0)
    phi = normalize(geom4, rng.standard_normal(psi.shape))
    for axis in (1, 2, 3):
        lhs = l2_inner(geom4, covariant_derivative(geom4, links, background, phi, axis), psi)
        rhs = -l2_inner(geom4, phi, covariant_derivative(geom4, links, background, psi, axis))
        assert abs(lhs - rhs) < 1e-13 * max(abs(lhs), 1.0)


def test_geometry_mismatch_rejected(geom4, geom8, rng):
    links, psi, background = make_random_instance(geom4, 1, rng)
    wrong = np.zeros(geom8.shape + (1, 4))
    with pytest.raises(ValueError):
        covariant_derivative(geom4, links, background, wrong, 1)
    with pytest.raises(ValueError):
        covariant_derivative(geom4, links, background, psi, 5)


# ---------------------------------------------------------------------------
# curvature, gauge transformations, flux


def test_pure_gauge_curvature_vanishes(geom4, rng):
    g = rng.uniform(-np.pi, np.pi, geom4.shape)
    a = zero_gauge_field(geom4)
    psi = constant_spinor_field(geom4, np.array([[1.0, 0, 0, 0]]))
    pure_gauge, _ = gauge_transform(g, a, psi)
    assert np.abs(plaquette_angles(pure_gauge)).max() < 1e-12


def test_uniform_flux_plaquettes_and_total(geom8):
    n = geom8.N
    a = uniform_flux_field(geom8, "12", 1)
    p = plaquette_angles(a)[..., 2]
    assert np.abs(p - 2 * np.pi / n**2).max() < 1e-12
    # one flux quantum through every (12) slice
    for s in range(n):
        assert abs(p[:, :, s].sum() - 2 * np.pi) < 1e-10
        assert chern_flux(a, "12", s) == 1
    assert chern_flux(a, "23", 0) == 0
    assert chern_flux(a, "31", 0) == 0


def test_cube_bianchi_sum(geom4, rng):
    links = wrap_angle(rng.uniform(-np.pi, np.pi, geom4.shape + (3,)))
    p = plaquette_angles(links)
    cube = sum(np.roll(p[..., d], -1, axis=d) - p[..., d] for d in range(3))
    defect = np.abs(cube - 2 * np.pi * np.rint(cube / (2 * np.pi)))
    assert defect.max() < 1e-12


def test_gauge_transform_identity_and_curvature_invariance(geom4, rng):
    links, psi, _ = make_random_instance(geom4, 2, rng, link_scale=1.0)
    same_links, same_psi = gauge_transform(np.zeros(geom4.shape), links, psi)
    assert np.allclose(same_links, links, atol=1e-15)
    assert np.allclose(same_psi, psi, atol=1e-15)
    g = rng.uniform(-np.pi, np.pi, geom4.shape)
    new_links, _ = gauge_transform(g, links, psi)
    assert np.abs(plaquette_angles(new_links) - plaquette_angles(links)).max() < 1e-11


def test_gauge_transform_composition(geom4, rng):
    links, psi, _ = make_random_instance(geom4, 2, rng, link_scale=1.0)
    g1 = rng.uniform(-np.pi, np.pi, geom4.shape)
    g2 = rng.uniform(-np.pi, np.pi, geom4.shape)
    l12, p12 = gauge_transform(g2, *gauge_transform(g1, links, psi))
    l_sum, p_sum = gauge_transform(g1 + g2, links, psi)
    assert np.abs(wrap_angle(l12 - l_sum)).max() < 1e-12
    assert np.abs(p12 - p_sum).max() < 1e-13


def test_chern_flux_zero_additivity_slice_independence(geom8, rng):
    assert chern_flux(zero_gauge_field(geom8), "12", 0) == 0
    a1 = uniform_flux_field(geom8, "12", 1)
    a2 = uniform_flux_field(geom8, "12", 2)
    for s in range(geom8.N):
        assert chern_flux(a1 + a2, "12", s) == 3
    # small random field: cube sums vanish exactly, flux is slice independent
    small = 1e-3 * rng.standard_normal(geom8.shape + (3,))
    fluxes = {chern_flux(small, pl, s) for pl in ("12", "23", "31") for s in range(geom8.N)}
    assert fluxes == {0}


def test_curvature_scaling(geom4, rng):
    links = wrap_angle(0.2 * rng.uniform(-np.pi, np.pi, geom4.shape + (3,)))
    assert np.allclose(
        curvature(geom4, links), plaquette_angles(links) / geom4.h**2, atol=0
    )


# ---------------------------------------------------------------------------
# inner products


def test_l2_inner_properties(geom4, rng):
    psi = rng.standard_normal(geom4.shape + (2, 4))
    phi = rng.standard_normal(geom4.shape + (2, 4))
    assert l2_inner(geom4, psi, psi) >= 0
    assert l2_norm(geom4, np.zeros_like(psi)) == 0.0
    # symmetry and Cauchy-Schwarz
    assert abs(l2_inner(geom4, phi, psi) - l2_inner(geom4, psi, phi)) < 1e-15
    assert abs(l2_inner(geom4, phi, psi)) <= l2_norm(geom4, phi) * l2_norm(geom4, psi) * (1 + 1e-14)


def test_unit_constant_field_norm(geom4):
    # h^3 N^3 = L^3 = 1, so the norm of a constant field is its site value
    value = np.array([[0.5, 0.5, 0.5, 0.5]])
    psi = constant_spinor_field(geom4, value)
    assert abs(l2_inner(geom4, psi, psi) - float(np.sum(value**2))) < 1e-14


def test_amplitude(geom4):
    value = np.array([[3.0, 0, 0, 0], [0, 4.0, 0, 0]])
    psi = constant_spinor_field(geom4, value)
    assert np.allclose(amplitude(psi), 5.0)
