import numpy as np
import pytest

from gswlab.lattice import (
    LatticeGeometry,
    identity_background,
    normalize,
    random_background,
    wrap_angle,
    zero_gauge_field,
)


@pytest.fixture
def geom4():
    return LatticeGeometry(4, 1.0)


@pytest.fixture
def geom8():
    return LatticeGeometry(8, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240808)


def make_random_instance(geom, n, rng, link_scale=0.2, random_b=True):
    """Random (links, psi, background) with links small enough that no
    plaquette sum can cross the wrap boundary (4 * 0.2 pi < pi)."""
    links = wrap_angle(link_scale * rng.uniform(-np.pi, np.pi, geom.shape + (3,)))
    psi = normalize(geom, rng.standard_normal(geom.shape + (n, 4)))
    background = random_background(geom, n, rng) if random_b else identity_background(geom, n)
    return links, psi, background


def constant_pair_solution(geom):
    """The exact constant solution: Psi proportional to (q0, q0 j), a = 0,
    identity background.  The two-component cancellation makes the moment
    map vanish and constancy kills the Dirac term."""
    q = np.array([0.3, -0.2, 0.5, 0.1])
    qj = np.array([-q[2], -q[3], q[0], q[1]])  # q * j
    psi = np.broadcast_to(np.stack([q, qj]), geom.shape + (2, 4)).copy()
    return (
        zero_gauge_field(geom),
        normalize(geom, psi),
        identity_background(geom, 2),
    )


def mu_flat_field(geom, rng):
    """Random spinor field with pointwise vanishing moment map, built from
    the (q, q j) cancellation pattern with an independent q per site."""
    q = rng.standard_normal(geom.shape + (4,))
    qj = np.stack([-q[..., 2], -q[..., 3], q[..., 0], q[..., 1]], axis=-1)
    psi = np.stack([q, qj], axis=-2)
    return normalize(geom, psi)
