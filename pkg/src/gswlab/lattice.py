"""Periodic cubic lattice on the flat 3-torus.

Field layouts (site axes first, C order):

===============  =====================  ==========================================
field            shape                  contents
===============  =====================  ==========================================
gauge links      (N, N, N, 3)           angles theta_j(x) in (-pi, pi], the U(1)
                                        link variable on the link x -> x + e_j
background       (N, N, N, 3, n, n)     complex SU(n) link matrices (fixed data)
spinor field     (N, N, N, n, 4)        one H^n value per site
plaquette field  (N, N, N, 3)           index d holds the plane dual to axis d+1:
                                        d=0 -> (23), d=1 -> (31), d=2 -> (12)
===============  =====================  ==========================================

The plaquette ordering matches the identification of curvature two-forms
with imaginary triples, F -> (F_23, F_31, F_12), so a plaquette field can
be compared componentwise with a moment map field.

Transport convention.  Pulling a spinor value from x + e_j back to x
right-multiplies by exp(-i theta_j(x)) and applies the SU(n) link matrix
B_j(x); the inverse link is used from the negative side.  With the gauge
transformation

    theta_j(x) -> theta_j(x) + g(x + e_j) - g(x),     Psi(x) -> Psi(x) e^{i g(x)},

covariant differences are then gauge covariant.  Equivalently the stored
angle represents the connection one-form via a_j = -theta_j / h; the small
angle expansion of a covariant difference of a constant field with constant
link angle theta is the Killing field of -theta / h plus O(theta^2).

All reductions are plain numpy sums over fixed-shape arrays, so results are
deterministic for a given platform and independent of evaluation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .quat import apply_complex_structure, quat_norm

TWO_PI = 2.0 * np.pi

# plaquette plane labels, in the dual-axis storage order
_PLANE_INDEX = {"23": 0, "31": 1, "12": 2}


@dataclass(frozen=True)
class LatticeGeometry:
    """Cubic N^3 lattice of physical box length L with spacing h = L / N."""

    N: int
    L: float

    def __post_init__(self):
        if self.N < 4:
            raise ValueError(f"N must be >= 4 (got {self.N})")
        if not self.L > 0.0:
            raise ValueError(f"L must be positive (got {self.L})")

    @property
    def h(self) -> float:
        return self.L / self.N

    @property
    def shape(self):
        return (self.N, self.N, self.N)


def wrap_angle(theta):
    """Wrap angles into the half-open interval (-pi, pi]."""
    return np.pi - np.mod(np.pi - np.asarray(theta), TWO_PI)


def check_same_geometry(geom: LatticeGeometry, *fields):
    for f in fields:
        if tuple(np.shape(f)[:3]) != geom.shape:
            raise ValueError(
                f"field shape {np.shape(f)} does not match lattice {geom.shape}"
            )


# ---------------------------------------------------------------------------
# constructors


def zero_gauge_field(geom: LatticeGeometry) -> np.ndarray:
    return np.zeros((geom.N, geom.N, geom.N, 3))


def identity_background(geom: LatticeGeometry, n: int) -> np.ndarray:
    b = np.zeros((geom.N, geom.N, geom.N, 3, n, n), dtype=complex)
    for k in range(n):
        b[..., k, k] = 1.0
    return b


def random_background(geom: LatticeGeometry, n: int, rng) -> np.ndarray:
    """Haar-ish random SU(n) link matrices (QR of complex Gaussians)."""
    shape = (geom.N, geom.N, geom.N, 3)
    m = rng.standard_normal(shape + (n, n)) + 1j * rng.standard_normal(shape + (n, n))
    q, r = np.linalg.qr(m)
    diag = np.diagonal(r, axis1=-2, axis2=-1)
    q = q * (diag / np.abs(diag))[..., None, :]
    det = np.linalg.det(q)
    q = q * np.exp(-1j * np.angle(det) / n)[..., None, None]
    return q


def constant_spinor_field(geom: LatticeGeometry, value: np.ndarray) -> np.ndarray:
    value = np.asarray(value, dtype=float)
    if value.ndim != 2 or value.shape[-1] != 4:
        raise ValueError("spinor value must have shape (n, 4)")
    return np.broadcast_to(value, geom.shape + value.shape).copy()


def uniform_flux_field(geom: LatticeGeometry, plane, m: int) -> np.ndarray:
    """Link angles carrying m flux quanta through every 2-torus of ``plane``.

    Every plaquette of the chosen plane carries the wrapped angle
    2 pi m / N^2, so the total flux over each coordinate 2-torus slice is
    exactly 2 pi m; all other planes are flat.
    """
    d = _PLANE_INDEX[str(plane)]
    p, q = (d + 1) % 3, (d + 2) % 3
    N = geom.N
    idx = np.indices(geom.shape)
    theta = np.zeros(geom.shape + (3,))
    theta[..., q] = TWO_PI * m * idx[p] / N**2
    sheet = idx[p] == N - 1
    theta[..., p][sheet] = -TWO_PI * m * idx[q][sheet] / N
    return wrap_angle(theta)


# ---------------------------------------------------------------------------
# complex-pair representation used for transport

# Writing a quaternion as q = z1 + j z2 with z1 = w + x i and z2 = y - z i,
# right multiplication by a complex scalar c acts diagonally as
# (z1, z2) -> (z1 c, z2 c), and the SU(n) background acts on the component
# index of both z1 and z2.


def _pair(psi):
    return psi[..., 0] + 1j * psi[..., 1], psi[..., 2] - 1j * psi[..., 3]


def _unpair(z1, z2):
    return np.stack([z1.real, z1.imag, z2.real, -z2.imag], axis=-1)


def _right_phase(psi, phase):
    z1, z2 = _pair(psi)
    return _unpair(z1 * phase, z2 * phase)


def transport_from_positive(links, background, psi, ax: int) -> np.ndarray:
    """Value of psi at x + e_ax parallel-transported back to x (0-based axis)."""
    z1, z2 = _pair(np.roll(psi, -1, axis=ax))
    m = background[:, :, :, ax]
    phase = np.exp(-1j * links[..., ax])[..., None]
    z1 = np.einsum("abck,abckl->abcl", z1, m) * phase
    z2 = np.einsum("abck,abckl->abcl", z2, m) * phase
    return _unpair(z1, z2)


def transport_from_negative(links, background, psi, ax: int) -> np.ndarray:
    """Value of psi at x - e_ax parallel-transported forward to x."""
    z1, z2 = _pair(np.roll(psi, 1, axis=ax))
    m = np.conj(np.roll(background[:, :, :, ax], 1, axis=ax))
    phase = np.exp(1j * np.roll(links[..., ax], 1, axis=ax))[..., None]
    # inverse link: z @ conj(W).T, written as an einsum over the second index
    z1 = np.einsum("abck,abclk->abcl", z1, m) * phase
    z2 = np.einsum("abck,abclk->abcl", z2, m) * phase
    return _unpair(z1, z2)


def covariant_derivative(
    geom: LatticeGeometry, links, background, psi, axis: int
) -> np.ndarray:
    """Centered covariant difference along ``axis`` (1, 2 or 3).

    (T_{+j} Psi - T_{-j} Psi) / (2h) with U(1) x SU(n) parallel transport;
    reduces to the plain centered difference for flat links and identity
    background.  Skew-adjoint with respect to the lattice L^2 product.
    """
    if axis not in (1, 2, 3):
        raise ValueError(f"axis must be 1, 2 or 3 (got {axis})")
    check_same_geometry(geom, links, background, psi)
    ax = axis - 1
    fwd = transport_from_positive(links, background, psi, ax)
    bwd = transport_from_negative(links, background, psi, ax)
    return (fwd - bwd) / (2.0 * geom.h)


# ---------------------------------------------------------------------------
# curvature and gauge transformations


def plaquette_angles(links) -> np.ndarray:
    """Wrapped oriented plaquette sums, indexed by dual axis (23, 31, 12)."""
    out = np.empty(links.shape[:3] + (3,))
    for d in range(3):
        p, q = (d + 1) % 3, (d + 2) % 3
        tp, tq = links[..., p], links[..., q]
        raw = tp + np.roll(tq, -1, axis=p) - np.roll(tp, -1, axis=q) - tq
        out[..., d] = wrap_angle(raw)
    return out


def curvature(geom: LatticeGeometry, links) -> np.ndarray:
    """Plaquette angles divided by h^2: the lattice curvature two-form,
    stored as the imaginary triple (F_23, F_31, F_12) per site."""
    check_same_geometry(geom, links)
    return plaquette_angles(links) / geom.h**2


def gauge_transform(g, links, psi):
    """U(1) gauge transformation by site angles g.

    Returns (links', psi') with theta_j(x) -> theta_j(x) + g(x+e_j) - g(x)
    wrapped back into (-pi, pi], and Psi(x) -> Psi(x) e^{i g(x)}.  Curvature
    is invariant, covariant differences are covariant.
    """
    g = np.asarray(g)
    new_links = np.stack(
        [
            wrap_angle(links[..., j] + np.roll(g, -1, axis=j) - g)
            for j in range(3)
        ],
        axis=-1,
    )
    new_psi = _right_phase(psi, np.exp(1j * g)[..., None])
    return new_links, new_psi


def chern_flux(links, plane, slice_index: int) -> int:
    """Flux quantum number through one coordinate 2-torus.

    (1 / 2 pi) times the sum of wrapped plaquette angles of ``plane``
    ("12", "23" or "31") over the slice with the dual coordinate fixed to
    ``slice_index``.  Integer valued; independent of the slice for
    configurations whose cube sums vanish exactly.
    """
    d = _PLANE_INDEX[str(plane)]
    total = np.take(plaquette_angles(links)[..., d], slice_index, axis=d).sum()
    return int(np.rint(total / TWO_PI))


# ---------------------------------------------------------------------------
# norms


def amplitude(psi) -> np.ndarray:
    """Sitewise |Psi|: sqrt of the summed squared coefficients of the n-tuple."""
    return np.sqrt(np.sum(np.square(psi), axis=(-1, -2)))


def l2_inner(geom: LatticeGeometry, phi, psi) -> float:
    """h^3 sum_x Re<Phi(x), Psi(x)> with the real quaternionic inner product."""
    check_same_geometry(geom, phi, psi)
    return geom.h**3 * float(np.sum(phi * psi))


def l2_norm(geom: LatticeGeometry, psi) -> float:
    return float(np.sqrt(l2_inner(geom, psi, psi)))


def normalize(geom: LatticeGeometry, psi) -> np.ndarray:
    nrm = l2_norm(geom, psi)
    if nrm == 0.0:
        raise ValueError("cannot normalize the zero spinor field")
    return psi / nrm


def dirac_of_transports(geom: LatticeGeometry, fwd, bwd) -> np.ndarray:
    """Sum_j I_j (T_{+j} - T_{-j}) / (2h) from precomputed transports."""
    inv = 1.0 / (2.0 * geom.h)
    out = apply_complex_structure(1, fwd[0] - bwd[0])
    out += apply_complex_structure(2, fwd[1] - bwd[1])
    out += apply_complex_structure(3, fwd[2] - bwd[2])
    return out * inv


__all__ = [
    "LatticeGeometry",
    "wrap_angle",
    "check_same_geometry",
    "zero_gauge_field",
    "identity_background",
    "random_background",
    "constant_spinor_field",
    "uniform_flux_field",
    "transport_from_positive",
    "transport_from_negative",
    "covariant_derivative",
    "plaquette_angles",
    "curvature",
    "gauge_transform",
    "chern_flux",
    "amplitude",
    "l2_inner",
    "l2_norm",
    "normalize",
    "dirac_of_transports",
    "quat_norm",
]
