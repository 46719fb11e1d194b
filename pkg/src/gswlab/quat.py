"""Quaternion algebra for spinor tuples valued in H^n.

Conventions, fixed once for the whole package:

* A quaternion is an array of shape (..., 4) holding the coefficients of
  (1, i, j, k); Hamilton products ij = k, jk = i, ki = j.
* A spinor value is an n-tuple of quaternions, shape (n, 4).  Spinor
  fields prepend three lattice axes, shape (N, N, N, n, 4).
* U(1) acts by right multiplication with exp(i*theta) on every component,
  so the Killing field of xi in u(1) = R is psi -> psi * (i xi).
* The complex structures (I1, I2, I3) act by left multiplication with
  (i, j, k) and are tied to the coordinate axes (x1, x2, x3) in this
  order.  Flipping this pairing globally maps solutions onto solutions of
  the conjugate equations; we never flip it.
* Imaginary triples (moment map values, curvature components) are stored
  as (..., 3) arrays of (i, j, k) coefficients.

The moment map of the right U(1) action is implemented as

    mu(Psi) = 1/2 sum_k  psi_k * i * conj(psi_k),

an imaginary quaternion.  On C^2 spinors this agrees with the
traceless-Hermitian convention sum_k psi_k psi_k^* - |Psi|^2 / 2 up to a
fixed rotation of R^3; the test suite pins that rotation down once
(tests/test_quat.py::test_moment_map_matches_hermitian_convention).
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "quat_mul",
    "quat_conj",
    "quat_norm",
    "right_mul_i",
    "apply_complex_structure",
    "moment_map",
    "killing_field",
    "rescale",
]


def quat_mul(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Hamilton product of quaternion arrays, broadcasting over leading axes."""
    pw, px, py, pz = np.moveaxis(np.asarray(p), -1, 0)
    qw, qx, qy, qz = np.moveaxis(np.asarray(q), -1, 0)
    return np.stack(
        [
            pw * qw - px * qx - py * qy - pz * qz,
            pw * qx + px * qw + py * qz - pz * qy,
            pw * qy - px * qz + py * qw + pz * qx,
            pw * qz + px * qy - py * qx + pz * qw,
        ],
        axis=-1,
    )


def quat_conj(q: np.ndarray) -> np.ndarray:
    """Quaternion conjugation, an anti-involution: (pq)* = q* p*."""
    q = np.asarray(q)
    return np.stack([q[..., 0], -q[..., 1], -q[..., 2], -q[..., 3]], axis=-1)


def quat_norm(q: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.square(q), axis=-1))


def right_mul_i(q: np.ndarray) -> np.ndarray:
    """Right multiplication q -> q * i (closed form, no products needed)."""
    q = np.asarray(q)
    return np.stack([-q[..., 1], q[..., 0], q[..., 3], -q[..., 2]], axis=-1)


def _left_i(q):
    return np.stack([-q[..., 1], q[..., 0], -q[..., 3], q[..., 2]], axis=-1)


def _left_j(q):
    return np.stack([-q[..., 2], q[..., 3], q[..., 0], -q[..., 1]], axis=-1)


def _left_k(q):
    return np.stack([-q[..., 3], -q[..., 2], q[..., 1], q[..., 0]], axis=-1)


_LEFT_UNITS = {1: _left_i, 2: _left_j, 3: _left_k}


def apply_complex_structure(axis: int, values: np.ndarray) -> np.ndarray:
    """Apply I_axis, i.e. left-multiply every quaternion entry by i, j or k.

    ``axis`` is 1, 2 or 3.  Commutes with the right U(1) action and with
    the right SU(n) action on the component index.
    """
    try:
        op = _LEFT_UNITS[axis]
    except KeyError:
        raise ValueError(f"complex structure axis must be 1, 2 or 3 (got {axis})")
    return op(np.asarray(values))


def moment_map(psi: np.ndarray) -> np.ndarray:
    """Hyperkaehler moment map of the right U(1) action on H^n.

    ``psi`` has shape (..., n, 4); the result has shape (..., 3) holding
    the (i, j, k) coefficients of 1/2 sum_k psi_k i conj(psi_k).  The real
    part vanishes identically and is dropped.  Homogeneous of degree two
    and invariant under psi -> psi * exp(i theta).
    """
    psi = np.asarray(psi)
    if psi.ndim < 2 or psi.shape[-1] != 4:
        raise ValueError("spinor array must have shape (..., n, 4)")
    t = quat_mul(right_mul_i(psi), quat_conj(psi))
    return 0.5 * np.sum(t[..., 1:], axis=-2)


def killing_field(xi: float, psi: np.ndarray) -> np.ndarray:
    """Killing vector of xi in u(1) = R at psi: componentwise psi_k * (i xi)."""
    return float(xi) * right_mul_i(np.asarray(psi))


def rescale(links: np.ndarray, spinor: np.ndarray, r: float):
    """Rescale a configuration (a, u) -> (a, u / r) with parameter eps = 1 / r.

    Because the moment map is homogeneous of degree two, a configuration
    with curvature F_a = mu(u) maps to one with eps^2 F_a = mu(u / r) at
    eps = 1 / r, exactly up to floating point roundoff.
    """
    r = float(r)
    if r <= 0.0:
        raise ValueError(f"rescale factor must be positive (got {r})")
    return links, np.asarray(spinor) / r, 1.0 / r
