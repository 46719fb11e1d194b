"""Constructed model fields with known analytic structure.

These serve as oracles: each constructor documents the exact property the
resulting field has, so tests and demo runs can assert against known
answers rather than against the code under test.
"""

from __future__ import annotations

import numpy as np

from .lattice import LatticeGeometry
from .analysis import ZeroSetReport, label_cells, site_distances_to_cells

__all__ = [
    "half_winding_field",
    "ring_cell_path",
    "report_from_cells",
    "power_law_amplitude",
]


def half_winding_field(geom: LatticeGeometry, center=None) -> np.ndarray:
    """Two-spinor field whose quotient representative makes a half turn
    around the x3-axis circle through ``center``.

    With q(x) = rho e^{i phi / 2} (rho the in-plane distance to the axis,
    phi the in-plane polar angle) the field is Psi = (q, q j), constant
    along x3.  Then

    * the moment map vanishes identically (the (q, q j) cancellation),
    * |Psi| = sqrt(2) rho, so the zero set is exactly the axis circle,
    * the quotient representative is +-q, which rotates by pi along any
      loop encircling the axis once: the Z/2 monodromy is -1 there and +1
      on loops not enclosing the axis.

    The stored field uses the principal branch of phi, so it carries a
    gauge seam (a sign flip across the cut); all quotient-level
    diagnostics are insensitive to it.
    """
    n = geom.N
    c1, c2 = (n // 2, n // 2) if center is None else center
    x1, x2 = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    d1 = (x1 - c1).astype(float)
    d2 = (x2 - c2).astype(float)
    phi = np.arctan2(d2, d1)
    rho = np.hypot(d1, d2) * geom.h
    q = np.stack(
        [rho * np.cos(phi / 2), rho * np.sin(phi / 2), np.zeros_like(rho), np.zeros_like(rho)],
        axis=-1,
    )
    # q * j in coefficients: (w, x, 0, 0) -> (0, 0, w, x)
    qj = np.stack([np.zeros_like(rho), np.zeros_like(rho), q[..., 0], q[..., 1]], axis=-1)
    psi = np.zeros(geom.shape + (2, 4))
    psi[..., 0, :] = q[:, :, None, :]
    psi[..., 1, :] = qj[:, :, None, :]
    return psi


def ring_cell_path(n: int, axis: int, offsets) -> np.ndarray:
    """Ordered closed cell path wrapping once around ``axis`` (0, 1 or 2)
    at the fixed transverse cell coordinates ``offsets``."""
    o1, o2 = offsets
    path = np.empty((n, 3), dtype=int)
    path[:, axis] = np.arange(n)
    path[:, (axis + 1) % 3] = o1
    path[:, (axis + 2) % 3] = o2
    return path


def report_from_cells(geom: LatticeGeometry, cells, delta: float) -> ZeroSetReport:
    """Zero-set report with a directly specified cell set (synthetic Z)."""
    mask = np.zeros(geom.shape, dtype=bool)
    for c in np.asarray(cells, dtype=int):
        mask[tuple(c)] = True
    labels, count = label_cells(mask)
    return ZeroSetReport(float(delta), mask, labels, count)


def power_law_amplitude(geom: LatticeGeometry, report: ZeroSetReport, gamma: float) -> np.ndarray:
    """Amplitude field dist(., Z)^gamma in the estimator's own metric
    (site-to-nearest-zero-cell-center, periodic), an exact power law."""
    return site_distances_to_cells(geom, report.cell_mask) ** gamma
