"""Diagnostics for degenerate and limit configurations.

Covers four questions about a field snapshot:

* how far a moment-map-flat configuration is from solving the quotient
  Dirac equation (horizontal residual: the Dirac residual with the gauge
  orbit directions and their complex rotations projected out pointwise);
* where the spinor amplitude (almost) vanishes (thresholded zero cells and
  their periodic 6-connected components);
* how fast the amplitude grows off the zero set (power-law fit of
  log |Psi| against log distance over an annulus);
* the sign holonomy of the two-spinor quotient representative around a
  closed lattice loop, and the signed, multiplicity-weighted wrapping
  numbers of oriented zero curves (their pairing with the coordinate
  2-tori).

Distances to the zero set are lattice Euclidean distances from sites to
the nearest zero-cell center (no sub-cell refinement), with the periodic
minimum image taken per axis.  Component labeling follows a fixed
lexicographic scan, so labels are deterministic.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .lattice import LatticeGeometry, l2_norm
from .quat import (
    apply_complex_structure,
    moment_map,
    quat_conj,
    quat_mul,
    quat_norm,
    right_mul_i,
)
from .solver import dirac_residual

__all__ = [
    "ZeroSetReport",
    "OrientedComponent",
    "project_vertical_complement",
    "horizontal_fueter_residual",
    "zero_set",
    "label_cells",
    "site_distances_to_cells",
    "holder_exponent",
    "quotient_representative",
    "z2_monodromy",
    "zero_set_class",
    "component_cycle_paths",
    "component_windings",
]


# ---------------------------------------------------------------------------
# horizontal residual


def project_vertical_complement(residual, psi) -> np.ndarray:
    """Project a spinor field pointwise onto the orthogonal complement of
    span{psi i, I1 psi i, I2 psi i, I3 psi i}.

    The four directions are mutually orthogonal with common squared norm
    |psi|^2, so the projection is an explicit orthogonal projection; it is
    idempotent and norm nonincreasing.  Sites with psi = 0 are left
    untouched (the span is trivial there).
    """
    v0 = right_mul_i(psi)
    n2 = np.sum(psi * psi, axis=(-1, -2))
    inv = np.zeros_like(n2)
    nz = n2 > 0.0
    inv[nz] = 1.0 / n2[nz]
    out = residual.copy()
    for v in (
        v0,
        apply_complex_structure(1, v0),
        apply_complex_structure(2, v0),
        apply_complex_structure(3, v0),
    ):
        coeff = np.sum(residual * v, axis=(-1, -2)) * inv
        out -= coeff[..., None, None] * v
    return out


def horizontal_fueter_residual(
    geom: LatticeGeometry, links, background, psi, mu_tol: float = 1e-8
):
    """Dirac residual projected pointwise orthogonal to the vertical span.

    Requires the moment map to vanish pointwise up to ``mu_tol``; for an
    exact solution of the eps = 0 system this is the lattice residual of
    the induced quotient map.  Returns (projected field, its L^2 norm).
    """
    mu = moment_map(psi)
    worst = float(np.max(np.sqrt(np.sum(mu * mu, axis=-1))))
    if worst > mu_tol:
        raise ValueError(
            f"pointwise moment map violation {worst:.3e} exceeds tolerance {mu_tol:.3e}"
        )
    d = dirac_residual(geom, links, background, psi)
    horizontal = project_vertical_complement(d, psi)
    return horizontal, l2_norm(geom, horizontal)


# ---------------------------------------------------------------------------
# zero set extraction


@dataclass
class ZeroSetReport:
    """Thresholded zero cells of an amplitude field plus derived diagnostics.

    ``cell_mask[b]`` is True when the cell with base site b (corners
    b + {0,1}^3, periodic) contains a site with amplitude below ``delta``.
    ``labels`` holds the 6-connected component index per cell (-1 outside).
    The diagnostic fields are filled in by later analysis stages.
    """

    delta: float
    cell_mask: np.ndarray
    labels: np.ndarray
    component_count: int
    holder: tuple | None = None  # (gamma, r_squared)
    holder_ok: bool | None = None
    monodromies: list = field(default_factory=list)  # (loop id, sign)
    homology_class: tuple | None = None

    @property
    def cell_count(self) -> int:
        return int(self.cell_mask.sum())

    def cells(self) -> np.ndarray:
        return np.argwhere(self.cell_mask)


def label_cells(mask: np.ndarray):
    """Deterministic 6-connected component labeling on the periodic lattice."""
    n = mask.shape[0]
    labels = np.full(mask.shape, -1, dtype=int)
    count = 0
    for base in np.argwhere(mask):
        base = tuple(base)
        if labels[base] >= 0:
            continue
        labels[base] = count
        queue = deque([base])
        while queue:
            cur = queue.popleft()
            for ax in range(3):
                for step in (-1, 1):
                    nxt = list(cur)
                    nxt[ax] = (nxt[ax] + step) % n
                    nxt = tuple(nxt)
                    if mask[nxt] and labels[nxt] < 0:
                        labels[nxt] = count
                        queue.append(nxt)
        count += 1
    return labels, count


def zero_set(amp: np.ndarray, delta: float) -> ZeroSetReport:
    """Cells containing a site with amplitude below delta, with components.

    Monotone in delta: a larger threshold can only add cells.
    """
    if not delta > 0.0:
        raise ValueError(f"threshold delta must be positive (got {delta})")
    site_mask = amp < delta
    cell_mask = np.zeros_like(site_mask)
    for dx in (0, 1):
        for dy in (0, 1):
            for dz in (0, 1):
                cell_mask |= np.roll(site_mask, (-dx, -dy, -dz), axis=(0, 1, 2))
    labels, count = label_cells(cell_mask)
    return ZeroSetReport(float(delta), cell_mask, labels, count)


def site_distances_to_cells(geom: LatticeGeometry, cell_mask: np.ndarray) -> np.ndarray:
    """Distance from every site to the nearest zero-cell center, in physical
    units, using the periodic minimum image per axis."""
    n = geom.N
    centers = np.argwhere(cell_mask) + 0.5
    if centers.shape[0] == 0:
        raise ValueError("empty zero set")
    sites = np.argwhere(np.ones(geom.shape, dtype=bool)).astype(float)
    dist = np.empty(sites.shape[0])
    chunk = 512
    for k in range(0, sites.shape[0], chunk):
        diff = np.abs(sites[k : k + chunk, None, :] - centers[None, :, :])
        diff = np.minimum(diff, n - diff)
        dist[k : k + chunk] = np.sqrt(np.sum(diff * diff, axis=-1)).min(axis=1)
    return dist.reshape(geom.shape) * geom.h


def holder_exponent(
    amp: np.ndarray,
    report: ZeroSetReport,
    geom: LatticeGeometry,
    r_min: float | None = None,
    r_max: float | None = None,
    min_samples: int = 8,
):
    """Least-squares power-law fit of log |Psi| against log dist(., Z).

    The fit runs over sites whose distance to the zero set lies in the
    annulus [r_min, r_max] (defaults [2h, 6h]).  Returns (gamma, R^2);
    a flat amplitude has no power-law structure and reports R^2 = 0.
    Raises on an empty zero set or an annulus with fewer than
    ``min_samples`` usable sites.
    """
    if report.cell_count == 0:
        raise ValueError("empty zero set")
    h = geom.h
    r_min = 2.0 * h if r_min is None else float(r_min)
    r_max = 6.0 * h if r_max is None else float(r_max)
    dist = site_distances_to_cells(geom, report.cell_mask)
    sel = (dist >= r_min) & (dist <= r_max) & (amp > 0.0)
    if int(sel.sum()) < min_samples:
        raise ValueError(
            f"annulus [{r_min:.3g}, {r_max:.3g}] holds only {int(sel.sum())} samples"
            f" (need >= {min_samples})"
        )
    x = np.log(dist[sel])
    y = np.log(amp[sel])
    xc = x - x.mean()
    var = float(np.sum(xc * xc))
    if var == 0.0:
        raise ValueError("degenerate annulus: all samples at one distance")
    gamma = float(np.sum(xc * (y - y.mean())) / var)
    intercept = float(y.mean() - gamma * x.mean())
    ss_res = float(np.sum((y - (gamma * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0.0 else 0.0
    return gamma, r_squared


# ---------------------------------------------------------------------------
# Z/2 monodromy for n = 2


_J = np.array([0.0, 0.0, 1.0, 0.0])


def quotient_representative(psi: np.ndarray) -> np.ndarray:
    """U(1)-invariant quadratic w = psi_1 conj(psi_2) for two-spinor fields.

    Exactly invariant under psi -> psi e^{i theta}: the phase cancels
    between the factor and the conjugated factor.  Used as a chart
    surrogate for the quotient of the moment-map zero level.
    """
    psi = np.asarray(psi)
    if psi.shape[-2] != 2:
        raise ValueError("quotient representative requires n = 2 spinors")
    return quat_mul(psi[..., 0, :], quat_conj(psi[..., 1, :]))


def _validate_loop(loop: np.ndarray, n: int) -> np.ndarray:
    loop = np.mod(np.asarray(loop, dtype=int), n)  # site indices taken mod N
    if loop.ndim != 2 or loop.shape[1] != 3 or loop.shape[0] < 2:
        raise ValueError("loop must be a list of at least two site index triples")
    nxt = np.roll(loop, -1, axis=0)
    step = np.mod(nxt - loop, n)
    ok = (step != 0).sum(axis=1) == 1
    ok &= np.all((step == 0) | (step == 1) | (step == n - 1), axis=1)
    if not bool(np.all(ok)):
        raise ValueError("loop is not a closed path of adjacent lattice sites")
    return loop


def z2_monodromy(
    psi: np.ndarray,
    loop,
    amp_floor: float,
    mu_tol: float = 1e-6,
    resolvability: float = 1e-9,
) -> int:
    """Sign holonomy of the quotient representative along a closed loop.

    For n = 2 with pointwise vanishing moment map, every nonzero spinor
    value is gauge equivalent to the model pair (q, q j) with q determined
    up to sign; the chart phase comes from the unit complex number
    c = -psi_1^{-1} psi_2 j = e^{2 i theta}, whose half angle recovers
    q = psi_1 e^{i theta} up to the residual Z/2.  The sign ambiguity is
    lifted by nearest-neighbor continuity along the loop; the returned
    holonomy is +1 when the lift closes up and -1 when it flips.

    Raises when the loop touches the zero set (amplitude <= ``amp_floor``),
    when the moment map constraint fails, or when successive lifted
    representatives are orthogonal within ``resolvability`` (step angle
    >= pi/2, so the continuation is ambiguous).
    """
    psi = np.asarray(psi)
    if psi.shape[-2] != 2:
        raise ValueError("Z/2 monodromy requires n = 2 spinors")
    n = psi.shape[0]
    loop = _validate_loop(loop, n)

    vals = psi[loop[:, 0], loop[:, 1], loop[:, 2]]  # (T, 2, 4)
    amp2 = np.sum(vals * vals, axis=(-1, -2))
    if np.any(amp2 <= amp_floor**2):
        raise ValueError("loop touches the zero set (amplitude at or below floor)")
    mu = moment_map(vals)
    mu_rel = np.sqrt(np.sum(mu * mu, axis=-1)) / amp2
    if float(mu_rel.max()) > mu_tol:
        raise ValueError(
            f"moment map violation {float(mu_rel.max()):.3e} along loop exceeds {mu_tol:.3e}"
        )

    psi1, psi2 = vals[:, 0, :], vals[:, 1, :]
    inv1 = quat_conj(psi1) / np.sum(psi1 * psi1, axis=-1, keepdims=True)
    c = -quat_mul(quat_mul(inv1, psi2), _J)
    # chart consistency: c must be a unit complex number when mu vanishes
    off = np.sqrt(c[:, 2] ** 2 + c[:, 3] ** 2) / quat_norm(c)
    if float(off.max()) > max(10.0 * mu_tol, 1e-8):
        raise ValueError("quotient chart breakdown: c = -psi1^-1 psi2 j is not complex")
    theta = 0.5 * np.arctan2(c[:, 1], c[:, 0])
    half = np.stack(
        [np.cos(theta), np.sin(theta), np.zeros_like(theta), np.zeros_like(theta)],
        axis=-1,
    )
    rep = quat_mul(psi1, half)
    rep /= quat_norm(rep)[:, None]

    lift = rep[0]
    for t in range(1, rep.shape[0]):
        d = float(np.dot(rep[t], lift))
        if abs(d) <= resolvability:
            raise ValueError("resolvability violated: representative step angle >= pi/2")
        lift = rep[t] if d > 0 else -rep[t]
    d = float(np.dot(rep[0], lift))
    if abs(d) <= resolvability:
        raise ValueError("resolvability violated: representative step angle >= pi/2")
    return 1 if d > 0 else -1


# ---------------------------------------------------------------------------
# homology class of oriented zero curves


@dataclass
class OrientedComponent:
    """A zero-set component with weight data.

    The underlying curve is given either as an ordered closed cell path or
    directly by its wrapping numbers (``winding``) around the three torus
    directions.  ``orientation`` must be +1 or -1 (anything else marks the
    component as unoriented); ``multiplicity`` is a positive integer.
    """

    path: np.ndarray | None = None  # (T, 3) ordered cell indices, implicitly closed
    multiplicity: int = 1
    orientation: int | None = None
    winding: tuple | None = None


def _path_winding(path: np.ndarray, n: int) -> np.ndarray:
    path = np.asarray(path, dtype=int)
    nxt = np.roll(path, -1, axis=0)
    step = np.mod(nxt - path, n)
    moved = (step != 0).sum(axis=1)
    if np.any(moved != 1) or np.any((step != 0) & (step != 1) & (step != n - 1)):
        raise ValueError("component path is not a closed chain of adjacent cells")
    signed = np.where(step == 1, 1, 0) - np.where(step == n - 1, 1, 0)
    net = signed.sum(axis=0)
    if np.any(net % n != 0):
        raise ValueError("component path does not close up on the torus")
    return net // n


def zero_set_class(components, n: int):
    """Pairing of the weighted zero curves with the three coordinate 2-tori.

    Sums multiplicity * orientation * (wrapping numbers) over the oriented
    components; the wrapping number along axis i equals the signed count of
    crossings of a transverse coordinate 2-torus.  Raises when a component
    is unoriented or carries a nonpositive multiplicity.
    """
    total = np.zeros(3, dtype=int)
    for comp in components:
        if comp.orientation not in (1, -1):
            raise ValueError("unoriented component present")
        mult = int(comp.multiplicity)
        if mult < 1:
            raise ValueError(f"multiplicity must be a positive integer (got {mult})")
        if comp.path is not None:
            winding = _path_winding(comp.path, n)
        elif comp.winding is not None:
            winding = np.asarray(comp.winding, dtype=int)
        else:
            raise ValueError("component carries neither a path nor a winding")
        total += mult * comp.orientation * winding
    return tuple(int(k) for k in total)


def _winding_from_discrepancies(discs):
    """Generator of the subgroup of Z^3 spanned by loop discrepancies.

    Returns (0, 0, 0) for a contractible component, the (sign-canonical)
    generator for a circle-like component, and None when the discrepancies
    span a rank >= 2 subgroup (no single wrapping direction exists).
    """
    nonzero = [d for d in discs if np.any(d)]
    if not nonzero:
        return (0, 0, 0)
    d0 = nonzero[0]
    p = d0 // np.gcd.reduce(np.abs(d0[d0 != 0]))
    pivot = int(np.argmax(p != 0))
    multipliers = []
    for d in nonzero:
        if d[pivot] % p[pivot] != 0:
            return None
        k = d[pivot] // p[pivot]
        if np.any(d != k * p):
            return None
        multipliers.append(abs(int(k)))
    w = int(np.gcd.reduce(multipliers)) * p
    if w[np.argmax(w != 0)] < 0:
        w = -w
    return tuple(int(v) for v in w)


def component_windings(report: ZeroSetReport) -> dict:
    """Homological wrapping numbers per component, up to overall sign.

    Lifts each component to the universal cover by a breadth-first walk:
    whenever the walk meets an already lifted neighbor, the mismatch of the
    two lifts is a multiple of N times the component's wrapping vector.
    Works for thick (tubular) components where no single cell path exists;
    the sign is fixed canonically (first nonzero entry positive) and the
    physical orientation stays supplied metadata.  Components wrapping more
    than one independent torus direction map to None.
    """
    n = report.labels.shape[0]
    out = {}
    for lab in range(report.component_count):
        cells = [tuple(c) for c in np.argwhere(report.labels == lab)]
        lifts = {cells[0]: np.zeros(3, dtype=int)}
        queue = deque([cells[0]])
        cellset = set(cells)
        discs = []
        while queue:
            cur = queue.popleft()
            for ax in range(3):
                for step in (-1, 1):
                    nxt = list(cur)
                    nxt[ax] = (nxt[ax] + step) % n
                    nxt = tuple(nxt)
                    if nxt not in cellset:
                        continue
                    lift = lifts[cur].copy()
                    lift[ax] += step
                    if nxt in lifts:
                        diff = lifts[nxt] - lift
                        if np.any(diff % n != 0):
                            raise AssertionError("universal cover lift mismatch")
                        discs.append(diff // n)
                    else:
                        lifts[nxt] = lift
                        queue.append(nxt)
        out[lab] = _winding_from_discrepancies(discs)
    return out


def component_cycle_paths(report: ZeroSetReport) -> dict:
    """Ordered closed paths for components that are simple cycles.

    A component qualifies when every cell has exactly two 6-neighbors
    inside the component and one walk visits all of it; other components
    map to None (no canonical ordering exists for thick components).
    The walk starts at the lexicographically smallest cell and first moves
    to its smallest neighbor, so the result is deterministic.
    """
    n = report.labels.shape[0]
    out = {}
    for lab in range(report.component_count):
        cells = [tuple(c) for c in np.argwhere(report.labels == lab)]
        cellset = set(cells)
        neighbors = {}
        simple = True
        for cell in cells:
            nbrs = []
            for ax in range(3):
                for step in (-1, 1):
                    other = list(cell)
                    other[ax] = (other[ax] + step) % n
                    other = tuple(other)
                    if other in cellset:
                        nbrs.append(other)
            if len(nbrs) != 2:
                simple = False
                break
            neighbors[cell] = sorted(nbrs)
        if not simple or len(cells) < 3:
            out[lab] = None
            continue
        start = min(cells)
        path = [start]
        prev, cur = start, neighbors[start][0]
        while cur != start:
            path.append(cur)
            a, b = neighbors[cur]
            prev, cur = cur, (b if a == prev else a)
        out[lab] = np.asarray(path, dtype=int) if len(path) == len(cells) else None
    return out
