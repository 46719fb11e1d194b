"""Residuals, energies and a variational solver for the coupled system

    D_{A x B} Psi = 0,      sin(alpha)^2 F_A = cos(alpha)^2 mu(Psi),
    ||Psi||_{L^2} = 1,

on the periodic lattice, together with the eps-parameterized family
eps^2 F_a = mu(u) (eps = tan alpha; eps = 1 is the unscaled system, eps = 0
keeps only the moment map constraint).

The solver minimizes the least-squares energy

    E = 1/2 ||D Psi||^2 + 1/2 ||sin(alpha)^2 F - cos(alpha)^2 mu(Psi)||^2

by projected gradient descent with a backtracking Armijo line search; the
norm constraint is enforced by renormalizing Psi to the unit L^2 sphere
after every step (projection, not penalty).  Defaults, documented here and
used by the command line driver unless overridden: tol = 1e-10 on the
energy, max_iter = 50000, Armijo constant 1e-4, backtracking factor 1/2,
initial step 1.0, step floor 1e-14 (reaching it reports
``line_search_failure``), random links uniform in (-pi, pi] scaled by
``init_link_amplitude`` (default 0.1), spinors standard normal per
coefficient and then normalized.

Gradient evaluations use fixed-order numpy reductions, so repeated runs
with the same seed produce bit-identical traces on a given platform.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .lattice import (
    LatticeGeometry,
    amplitude,
    check_same_geometry,
    curvature,
    dirac_of_transports,
    l2_norm,
    normalize,
    transport_from_negative,
    transport_from_positive,
    wrap_angle,
)
from .quat import apply_complex_structure, moment_map, quat_mul, right_mul_i

__all__ = [
    "SolveOptions",
    "SolveReport",
    "ContinuationState",
    "dirac_residual",
    "sw_residual",
    "blowup_residual",
    "energy",
    "energy_gradient",
    "solve",
    "continue_alpha",
    "random_initial_state",
]


@dataclass
class SolveOptions:
    max_iter: int = 50000
    tol: float = 1e-10
    armijo_c: float = 1e-4
    backtrack: float = 0.5
    initial_step: float = 1.0
    step_floor: float = 1e-14
    min_amp_flag: float = 1e-8


@dataclass
class SolveReport:
    status: str  # "converged" | "max_iterations" | "line_search_failure"
    alpha: float
    links: np.ndarray
    psi: np.ndarray
    energy_trace: np.ndarray
    iterations: int
    wall_time: float
    flagged_min_amp: bool = False


@dataclass
class ContinuationState:
    """One rung of the alpha-continuation ladder."""

    alpha: float
    eps: float
    links: np.ndarray
    psi: np.ndarray
    residual_norm: float
    min_amplitude: float
    iterations: int
    status: str


def _transports(links, background, psi):
    fwd = [transport_from_positive(links, background, psi, ax) for ax in range(3)]
    bwd = [transport_from_negative(links, background, psi, ax) for ax in range(3)]
    return fwd, bwd


def dirac_residual(geom: LatticeGeometry, links, background, psi) -> np.ndarray:
    """Twisted quaternionic Dirac operator sum_j I_j grad_j applied to psi.

    Linear in psi and symmetric with respect to the lattice L^2 product
    (centered stencil); vanishes on covariantly constant fields over flat
    links and identity background.
    """
    check_same_geometry(geom, links, background, psi)
    fwd, bwd = _transports(links, background, psi)
    return dirac_of_transports(geom, fwd, bwd)


def sw_residual(geom: LatticeGeometry, links, background, psi, eps: float):
    """Residual pair of the eps-parameterized system.

    Returns (D Psi, eps^2 F - mu(Psi)); at eps = 0 the second component is
    -mu(Psi), the limit constraint.
    """
    eps = float(eps)
    if eps < 0.0:
        raise ValueError(f"eps must be nonnegative (got {eps})")
    d = dirac_residual(geom, links, background, psi)
    constraint = eps**2 * curvature(geom, links) - moment_map(psi)
    return d, constraint


def blowup_residual(geom: LatticeGeometry, links, background, psi, alpha: float):
    """Residual triple of the blown-up system at mixing angle alpha.

    Returns (||Psi|| - 1, D Psi, sin(alpha)^2 F - cos(alpha)^2 mu(Psi)).
    The norm deviation is reported, never raised.
    """
    alpha = _check_alpha(alpha)
    d = dirac_residual(geom, links, background, psi)
    s2, c2 = np.sin(alpha) ** 2, np.cos(alpha) ** 2
    constraint = s2 * curvature(geom, links) - c2 * moment_map(psi)
    return l2_norm(geom, psi) - 1.0, d, constraint


def _check_alpha(alpha) -> float:
    alpha = float(alpha)
    if not 0.0 <= alpha <= np.pi / 2:
        raise ValueError(f"alpha must lie in [0, pi/2] (got {alpha})")
    return alpha


def _residuals(geom, links, background, psi, alpha):
    fwd, bwd = _transports(links, background, psi)
    d = dirac_of_transports(geom, fwd, bwd)
    s2, c2 = np.sin(alpha) ** 2, np.cos(alpha) ** 2
    r = s2 * curvature(geom, links) - c2 * moment_map(psi)
    return d, r, fwd, bwd


def _quadratic_energy(geom, d, r) -> float:
    return 0.5 * geom.h**3 * float(np.sum(d * d) + np.sum(r * r))


def energy(geom: LatticeGeometry, links, background, psi, alpha: float) -> float:
    """Least-squares energy; nonnegative, zero exactly on solutions of the
    blown-up system (the unit-norm constraint is handled by projection)."""
    alpha = _check_alpha(alpha)
    check_same_geometry(geom, links, background, psi)
    d, r, _, _ = _residuals(geom, links, background, psi, alpha)
    return _quadratic_energy(geom, d, r)


def _energy_and_gradient(geom, links, background, psi, alpha):
    """Energy plus its coefficientwise partial derivatives.

    The link gradient collects the curvature coupling (each link enters
    four plaquettes of its two incident planes) and the phase dependence of
    the Dirac transports; the spinor gradient is D(D Psi) plus the moment
    map back-coupling R psi_k i, projected L^2-orthogonally to psi so that
    descent directions are tangent to the unit sphere.
    """
    h = geom.h
    h3 = h**3
    s2, c2 = np.sin(alpha) ** 2, np.cos(alpha) ** 2
    d, r, fwd, bwd = _residuals(geom, links, background, psi, alpha)
    e = _quadratic_energy(geom, d, r)

    # spinor gradient
    r_quat = np.concatenate([np.zeros(r.shape[:3] + (1,)), r], axis=-1)[..., None, :]
    g_psi = h3 * (
        dirac_residual(geom, links, background, d)
        + c2 * right_mul_i(quat_mul(r_quat, psi))
    )
    g_psi = g_psi - (np.sum(g_psi * psi) / np.sum(psi * psi)) * psi

    # link gradient
    g_links = np.empty_like(links)
    for ax in range(3):
        b, c = (ax + 1) % 3, (ax + 2) % 3
        f_part = (s2 * h) * (
            np.roll(r[..., b], 1, axis=c)
            - r[..., b]
            + r[..., c]
            - np.roll(r[..., c], 1, axis=b)
        )
        gp = np.sum(d * apply_complex_structure(ax + 1, right_mul_i(fwd[ax])), axis=(-1, -2))
        gm = np.sum(d * apply_complex_structure(ax + 1, right_mul_i(bwd[ax])), axis=(-1, -2))
        d_part = -(h * h / 2.0) * (gp + np.roll(gm, -1, axis=ax))
        g_links[..., ax] = f_part + d_part
    return e, g_links, g_psi


def energy_gradient(geom: LatticeGeometry, links, background, psi, alpha: float):
    """Analytic first variation of the energy in (links, psi).

    Returns (link cotangent field, spinor gradient field) holding plain
    partial derivatives per stored coefficient; the spinor component is
    projected orthogonal to psi (sphere constraint).  Matches central
    finite differences of ``energy`` for perturbation directions tangent
    to the sphere.
    """
    alpha = _check_alpha(alpha)
    check_same_geometry(geom, links, background, psi)
    _, g_links, g_psi = _energy_and_gradient(geom, links, background, psi, alpha)
    return g_links, g_psi


def solve(
    geom: LatticeGeometry,
    background,
    links,
    psi,
    alpha: float,
    options: SolveOptions | None = None,
    callback=None,
) -> SolveReport:
    """Projected gradient descent on the unit L^2 sphere.

    ``callback``, if given, is invoked after every accepted step as
    callback(iteration, energy, step, min_amp).  The energy trace is
    strictly decreasing over accepted steps; termination happens when the
    energy drops below ``options.tol`` ("converged"), the iteration budget
    is exhausted ("max_iterations"), or no step above the floor decreases
    the energy ("line_search_failure", also reported for an exactly
    stationary nonconverged point).
    """
    opts = options or SolveOptions()
    alpha = _check_alpha(alpha)
    check_same_geometry(geom, links, background, psi)
    if l2_norm(geom, psi) <= 0.0:
        raise ValueError("initial spinor field must be nonzero")

    t0 = time.perf_counter()
    links = wrap_angle(links)
    psi = normalize(geom, psi)
    flagged = bool(amplitude(psi).min() < opts.min_amp_flag)

    e, g_links, g_psi = _energy_and_gradient(geom, links, background, psi, alpha)
    trace = [e]
    steps = 0
    status = None
    while True:
        if e < opts.tol:
            status = "converged"
            break
        if steps >= opts.max_iter:
            status = "max_iterations"
            break
        gnorm2 = float(np.sum(g_links * g_links) + np.sum(g_psi * g_psi))
        if gnorm2 == 0.0:
            status = "line_search_failure"
            break
        step = opts.initial_step
        accepted = False
        while step >= opts.step_floor:
            new_links = wrap_angle(links - step * g_links)
            new_psi = normalize(geom, psi - step * g_psi)
            e_new = energy(geom, new_links, background, new_psi, alpha)
            if e_new <= e - opts.armijo_c * step * gnorm2:
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            status = "line_search_failure"
            break
        links, psi = new_links, new_psi
        steps += 1
        trace.append(e_new)
        min_amp = float(amplitude(psi).min())
        flagged = flagged or min_amp < opts.min_amp_flag
        if callback is not None:
            callback(steps, e_new, step, min_amp)
        e, g_links, g_psi = _energy_and_gradient(geom, links, background, psi, alpha)

    return SolveReport(
        status=status,
        alpha=alpha,
        links=links,
        psi=psi,
        energy_trace=np.asarray(trace),
        iterations=steps,
        wall_time=time.perf_counter() - t0,
        flagged_min_amp=flagged,
    )


def validate_schedule(schedule) -> np.ndarray:
    schedule = np.asarray(schedule, dtype=float)
    if schedule.ndim != 1 or schedule.size == 0:
        raise ValueError("schedule must be a nonempty sequence of angles")
    if np.any(schedule < 0.0) or np.any(schedule >= np.pi / 2):
        raise ValueError("schedule entries must lie within [0, pi/2)")
    if schedule.size > 1 and np.any(np.diff(schedule) >= 0.0):
        raise ValueError("schedule must be strictly decreasing")
    return schedule


def continue_alpha(
    geom: LatticeGeometry,
    background,
    schedule,
    links,
    psi,
    options: SolveOptions | None = None,
    callback=None,
) -> list[ContinuationState]:
    """Run the solver down a strictly decreasing alpha schedule.

    Each rung is warm-started from the previous solution.  A rung ending in
    ``line_search_failure`` halts the ladder; the failed rung is still
    recorded, so the returned list holds partial results.  Rungs that stop
    at the iteration budget are kept and continued from, matching the
    warm-start contract.
    """
    schedule = validate_schedule(schedule)
    states: list[ContinuationState] = []
    for alpha in schedule:
        report = solve(geom, background, links, psi, float(alpha), options, callback)
        final_e = float(report.energy_trace[-1])
        states.append(
            ContinuationState(
                alpha=float(alpha),
                eps=float(np.tan(alpha)),
                links=report.links,
                psi=report.psi,
                residual_norm=float(np.sqrt(2.0 * final_e)),
                min_amplitude=float(amplitude(report.psi).min()),
                iterations=report.iterations,
                status=report.status,
            )
        )
        if report.status == "line_search_failure":
            break
        links, psi = report.links, report.psi
    return states


def random_initial_state(
    geom: LatticeGeometry, n: int, seed: int, link_amplitude: float = 0.1
):
    """Seeded random configuration: links uniform in (-pi, pi] scaled by
    ``link_amplitude``, spinor coefficients standard normal then normalized
    to the unit L^2 sphere."""
    rng = np.random.default_rng(seed)
    links = wrap_angle(link_amplitude * rng.uniform(-np.pi, np.pi, geom.shape + (3,)))
    psi = rng.standard_normal(geom.shape + (n, 4))
    return links, normalize(geom, psi)
