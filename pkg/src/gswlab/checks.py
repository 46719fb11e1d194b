"""Self-contained property suite behind the ``check`` subcommand.

Each check exercises one identity the rest of the package relies on, with
an explicit tolerance; the suite runs on small seeded-random data and is
deterministic.  ``perturb_moment_map`` deliberately skews one component of
the moment map inside the convention check, a negative control used to
verify that failures are detected and named.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import snapshot as snapshot_io
from .lattice import (
    LatticeGeometry,
    gauge_transform,
    l2_norm,
    normalize,
    plaquette_angles,
    random_background,
    wrap_angle,
)
from .quat import (
    apply_complex_structure,
    killing_field,
    moment_map,
    quat_conj,
    quat_mul,
    quat_norm,
    rescale,
)
from .solver import (
    blowup_residual,
    dirac_residual,
    energy,
    energy_gradient,
    sw_residual,
)

__all__ = ["CheckResult", "run_checks"]

_SEED = 20240811


@dataclass
class CheckResult:
    name: str
    tolerance: float
    max_error: float
    passed: bool


def _result(name, tol, err):
    return CheckResult(name, tol, float(err), bool(err < tol))


def _rel(a, b):
    scale = np.maximum(np.abs(a), np.abs(b))
    return np.max(np.abs(a - b) / np.where(scale > 0, scale, 1.0))


def _random_instance(rng, geom, n, link_scale=0.2):
    links = wrap_angle(link_scale * rng.uniform(-np.pi, np.pi, geom.shape + (3,)))
    psi = normalize(geom, rng.standard_normal(geom.shape + (n, 4)))
    background = random_background(geom, n, rng)
    return links, psi, background


def _hermitian_moment(psi):
    """Independent oracle: traceless-Hermitian convention on C^2 columns,
    mapped through the frozen rotation (m1, m2, m3) -> (m1, m3, -m2)."""
    z1 = psi[..., 0] + 1j * psi[..., 1]
    z2 = psi[..., 2] - 1j * psi[..., 3]
    t11 = 0.5 * (np.abs(z1) ** 2 - np.abs(z2) ** 2).sum(axis=-1)
    t12 = (z1 * np.conj(z2)).sum(axis=-1)
    return np.stack([t11, t12.imag, -t12.real], axis=-1)


def run_checks(perturb_moment_map: bool = False) -> list[CheckResult]:
    rng = np.random.default_rng(_SEED)
    results = []

    # quaternion algebra
    p = rng.standard_normal((1000, 4))
    q = rng.standard_normal((1000, 4))
    err = _rel(quat_norm(quat_mul(p, q)), quat_norm(p) * quat_norm(q))
    results.append(_result("quaternion_norm_multiplicativity", 1e-12, err))
    err = _rel(quat_conj(quat_mul(p, q)), quat_mul(quat_conj(q), quat_conj(p)))
    results.append(_result("quaternion_conjugation_antihomomorphism", 1e-12, err))

    v = rng.standard_normal((1000, 2, 4))
    v /= quat_norm(v)[..., None]
    err = 0.0
    for a, b, c in ((1, 2, 3), (2, 3, 1), (3, 1, 2)):
        err = max(
            err,
            np.abs(
                apply_complex_structure(a, apply_complex_structure(b, v))
                - apply_complex_structure(c, v)
            ).max(),
        )
    for a in (1, 2, 3):
        err = max(
            err,
            np.abs(apply_complex_structure(a, apply_complex_structure(a, v)) + v).max(),
        )
    results.append(_result("complex_structure_quaternion_relations", 1e-15, err))

    # moment map identities
    psi = rng.standard_normal((500, 3, 4))
    mu = moment_map(psi)
    if perturb_moment_map:
        mu = mu * np.array([1.0, 1.0, 1.0 + 1e-3])
    results.append(
        _result("moment_map_convention_vs_hermitian", 1e-12, _rel(mu, _hermitian_moment(psi)))
    )
    theta = rng.uniform(-np.pi, np.pi, (500, 1, 1))
    phase = np.concatenate(
        [np.cos(theta), np.sin(theta), np.zeros_like(theta), np.zeros_like(theta)], axis=-1
    )
    results.append(
        _result("moment_map_u1_invariance", 1e-12, _rel(moment_map(quat_mul(psi, phase)), moment_map(psi)))
    )
    r = rng.uniform(0.1, 10.0, (500, 1))
    results.append(
        _result(
            "moment_map_degree_two_homogeneity",
            1e-12,
            _rel(moment_map(r[..., None] * psi), r**2 * moment_map(psi)),
        )
    )
    step = 1e-5
    fd = (moment_map(psi + step * killing_field(1.0, psi)) - moment_map(psi - step * killing_field(1.0, psi))) / (2 * step)
    scale = float(np.max(np.sum(psi * psi, axis=(-1, -2))))
    results.append(_result("killing_field_moment_map_tangency", 1e-9, np.abs(fd).max() / scale))

    # lattice / residual identities on a 4^3, n = 2 instance
    geom = LatticeGeometry(4, 4.0)
    n = 2
    links, psi, background = _random_instance(rng, geom, n)

    err = 0.0
    for _ in range(10):
        r = float(rng.uniform(0.5, 2.0))
        d1, c1 = sw_residual(geom, links, background, psi, 1.0)
        a2, u2, eps = rescale(links, psi, r)
        d2, c2 = sw_residual(geom, a2, background, u2, eps)
        err = max(err, np.abs(d2 - d1 / r).max(), np.abs(c2 - c1 / r**2).max())
    results.append(_result("rescale_identity_componentwise", 1e-12, err))

    phi = normalize(geom, rng.standard_normal(geom.shape + (n, 4)))
    lhs = geom.h**3 * np.sum(dirac_residual(geom, links, background, phi) * psi)
    rhs = geom.h**3 * np.sum(phi * dirac_residual(geom, links, background, psi))
    results.append(_result("dirac_operator_symmetry", 1e-12, abs(lhs - rhs) / max(abs(lhs), 1e-300)))

    alpha = 0.6
    e0 = energy(geom, links, background, psi, alpha)
    d0 = dirac_residual(geom, links, background, psi)
    _, _, c0 = blowup_residual(geom, links, background, psi, alpha)
    err = 0.0
    for _ in range(10):
        g = rng.uniform(-np.pi, np.pi, geom.shape)
        glinks, gpsi = gauge_transform(g, links, psi)
        err = max(err, abs(energy(geom, glinks, background, gpsi, alpha) - e0) / e0)
        dg = dirac_residual(geom, glinks, background, gpsi)
        err = max(
            err,
            abs(l2_norm(geom, dg) - l2_norm(geom, d0)) / l2_norm(geom, d0),
        )
        _, _, cg = blowup_residual(geom, glinks, background, gpsi, alpha)
        err = max(err, abs(float(np.sqrt(np.sum(cg**2))) - float(np.sqrt(np.sum(c0**2)))) / float(np.sqrt(np.sum(c0**2))))
    results.append(_result("gauge_invariance_energy_and_residuals", 1e-12, err))

    g_links, g_psi = energy_gradient(geom, links, background, psi, alpha)
    err = 0.0
    fd_step = 1e-5
    for _ in range(10):
        dl = rng.standard_normal(links.shape)
        dp = rng.standard_normal(psi.shape)
        dp -= np.sum(dp * psi) / np.sum(psi * psi) * psi
        scale = np.sqrt(np.sum(dl * dl) + np.sum(dp * dp))
        dl, dp = dl / scale, dp / scale
        ep = energy(geom, links + fd_step * dl, background, psi + fd_step * dp, alpha)
        em = energy(geom, links - fd_step * dl, background, psi - fd_step * dp, alpha)
        fd = (ep - em) / (2 * fd_step)
        an = float(np.sum(g_links * dl) + np.sum(g_psi * dp))
        err = max(err, abs(fd - an) / max(abs(fd), abs(an)))
    results.append(_result("energy_gradient_vs_finite_differences", 1e-6, err))

    plaq = plaquette_angles(links)
    cube = sum(np.roll(plaq[..., d], -1, axis=d) - plaq[..., d] for d in range(3))
    defect = np.abs(cube - 2 * np.pi * np.rint(cube / (2 * np.pi))).max()
    results.append(_result("cube_bianchi_sum_mod_2pi", 1e-10, defect))

    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "roundtrip.gsw"
        snapshot_io.write_snapshot(path, geom, n, alpha, links, psi, background)
        snap = snapshot_io.read_snapshot(path)
        exact = (
            np.array_equal(snap.links, links)
            and np.array_equal(snap.psi, psi)
            and np.array_equal(snap.background, background)
        )
    results.append(_result("snapshot_bit_exact_roundtrip", 1.0, 0.0 if exact else 1.0))

    return results


def format_table(results: list[CheckResult]) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  {'tolerance':>10}  {'max error':>12}  status"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.name:<{width}}  {r.tolerance:>10.1e}  {r.max_error:>12.3e}  {status}")
    return "\n".join(lines)
