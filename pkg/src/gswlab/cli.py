"""Command line driver.

Subcommands:

    gswlab solve    --config CFG [--out DIR] [--seed U64] [--quiet]
    gswlab continue --config CFG [--out DIR] [--seed U64] [--quiet]
    gswlab analyze  SNAPSHOT [--config CFG] [--out DIR] [--quiet]
    gswlab check    [--quiet]

Exit codes: 0 success, 1 failed self check, 2 invalid configuration,
3 solver failure (line search below the step floor), 4 continuation halted
mid-schedule (partial artifacts are kept), 5 unreadable or corrupt
snapshot.  Failures print a machine-readable line starting with "ERROR:".

Artifacts are deterministic for a fixed config and seed: CSV files carry
17-significant-digit decimals and are bit-identical across reruns on the
same platform.  The continuation report also renders an SVG figure of
min |Psi| against eps next to the summary CSV.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    OrientedComponent,
    component_windings,
    holder_exponent,
    z2_monodromy,
    zero_set,
    zero_set_class,
)
from .checks import format_table, run_checks
from .config import AnalysisConfig, ConfigError, RunConfig, load_analysis_config, load_config
from .lattice import amplitude, identity_background
from .snapshot import SnapshotError, read_snapshot, write_snapshot
from .solver import continue_alpha, random_initial_state, solve

__all__ = ["main"]


def _fmt(x) -> str:
    return format(float(x), ".17g")


def _say(quiet: bool, *parts):
    if not quiet:
        print(*parts)


def _fail(code: int, message: str) -> int:
    print(f"ERROR: {message}", file=sys.stderr)
    return code


def _write_lines(path: Path, lines):
    path.write_text("\n".join(lines) + "\n")


def _write_manifest(out_dir: Path, command: str, cfg: RunConfig | None, seed, extra):
    payload = {
        "command": command,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "seed": seed,
        "config_echo": cfg.raw_text if cfg is not None else None,
        **extra,
    }
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True))


def _load_background(cfg: RunConfig):
    if cfg.background_source == "identity":
        return identity_background(cfg.geom, cfg.n)
    path = cfg.background_source[len("file:") :]
    try:
        snap = read_snapshot(path)
    except OSError as exc:
        raise SnapshotError(f"cannot read background file {path}: {exc}") from exc
    if snap.geom != cfg.geom or snap.n != cfg.n:
        raise ConfigError(
            f"background file {path} holds geometry N={snap.geom.N}, n={snap.n},"
            f" expected N={cfg.geom.N}, n={cfg.n}"
        )
    return snap.background


def _prepare_run(args):
    if args.config is None:
        raise ConfigError("a configuration file is required (--config PATH)")
    cfg = load_config(args.config)
    seed = args.seed if args.seed is not None else cfg.seed
    out = args.out if args.out is not None else cfg.out_dir
    if out is None:
        raise ConfigError("an output directory is required ([output] directory or --out)")
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return cfg, seed, out_dir


# ---------------------------------------------------------------------------
# solve


def cmd_solve(args) -> int:
    try:
        cfg, seed, out_dir = _prepare_run(args)
        background = _load_background(cfg)
    except ConfigError as exc:
        return _fail(2, str(exc))
    except SnapshotError as exc:
        return _fail(5, str(exc))

    t0 = time.perf_counter()
    links, psi = random_initial_state(cfg.geom, cfg.n, seed, cfg.init_link_amplitude)
    rows = []

    def record(iteration, e, step, min_amp):
        rows.append(f"{iteration},{_fmt(e)},{_fmt(step)},{_fmt(min_amp)}")

    alpha = float(cfg.schedule[0])
    report = solve(cfg.geom, background, links, psi, alpha, cfg.options, callback=record)
    rows.insert(0, f"0,{_fmt(report.energy_trace[0])},{_fmt(0.0)},{_fmt(amplitude(psi).min())}")

    write_snapshot(out_dir / "snapshot.gsw", cfg.geom, cfg.n, alpha, report.links, report.psi, background)
    _write_lines(out_dir / "diagnostics.csv", ["iter,energy,step,min_amp"] + rows)
    _write_manifest(
        out_dir,
        "solve",
        cfg,
        seed,
        {
            "alpha": alpha,
            "status": report.status,
            "iterations": report.iterations,
            "final_energy": float(report.energy_trace[-1]),
            "flagged_min_amp": report.flagged_min_amp,
            "wall_time_s": time.perf_counter() - t0,
            "artifacts": ["snapshot.gsw", "diagnostics.csv", "manifest.json"],
        },
    )
    _say(
        args.quiet,
        f"solve: status={report.status} iterations={report.iterations}"
        f" energy={report.energy_trace[-1]:.6e}",
    )
    if report.status == "line_search_failure":
        return _fail(3, "solver failure: line search step fell below the floor")
    return 0


# ---------------------------------------------------------------------------
# continue


def cmd_continue(args) -> int:
    try:
        cfg, seed, out_dir = _prepare_run(args)
        background = _load_background(cfg)
    except ConfigError as exc:
        return _fail(2, str(exc))
    except SnapshotError as exc:
        return _fail(5, str(exc))

    t0 = time.perf_counter()
    links, psi = random_initial_state(cfg.geom, cfg.n, seed, cfg.init_link_amplitude)
    states = continue_alpha(cfg.geom, background, cfg.schedule, links, psi, cfg.options)

    rows = []
    eps_values, min_amps = [], []
    for k, state in enumerate(states):
        if state.status == "line_search_failure":
            continue
        write_snapshot(
            out_dir / f"rung{k:03d}.gsw",
            cfg.geom,
            cfg.n,
            state.alpha,
            state.links,
            state.psi,
            background,
        )
        amp = amplitude(state.psi)
        delta = cfg.analysis.delta_for(float(amp.max()))
        zero_cells = zero_set(amp, delta).cell_count if delta > 0 else 0
        energy_final = 0.5 * state.residual_norm**2
        rows.append(
            f"{_fmt(state.alpha)},{_fmt(state.eps)},{_fmt(energy_final)},"
            f"{_fmt(state.residual_norm)},{_fmt(state.min_amplitude)},{zero_cells}"
        )
        eps_values.append(state.eps)
        min_amps.append(state.min_amplitude)
        _say(
            args.quiet,
            f"rung {k}: alpha={state.alpha:.6f} eps={state.eps:.6f}"
            f" status={state.status} residual={state.residual_norm:.6e}",
        )

    _write_lines(
        out_dir / "summary.csv",
        ["alpha,eps,energy,residual,min_amp,zero_cells"] + rows,
    )
    if eps_values:
        from .plots import save_min_amp_plot

        save_min_amp_plot(out_dir / "min_amp_vs_eps.svg", eps_values, min_amps)
    completed = sum(1 for s in states if s.status != "line_search_failure")
    _write_manifest(
        out_dir,
        "continue",
        cfg,
        seed,
        {
            "schedule": [float(a) for a in cfg.schedule],
            "rung_statuses": [s.status for s in states],
            "completed_rungs": completed,
            "wall_time_s": time.perf_counter() - t0,
            "artifacts": [f"rung{k:03d}.gsw" for k in range(completed)]
            + ["summary.csv", "min_amp_vs_eps.svg", "manifest.json"],
        },
    )
    if completed < len(cfg.schedule):
        return _fail(
            4,
            f"continuation halted after {completed} of {len(cfg.schedule)} rungs;"
            " partial artifacts kept",
        )
    return 0


# ---------------------------------------------------------------------------
# analyze


def _class_from_config(report, analysis: AnalysisConfig):
    """Oriented components from homological winding plus supplied metadata.

    Orientations are read relative to the canonical winding sign (first
    nonzero wrapping entry positive).
    """
    orientations = analysis.component_orientations
    if orientations is None:
        return None, "unavailable: no component orientations supplied"
    if len(orientations) != report.component_count:
        return None, (
            f"unavailable: {len(orientations)} orientations supplied for"
            f" {report.component_count} components"
        )
    mults = analysis.component_multiplicities or [1] * report.component_count
    if len(mults) != report.component_count:
        return None, "unavailable: multiplicity count does not match components"
    windings = component_windings(report)
    components = []
    for lab in range(report.component_count):
        if windings[lab] is None:
            return None, f"unavailable: component {lab} wraps several torus directions"
        components.append(
            OrientedComponent(winding=windings[lab], multiplicity=mults[lab], orientation=orientations[lab])
        )
    try:
        return zero_set_class(components, report.labels.shape[0]), None
    except ValueError as exc:
        return None, f"unavailable: {exc}"


def cmd_analyze(args) -> int:
    try:
        analysis = load_analysis_config(args.config)
    except ConfigError as exc:
        return _fail(2, str(exc))
    try:
        snap = read_snapshot(args.snapshot)
    except (SnapshotError, OSError) as exc:
        return _fail(5, f"cannot read snapshot {args.snapshot}: {exc}")

    out_dir = Path(args.out) if args.out is not None else Path(args.snapshot).parent
    out_dir.mkdir(parents=True, exist_ok=True)

    amp = amplitude(snap.psi)
    amp_max = float(amp.max())
    delta = analysis.delta_for(amp_max)
    lines = [
        "# zero set analysis",
        f"snapshot = {args.snapshot}",
        f"N = {snap.geom.N}",
        f"L = {_fmt(snap.geom.L)}",
        f"n = {snap.n}",
        f"alpha = {_fmt(snap.alpha)}",
        f"delta = {_fmt(delta)}",
    ]

    report = zero_set(amp, delta) if delta > 0 else None
    if report is None:
        lines.append("zero_cells = 0")
        lines.append("components = 0")
    else:
        lines.append(f"zero_cells = {report.cell_count}")
        lines.append(f"components = {report.component_count}")

    h = snap.geom.h
    if report is not None and report.cell_count > 0:
        try:
            gamma, r2 = holder_exponent(
                amp,
                report,
                snap.geom,
                r_min=analysis.holder_rmin * h,
                r_max=analysis.holder_rmax * h,
            )
            report.holder = (gamma, r2)
            report.holder_ok = r2 >= analysis.holder_r2_min
            lines.append(f"holder_gamma = {_fmt(gamma)}")
            lines.append(f"holder_r2 = {_fmt(r2)}")
            lines.append(f"holder_ok = {'true' if report.holder_ok else 'false'}")
        except ValueError as exc:
            lines.append(f"holder = unavailable: {exc}")
    else:
        lines.append("holder = unavailable: empty zero set")

    amp_floor = analysis.amp_floor_rel * amp_max
    for k, loop in enumerate(analysis.loops):
        if snap.n != 2:
            lines.append(f"monodromy_loop{k} = error: requires n = 2")
            continue
        try:
            sign = z2_monodromy(snap.psi, loop, amp_floor, mu_tol=analysis.mu_tol)
            if report is not None:
                report.monodromies.append((k, sign))
            lines.append(f"monodromy_loop{k} = {sign:+d}")
        except ValueError as exc:
            lines.append(f"monodromy_loop{k} = error: {exc}")

    if report is None or report.cell_count == 0:
        lines.append("class = 0 0 0")
    else:
        klass, reason = _class_from_config(report, analysis)
        if klass is None:
            lines.append(f"class = {reason}")
        else:
            report.homology_class = klass
            lines.append(f"class = {klass[0]} {klass[1]} {klass[2]}")

    lines.append("cells:")
    lines.append("x1 x2 x3 component")
    if report is not None:
        for cell in report.cells():
            c = tuple(int(v) for v in cell)
            lines.append(f"{c[0]} {c[1]} {c[2]} {int(report.labels[c])}")

    _write_lines(out_dir / "report.txt", lines)
    config_echo = Path(args.config).read_text() if args.config else None
    payload = {
        "command": "analyze",
        "package_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "snapshot": str(args.snapshot),
        "config_echo": config_echo,
        "artifacts": ["report.txt", "manifest.json"],
    }
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True))
    _say(args.quiet, f"analyze: report written to {out_dir / 'report.txt'}")
    return 0


# ---------------------------------------------------------------------------
# check


def cmd_check(args) -> int:
    results = run_checks(perturb_moment_map=args.perturb_moment_map)
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    if failed:
        return _fail(1, "failed checks: " + ", ".join(r.name for r in failed))
    _say(args.quiet, f"all {len(results)} checks passed")
    return 0


# ---------------------------------------------------------------------------
# argument parsing


def _add_common(sub):
    sub.add_argument("--config", default=None, help="path to the run configuration")
    sub.add_argument("--out", default=None, help="output directory (overrides config)")
    sub.add_argument("--seed", type=int, default=None, help="seed override (u64)")
    sub.add_argument("--quiet", action="store_true", help="suppress progress output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gswlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="run the solver at the first schedule rung")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_cont = sub.add_parser("continue", help="run the alpha continuation ladder")
    _add_common(p_cont)
    p_cont.set_defaults(func=cmd_continue)

    p_an = sub.add_parser("analyze", help="post-hoc diagnostics of a snapshot")
    p_an.add_argument("snapshot", help="path to a field snapshot (.gsw)")
    _add_common(p_an)
    p_an.set_defaults(func=cmd_analyze)

    p_check = sub.add_parser("check", help="run the property self checks")
    _add_common(p_check)
    p_check.add_argument("--perturb-moment-map", action="store_true", help=argparse.SUPPRESS)
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
