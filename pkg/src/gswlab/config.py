"""Plain-text run configuration (key = value sections).

A full run configuration looks like:

    [geometry]
    N = 8
    L = 1.0

    [model]
    n = 2
    background = identity        ; or: file:path/to/fields.gsw

    [schedule]
    alphas = 0.7853981633974483 0.6 0.45

    [solver]
    seed = 7                     ; mandatory, unsigned 64 bit
    max_iter = 2000              ; remaining keys optional, defaults in solver
    tol = 1e-10
    init_link_amplitude = 0.1

    [output]
    directory = runs/demo

    [analysis]
    zero_delta_rel = 1e-3        ; optional, defaults documented below
    holder_rmin = 2.0            ; annulus bounds in units of h
    holder_rmax = 6.0
    holder_r2_min = 0.9
    mu_tol = 1e-6
    amp_floor_rel = 1e-6
    loop0 = 2 2 0; 3 2 0; 3 3 0; 2 3 0
    component_orientations = +1 -1
    component_multiplicities = 1 1

All physical parameters are explicit; the only defaulted values are the
solver options above and the analysis thresholds (zero threshold
1e-3 * max |Psi|, Hoelder annulus [2h, 6h]).  Keys named loop0, loop1, ...
define closed lattice loops as semicolon-separated site index triples.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .lattice import LatticeGeometry
from .solver import SolveOptions

__all__ = ["ConfigError", "AnalysisConfig", "RunConfig", "load_config", "load_analysis_config"]


class ConfigError(Exception):
    pass


@dataclass
class AnalysisConfig:
    zero_delta_rel: float = 1e-3
    zero_delta_abs: float | None = None
    holder_rmin: float = 2.0  # units of the lattice spacing
    holder_rmax: float = 6.0
    holder_r2_min: float = 0.9
    mu_tol: float = 1e-6
    amp_floor_rel: float = 1e-6
    loops: list = field(default_factory=list)  # list of (T, 3) int arrays
    component_orientations: list | None = None
    component_multiplicities: list | None = None

    def delta_for(self, amp_max: float) -> float:
        if self.zero_delta_abs is not None:
            return self.zero_delta_abs
        return self.zero_delta_rel * amp_max


@dataclass
class RunConfig:
    geom: LatticeGeometry
    n: int
    background_source: str  # "identity" or "file:<path>"
    schedule: np.ndarray
    seed: int
    options: SolveOptions
    init_link_amplitude: float
    out_dir: str | None
    analysis: AnalysisConfig
    raw_text: str


def _parser_for(path) -> tuple[configparser.ConfigParser, str]:
    text = Path(path).read_text()
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    return parser, text


def _get(parser, section, key, cast, default=None, required=False):
    if not parser.has_option(section, key):
        if required:
            raise ConfigError(f"missing required key [{section}] {key}")
        return default
    raw = parser.get(section, key)
    try:
        return cast(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for [{section}] {key}: {raw!r}") from exc


def _float_list(raw: str):
    parts = raw.replace(",", " ").split()
    return [float(p) for p in parts]


def _int_list(raw: str):
    parts = raw.replace(",", " ").split()
    return [int(p) for p in parts]


def _parse_loop(raw: str) -> np.ndarray:
    sites = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        triple = chunk.replace(",", " ").split()
        if len(triple) != 3:
            raise ValueError(f"loop site {chunk!r} is not an index triple")
        sites.append([int(v) for v in triple])
    if len(sites) < 2:
        raise ValueError("loop needs at least two sites")
    return np.asarray(sites, dtype=int)


def _analysis_from(parser) -> AnalysisConfig:
    cfg = AnalysisConfig()
    if not parser.has_section("analysis"):
        return cfg
    cfg.zero_delta_rel = _get(parser, "analysis", "zero_delta_rel", float, cfg.zero_delta_rel)
    cfg.zero_delta_abs = _get(parser, "analysis", "zero_delta_abs", float, None)
    cfg.holder_rmin = _get(parser, "analysis", "holder_rmin", float, cfg.holder_rmin)
    cfg.holder_rmax = _get(parser, "analysis", "holder_rmax", float, cfg.holder_rmax)
    cfg.holder_r2_min = _get(parser, "analysis", "holder_r2_min", float, cfg.holder_r2_min)
    cfg.mu_tol = _get(parser, "analysis", "mu_tol", float, cfg.mu_tol)
    cfg.amp_floor_rel = _get(parser, "analysis", "amp_floor_rel", float, cfg.amp_floor_rel)
    for key in sorted(parser.options("analysis")):
        if key.startswith("loop"):
            cfg.loops.append(_get(parser, "analysis", key, _parse_loop, required=True))
    cfg.component_orientations = _get(
        parser, "analysis", "component_orientations", _int_list, None
    )
    cfg.component_multiplicities = _get(
        parser, "analysis", "component_multiplicities", _int_list, None
    )
    return cfg


def load_analysis_config(path=None) -> AnalysisConfig:
    """Analysis settings only; every key is optional."""
    if path is None:
        return AnalysisConfig()
    parser, _ = _parser_for(path)
    return _analysis_from(parser)


def load_config(path) -> RunConfig:
    """Load and validate a full run configuration."""
    parser, text = _parser_for(path)

    n_sites = _get(parser, "geometry", "N", int, required=True)
    if n_sites < 4:
        raise ConfigError(f"N must be >= 4 (got {n_sites})")
    box = _get(parser, "geometry", "L", float, required=True)
    if not box > 0.0:
        raise ConfigError(f"L must be positive (got {box})")
    geom = LatticeGeometry(n_sites, box)

    n = _get(parser, "model", "n", int, required=True)
    if n < 1:
        raise ConfigError(f"n must be a positive integer (got {n})")
    background = _get(parser, "model", "background", str, default="identity")
    background = background.strip()
    if background != "identity" and not background.startswith("file:"):
        raise ConfigError(
            f"background must be 'identity' or 'file:<path>' (got {background!r})"
        )

    alphas = np.asarray(_get(parser, "schedule", "alphas", _float_list, required=True))
    if alphas.size == 0:
        raise ConfigError("schedule must hold at least one alpha")
    if np.any(alphas < 0.0) or np.any(alphas >= np.pi / 2):
        raise ConfigError("schedule entries must lie within [0, pi/2)")
    if alphas.size > 1 and np.any(np.diff(alphas) >= 0.0):
        raise ConfigError("schedule must be strictly decreasing")

    seed = _get(parser, "solver", "seed", int, required=True)
    if not 0 <= seed < 2**64:
        raise ConfigError(f"seed must be an unsigned 64 bit integer (got {seed})")

    defaults = SolveOptions()
    options = SolveOptions(
        max_iter=_get(parser, "solver", "max_iter", int, defaults.max_iter),
        tol=_get(parser, "solver", "tol", float, defaults.tol),
        armijo_c=_get(parser, "solver", "armijo_c", float, defaults.armijo_c),
        backtrack=_get(parser, "solver", "backtrack", float, defaults.backtrack),
        initial_step=_get(parser, "solver", "initial_step", float, defaults.initial_step),
        step_floor=_get(parser, "solver", "step_floor", float, defaults.step_floor),
        min_amp_flag=_get(parser, "solver", "min_amp_flag", float, defaults.min_amp_flag),
    )
    if options.max_iter < 0:
        raise ConfigError("max_iter must be nonnegative")
    link_amplitude = _get(parser, "solver", "init_link_amplitude", float, 0.1)

    out_dir = _get(parser, "output", "directory", str, default=None)

    return RunConfig(
        geom=geom,
        n=n,
        background_source=background,
        schedule=alphas,
        seed=seed,
        options=options,
        init_link_amplitude=link_amplitude,
        out_dir=out_dir,
        analysis=_analysis_from(parser),
        raw_text=text,
    )
