"""
Experiment configuration and batch runs (convergence traces, rate sweeps).

Configurations are INI files::

    [system]
    M = 4
    N = 40

    [scenario]
    user_distance_min = 15
    user_distance_max = 60

    [experiment]
    power_grid_db = -20, 0, 20, 40
    algorithms = pgd, elementwise, random, none, tts_elementwise

Every key is optional except ``M`` and ``N``; see :data:`DEFAULTS`.
"""

from __future__ import annotations

import configparser
import csv
import io
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .model import ModelError, SystemDims
from .optim import OptimizerConfig, optimize_elementwise, optimize_pgd, random_phases
from .simulate import Scenario, Scheme, generate_covariances, monte_carlo_rate, substream

__all__ = [
    "ALGORITHMS",
    "ConfigError",
    "ExperimentConfig",
    "parse_config",
    "parse_config_string",
    "format_config",
    "run_convergence",
    "run_rate_sweep",
    "sweep_results",
    "CONVERGENCE_HEADER",
    "RATES_HEADER",
]

ALGORITHMS = ("pgd", "elementwise", "random", "none", "tts_elementwise")
CONVERGENCE_HEADER = ("algorithm", "iteration", "objective")
RATES_HEADER = ("power_db", "scheme", "mean_rate", "std_err", "n")

# stream tags for substream(seed, tag, ...)
_MODEL_STREAM, _RANDOM_PHASE_STREAM, _SAMPLE_STREAM, _CONVERGENCE_STREAM = range(4)


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names section, key and line."""


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    power_grid_db: tuple = (-20.0, -10.0, 0.0, 10.0, 20.0, 30.0, 40.0)
    n_covariance_draws: int = 20
    n_realizations: int = 500
    algorithms: tuple = ALGORITHMS
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    convergence_distance: float = 20.0
    output_dir: str = "out"

    def __post_init__(self):
        if not self.power_grid_db:
            raise ConfigError("[experiment] power_grid_db: must not be empty")
        if self.n_covariance_draws < 1:
            raise ConfigError("[experiment] n_covariance_draws: must be positive")
        if self.n_realizations < 1:
            raise ConfigError("[experiment] n_realizations: must be positive")
        bad = [a for a in self.algorithms if a not in ALGORITHMS]
        if bad:
            raise ConfigError(f"[experiment] algorithms: unknown {bad}, choose from {ALGORITHMS}")
        if not self.algorithms:
            raise ConfigError("[experiment] algorithms: must not be empty")
        lo, hi = self.scenario.user_distance_range
        if not lo <= self.convergence_distance <= hi:
            raise ConfigError(
                "[experiment] convergence_distance: must lie within the user distance range")

    @property
    def seed(self):
        return self.scenario.seed

    def with_seed(self, seed):
        return replace(self, scenario=replace(self.scenario, seed=int(seed)))


# (section, key) -> (type, default); None default means required
_SCHEMA = {
    "system": {
        "M": (int, None),
        "N": (int, None),
        "sigma2": (float, 1.0),
        "zeta2": (float, 1.0),
    },
    "scenario": {
        "bs_pos": ("pair", (0.0, 0.0)),
        "ris_pos": ("pair", (50.0, 10.0)),
        "user_distance_min": (float, 15.0),
        "user_distance_max": (float, 60.0),
        "n_scatterers_direct": (int, 6),
        "n_scatterers_ris": (int, 6),
        "pathloss_exponent": (float, 2.0),
        "reference_distance": (float, 10.0),
        "reference_gain_db": (float, 20.0),
        "scatterer_spread_db": (float, 4.0),
        "angular_spread_deg": (float, 40.0),
        "seed": (int, 0),
    },
    "experiment": {
        "power_grid_db": ("floats", ExperimentConfig.power_grid_db),
        "n_covariance_draws": (int, 20),
        "n_realizations": (int, 500),
        "algorithms": ("names", ALGORITHMS),
        "convergence_distance": (float, 20.0),
        "output_dir": (str, "out"),
    },
    "optimizer": {
        "max_iters": (int, 100),
        "rel_tol": (float, 1e-8),
        "armijo_c": (float, 1e-4),
        "armijo_shrink": (float, 0.5),
        "armijo_init_step": (float, 1.0),
        "max_backtracks": (int, 40),
        "init": (str, "ones"),
        "init_seed": (int, 0),
    },
}

DEFAULTS = {sec: {k: d for k, (_, d) in keys.items()} for sec, keys in _SCHEMA.items()}


def _line_index(text):
    """Map (section, key) to 1-based line numbers for error messages."""
    where, section = {}, None
    for i, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip()
            where.setdefault((section, None), i)
            continue
        m = re.match(r"\s*([^=:#;\s][^=:]*?)\s*[=:]", line)
        if m and section is not None:
            where.setdefault((section, m.group(1).strip().lower()), i)
    return where


def _convert(kind, raw):
    if kind is int:
        try:
            return int(raw.strip())
        except ValueError:
            raise ValueError(f"expected an integer, got {raw!r}") from None
    if kind is float:
        return float(raw)
    if kind is str:
        return raw.strip()
    parts = [p.strip() for p in raw.split(",") if p.strip()]
    if kind == "pair":
        if len(parts) != 2:
            raise ValueError(f"expected two comma-separated numbers, got {raw!r}")
        return tuple(float(p) for p in parts)
    if kind == "floats":
        return tuple(float(p) for p in parts)
    if kind == "names":
        return tuple(parts)
    raise AssertionError(kind)


def parse_config_string(text, source="<string>"):
    """Parse INI text into a validated :class:`ExperimentConfig`."""
    lines = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigError(f"{source}: {exc}") from None

    def loc(section, key=None):
        line = lines.get((section, key.lower() if key else None))
        return f"{source}:{line}: " if line else f"{source}: "

    values = {}
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"{loc(section)}unknown section [{section}]")
    for section, keys in _SCHEMA.items():
        got = parser[section] if parser.has_section(section) else {}
        for key in got:
            if key not in keys:
                raise ConfigError(f"{loc(section, key)}[{section}] unknown key {key!r}")
        for key, (kind, default) in keys.items():
            if key in got:
                try:
                    values[section, key] = _convert(kind, got[key])
                except ValueError as exc:
                    raise ConfigError(f"{loc(section, key)}[{section}] {key}: {exc}") from None
            elif default is None:
                raise ConfigError(f"{loc(section)}[{section}] missing required key {key!r}")
            else:
                values[section, key] = default

    def build(section, key, fn):
        try:
            return fn()
        except (ValueError, ModelError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"{loc(section, key)}[{section}] {key}: {exc}") from None

    v = values
    dims = build("system", _first_bad_dims(v), lambda: SystemDims(
        M=v["system", "M"], N=v["system", "N"],
        sigma2=v["system", "sigma2"], zeta2=v["system", "zeta2"]))
    scenario = build("scenario", None, lambda: Scenario(
        dims=dims,
        bs_pos=v["scenario", "bs_pos"],
        ris_pos=v["scenario", "ris_pos"],
        user_distance_range=(v["scenario", "user_distance_min"],
                             v["scenario", "user_distance_max"]),
        n_scatterers_direct=v["scenario", "n_scatterers_direct"],
        n_scatterers_ris=v["scenario", "n_scatterers_ris"],
        pathloss_exponent=v["scenario", "pathloss_exponent"],
        reference_distance=v["scenario", "reference_distance"],
        reference_gain_db=v["scenario", "reference_gain_db"],
        scatterer_spread_db=v["scenario", "scatterer_spread_db"],
        angular_spread_deg=v["scenario", "angular_spread_deg"],
        seed=v["scenario", "seed"]))
    optimizer = build("optimizer", None, lambda: OptimizerConfig(
        max_iters=v["optimizer", "max_iters"],
        rel_tol=v["optimizer", "rel_tol"],
        armijo_c=v["optimizer", "armijo_c"],
        armijo_shrink=v["optimizer", "armijo_shrink"],
        armijo_init_step=v["optimizer", "armijo_init_step"],
        max_backtracks=v["optimizer", "max_backtracks"],
        init=v["optimizer", "init"],
        seed=v["optimizer", "init_seed"]))
    try:
        return ExperimentConfig(
            scenario=scenario,
            power_grid_db=v["experiment", "power_grid_db"],
            n_covariance_draws=v["experiment", "n_covariance_draws"],
            n_realizations=v["experiment", "n_realizations"],
            algorithms=v["experiment", "algorithms"],
            optimizer=optimizer,
            convergence_distance=v["experiment", "convergence_distance"],
            output_dir=v["experiment", "output_dir"])
    except ConfigError as exc:
        m = re.match(r"\[(\w+)\] (\w+):", str(exc))
        prefix = loc(m.group(1), m.group(2)) if m else f"{source}: "
        raise ConfigError(prefix + str(exc)) from None


def _first_bad_dims(v):
    for key in ("M", "N"):
        if v["system", key] < 1:
            return key
    for key in ("sigma2", "zeta2"):
        if not v["system", key] > 0:
            return key
    return None


def parse_config(path):
    """Read and validate an INI experiment configuration from ``path``."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config_string(text, source=str(path))


def _fmt(value):
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(_fmt(x) for x in value)
    return str(value)


def format_config(cfg):
    """Serialize a config to INI text that :func:`parse_config_string` reads back equal."""
    sc, dims, opt = cfg.scenario, cfg.scenario.dims, cfg.optimizer
    data = {
        "system": {"M": dims.M, "N": dims.N, "sigma2": float(dims.sigma2),
                   "zeta2": float(dims.zeta2)},
        "scenario": {
            "bs_pos": tuple(map(float, sc.bs_pos)),
            "ris_pos": tuple(map(float, sc.ris_pos)),
            "user_distance_min": float(sc.user_distance_range[0]),
            "user_distance_max": float(sc.user_distance_range[1]),
            "n_scatterers_direct": sc.n_scatterers_direct,
            "n_scatterers_ris": sc.n_scatterers_ris,
            "pathloss_exponent": float(sc.pathloss_exponent),
            "reference_distance": float(sc.reference_distance),
            "reference_gain_db": float(sc.reference_gain_db),
            "scatterer_spread_db": float(sc.scatterer_spread_db),
            "angular_spread_deg": float(sc.angular_spread_deg),
            "seed": sc.seed,
        },
        "experiment": {
            "power_grid_db": tuple(map(float, cfg.power_grid_db)),
            "n_covariance_draws": cfg.n_covariance_draws,
            "n_realizations": cfg.n_realizations,
            "algorithms": cfg.algorithms,
            "convergence_distance": float(cfg.convergence_distance),
            "output_dir": str(cfg.output_dir),
        },
        "optimizer": {
            "max_iters": opt.max_iters, "rel_tol": float(opt.rel_tol),
            "armijo_c": float(opt.armijo_c), "armijo_shrink": float(opt.armijo_shrink),
            "armijo_init_step": float(opt.armijo_init_step),
            "max_backtracks": opt.max_backtracks, "init": opt.init,
            "init_seed": opt.seed,
        },
    }
    out = io.StringIO()
    for section, items in data.items():
        out.write(f"[{section}]\n")
        for key, value in items.items():
            out.write(f"{key} = {_fmt(value)}\n")
        out.write("\n")
    return out.getvalue()


def db_to_linear(db):
    return 0.0 if db == -math.inf else 10.0 ** (db / 10.0)


def _write_csv(path, header, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([[_fmt(x) for x in row] for row in rows])
    return path


def run_convergence(cfg, out_dir=None):
    """
    Optimizer traces on one covariance instance at ``convergence_distance``.

    Writes ``convergence.csv`` with rows ``(algorithm, iteration, objective)``;
    iteration 1 is the common starting point. Returns the path.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.output_dir)
    rng = substream(cfg.seed, _CONVERGENCE_STREAM)
    model = generate_covariances(cfg.scenario, cfg.convergence_distance, rng)
    solvers = {"pgd": optimize_pgd, "elementwise": optimize_elementwise}
    rows = []
    for name in cfg.algorithms:
        if name not in solvers:
            continue
        report = solvers[name](model, cfg.optimizer)
        rows += [(name, i, float(f)) for i, f in enumerate(report.objective_trace, 1)]
    return _write_csv(out_dir / "convergence.csv", CONVERGENCE_HEADER, rows)


def _sweep_cell(cfg, draw):
    """All powers and schemes for one covariance draw -> {(power_idx, scheme): samples}."""
    rng = substream(cfg.seed, _MODEL_STREAM, draw)
    lo, hi = cfg.scenario.user_distance_range
    model = generate_covariances(cfg.scenario, rng.uniform(lo, hi), rng)
    N = model.N
    phases = {}
    if "pgd" in cfg.algorithms:
        phases["pgd"] = optimize_pgd(model, cfg.optimizer).phi_final
    if {"elementwise", "tts_elementwise"} & set(cfg.algorithms):
        phases["elementwise"] = optimize_elementwise(model, cfg.optimizer).phi_final
    if "random" in cfg.algorithms:
        phases["random"] = random_phases([cfg.seed, _RANDOM_PHASE_STREAM, draw], N)

    plan = {
        "pgd": (Scheme.BILINEAR_STAT, "pgd"),
        "elementwise": (Scheme.BILINEAR_STAT, "elementwise"),
        "random": (Scheme.BILINEAR_STAT, "random"),
        "none": (Scheme.NO_RIS, None),
        "tts_elementwise": (Scheme.TTS_MATCHED_FILTER, "elementwise"),
    }
    out = {}
    for p_idx, p_db in enumerate(cfg.power_grid_db):
        dims = replace(cfg.scenario.dims, P=db_to_linear(p_db))
        for name in cfg.algorithms:
            scheme, key = plan[name]
            phi = phases[key] if key else np.ones(N, dtype=complex)
            # same key for every scheme: common random numbers across schemes
            est = monte_carlo_rate(model, phi, scheme, dims, cfg.n_realizations,
                                   substream(cfg.seed, _SAMPLE_STREAM, draw, p_idx),
                                   keep_samples=True)
            out[p_idx, name] = est.samples
    return out


def sweep_results(cfg, workers=1):
    """
    Pooled Monte-Carlo rates ``{(power_db, scheme): (mean, std_err, n)}``.

    Covariance draws are evaluated independently (optionally in a process
    pool) and pooled in draw order, so the result does not depend on
    ``workers``.
    """
    draws = range(cfg.n_covariance_draws)
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, [cfg] * len(draws), draws))
    else:
        cells = [_sweep_cell(cfg, d) for d in draws]
    results = {}
    for p_idx, p_db in enumerate(cfg.power_grid_db):
        for name in cfg.algorithms:
            x = np.concatenate([cell[p_idx, name] for cell in cells])
            se = float(np.std(x, ddof=1) / np.sqrt(x.size)) if x.size > 1 else 0.0
            results[float(p_db), name] = (float(np.mean(x)), se, int(x.size))
    return results


def run_rate_sweep(cfg, out_dir=None, workers=1):
    """
    Rate-vs-power sweep; writes ``rates.csv`` with rows
    ``(power_db, scheme, mean_rate, std_err, n)`` and returns the path.
    """
    out_dir = Path(out_dir if out_dir is not None else cfg.output_dir)
    results = sweep_results(cfg, workers=workers)
    rows = [(p, name, *vals) for (p, name), vals in results.items()]
    return _write_csv(out_dir / "rates.csv", RATES_HEADER, rows)
