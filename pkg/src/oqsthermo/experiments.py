"""Configuration-driven scenarios that write CSV tables, a run manifest and a
matplotlib script for the plots.

Config files are TOML::

    scenario = "timeseries"
    seed = 0
    output_dir = "out"
    initial_state = [1.0, 0.0, -0.894, -0.447]
    reference = "stationary"      # or "gibbs"

    [params]
    convention = "cyclic"         # how "8 GHz" becomes rad/s
    ratio = 2.0                   # Omega / Delta
    temperature = 0.006           # kelvin (physical mode)

    [grid]
    periods = 20                  # or t_max in units of 1/Delta
    samples_per_period = 64       # or dt

Unspecified values fall back to :func:`default_config`.
"""
from __future__ import annotations

import dataclasses
import datetime
import math
import sys
import time
from enum import Enum
from pathlib import Path

import numpy as np

from .bath import QuadratureError, SpectralModel, bath_correlation, half_fourier
from .generators import (
    DegenerateStationaryStateError,
    MalformedGeneratorError,
    build_redfield,
    build_weak_coupling,
)
from .params import FrequencyConvention, ModelParams, SWEEP_RATIOS, SWEEP_TEMPERATURES, UnitMode, footnote_params
from .qubit import UnphysicalStateError
from .thermo import (
    Reference,
    ReferenceKind,
    Sampling,
    heat_flux_many,
    parameter_sweep,
    sigma_many,
    violation_intervals,
    violation_scan_t0,
    equatorial_grid,
)
from .dynamics import trajectory

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

NUMERICAL_ERRORS = (
    QuadratureError,
    DegenerateStationaryStateError,
    MalformedGeneratorError,
    UnphysicalStateError,
    FloatingPointError,
    np.linalg.LinAlgError,
)


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class Scenario(str, Enum):
    FIG1_SCAN = "fig1_scan"
    TIMESERIES = "timeseries"
    SWEEP = "sweep"
    TABULATE_BATH = "tabulate_bath"
    SNAPSHOT_GENERATORS = "snapshot_generators"


@dataclasses.dataclass(frozen=True)
class ExperimentConfig:
    scenario: Scenario
    params: ModelParams
    initial_state: tuple | None = None
    n_points: int = 101
    t_max: float | None = None      # 1/Delta; None means `periods` effective periods
    dt: float | None = None         # 1/Delta; None means period / samples_per_period
    periods: float = 20.0
    samples_per_period: int = 64
    seed: int = 0
    output_dir: str = "out"
    reference: ReferenceKind = ReferenceKind.STATIONARY
    temperatures: tuple = SWEEP_TEMPERATURES
    ratios: tuple = SWEEP_RATIOS
    n_states: int = 2000
    search_states: int = 200
    u_max: float = 20.0

    def __post_init__(self):
        if self.scenario is Scenario.TIMESERIES and self.initial_state is None:
            raise ConfigError("initial_state: required by scenario 'timeseries'")
        if self.initial_state is not None:
            r = self.initial_state
            if len(r) != 4 or not all(math.isfinite(x) for x in r) or abs(r[0] - 1.0) > 1e-12:
                raise ConfigError("initial_state: need four finite numbers with r0 = 1")
            if math.hypot(*r[1:]) > 1.0 + 1e-9:
                raise ConfigError("initial_state: polarization exceeds 1")
        if not self.temperatures or not self.ratios:
            raise ConfigError("sweep: temperatures and ratios must be nonempty")
        for name in ("n_points", "samples_per_period", "n_states", "search_states"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name}: must be >= 1")
        for name in ("t_max", "dt"):
            v = getattr(self, name)
            if v is not None and not (math.isfinite(v) and v > 0):
                raise ConfigError(f"grid.{name}: must be positive")
        if not self.periods > 0 or not self.u_max > 0:
            raise ConfigError("grid: periods and u_max must be positive")

    @property
    def time_step(self) -> float:
        return self.dt if self.dt is not None else self.params.period / self.samples_per_period

    @property
    def horizon(self) -> float:
        return self.t_max if self.t_max is not None else self.periods * self.params.period

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)


def default_config(scenario: Scenario | str = Scenario.TIMESERIES) -> ExperimentConfig:
    """Reference parameter set (physical units, cyclic reading of 8 GHz) and
    the strongly polarized initial state (1, 0, -0.894, -0.447)."""
    return ExperimentConfig(
        scenario=Scenario(scenario),
        params=footnote_params(),
        initial_state=(1.0, 0.0, -0.894, -0.447),
    )


# --- parsing -----------------------------------------------------------------

_TOP_KEYS = {"scenario", "seed", "output_dir", "initial_state", "reference", "params", "grid", "sweep", "bath"}
_PARAM_KEYS = {"convention", "unit_mode", "delta", "ratio", "cutoff_ratio", "lambda_coupling", "temperature"}
_GRID_KEYS = {"n_points", "t_max", "dt", "periods", "samples_per_period"}
_SWEEP_KEYS = {"temperatures", "ratios", "n_states", "search_states"}
_BATH_KEYS = {"u_max"}


def _check_keys(table: dict, allowed: set, where: str):
    unknown = sorted(set(table) - allowed)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {', '.join(unknown)}")


def _number(table, key, where, kind=float):
    v = table[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key}: expected a number, got {v!r}")
    if kind is int:
        if isinstance(v, float) and not v.is_integer():
            raise ConfigError(f"{where}.{key}: expected an integer, got {v!r}")
        return int(v)
    return float(v)


def _params_from_table(t: dict) -> ModelParams:
    _check_keys(t, _PARAM_KEYS, "params")
    try:
        convention = FrequencyConvention(t.get("convention", "cyclic"))
        mode = UnitMode(t.get("unit_mode", "physical"))
    except ValueError as exc:
        raise ConfigError(f"params: {exc}") from None
    base = footnote_params(convention)
    if mode is UnitMode.DIMENSIONLESS:
        base = base.to_dimensionless()
    if "delta" in t:
        if mode is UnitMode.DIMENSIONLESS:
            raise ConfigError("params.delta: fixed to 1 in dimensionless mode")
        delta = _number(t, "delta", "params")
        base = base.replace(delta=delta, omega_drive=base.ratio * delta,
                            omega_cutoff=base.cutoff_ratio * delta)
    changes = {}
    for key in ("lambda_coupling", "temperature"):
        if key in t:
            changes[key] = _number(t, key, "params")
    try:
        p = base.replace(**changes)
        if "ratio" in t:
            p = p.with_ratio(_number(t, "ratio", "params"))
        if "cutoff_ratio" in t:
            p = p.replace(omega_cutoff=_number(t, "cutoff_ratio", "params") * p.delta)
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"params: {exc}") from None
    return p


def config_from_dict(data: dict) -> ExperimentConfig:
    _check_keys(data, _TOP_KEYS, "top level")
    out: dict = {}
    try:
        out["scenario"] = Scenario(data.get("scenario", "timeseries"))
    except ValueError:
        raise ConfigError(f"scenario: unknown value {data.get('scenario')!r}; "
                          f"choose from {', '.join(s.value for s in Scenario)}") from None
    out["params"] = _params_from_table(data.get("params", {}))
    if "seed" in data:
        out["seed"] = _number(data, "seed", "top level", int)
    if "output_dir" in data:
        out["output_dir"] = str(data["output_dir"])
    if "reference" in data:
        try:
            out["reference"] = ReferenceKind(data["reference"])
        except ValueError:
            raise ConfigError(f"reference: expected 'stationary' or 'gibbs', got {data['reference']!r}") from None
    state = data.get("initial_state", default_config().initial_state)
    try:
        out["initial_state"] = tuple(float(x) for x in state)
    except (TypeError, ValueError):
        raise ConfigError(f"initial_state: expected a list of numbers, got {state!r}") from None

    grid = data.get("grid", {})
    _check_keys(grid, _GRID_KEYS, "grid")
    for key in ("n_points", "samples_per_period"):
        if key in grid:
            out[key] = _number(grid, key, "grid", int)
    for key in ("t_max", "dt", "periods"):
        if key in grid:
            out[key] = _number(grid, key, "grid")

    sweep = data.get("sweep", {})
    _check_keys(sweep, _SWEEP_KEYS, "sweep")
    for key in ("temperatures", "ratios"):
        if key in sweep:
            vals = sweep[key]
            if not isinstance(vals, list) or not all(isinstance(v, (int, float)) for v in vals):
                raise ConfigError(f"sweep.{key}: expected a list of numbers")
            out[key] = tuple(float(v) for v in vals)
    for key in ("n_states", "search_states"):
        if key in sweep:
            out[key] = _number(sweep, key, "sweep", int)

    bath = data.get("bath", {})
    _check_keys(bath, _BATH_KEYS, "bath")
    if "u_max" in bath:
        out["u_max"] = _number(bath, "u_max", "bath")
    return ExperimentConfig(**out)


def load_config(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(data)


def _toml_value(v) -> str:
    if isinstance(v, str):
        return f'"{v}"'
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    return repr(v)


def config_to_toml(cfg: ExperimentConfig) -> str:
    p = cfg.params
    lines = [
        f"scenario = {_toml_value(cfg.scenario.value)}",
        f"seed = {cfg.seed}",
        f"output_dir = {_toml_value(cfg.output_dir)}",
        f"reference = {_toml_value(cfg.reference.value)}",
    ]
    if cfg.initial_state is not None:
        lines.append(f"initial_state = {_toml_value(list(cfg.initial_state))}")
    lines += [
        "",
        "[params]",
        f"unit_mode = {_toml_value(p.unit_mode.value)}",
        f"delta = {p.delta!r}  # rad/s" if p.unit_mode is UnitMode.PHYSICAL else "# delta = 1",
        f"ratio = {p.ratio!r}",
        f"cutoff_ratio = {p.cutoff_ratio!r}",
        f"lambda_coupling = {p.lambda_coupling!r}",
        f"temperature = {p.temperature!r}",
        f"# beta*hbar*Delta = {p.beta:.6g}",
        "",
        "[grid]",
        f"n_points = {cfg.n_points}",
        f"periods = {cfg.periods!r}",
        f"samples_per_period = {cfg.samples_per_period}",
    ]
    if cfg.t_max is not None:
        lines.append(f"t_max = {cfg.t_max!r}")
    if cfg.dt is not None:
        lines.append(f"dt = {cfg.dt!r}")
    lines += [
        "",
        "[sweep]",
        f"temperatures = {_toml_value(list(cfg.temperatures))}",
        f"ratios = {_toml_value(list(cfg.ratios))}",
        f"n_states = {cfg.n_states}",
        f"search_states = {cfg.search_states}",
        "",
        "[bath]",
        f"u_max = {cfg.u_max!r}",
    ]
    return "\n".join(lines) + "\n"


# --- output helpers ----------------------------------------------------------

def format_float(v) -> str:
    v = float(v)
    return f"{v:.17g}" if math.isfinite(v) else ("nan" if math.isnan(v) else ("inf" if v > 0 else "-inf"))


def write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(v if isinstance(v, str) else format_float(v) for v in row) + "\n")


def tool_version() -> str:
    try:
        from importlib.metadata import version
        return version("artifact")
    except Exception:
        return "unknown"


def _write_manifest(path: Path, cfg: ExperimentConfig, extra: dict, wall: float) -> None:
    p = cfg.params
    items = {
        "tool_version": tool_version(),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": f"{wall:.3f}",
        "scenario": cfg.scenario.value,
        "seed": cfg.seed,
        "reference": cfg.reference.value,
        **{f"params.{k}": v for k, v in p.as_dict().items()},
        "params.ratio": p.ratio,
        "params.cutoff_ratio": p.cutoff_ratio,
        "params.beta_hbar_delta": p.beta,
        "params.omega_eff": p.omega_eff,
        "grid.n_points": cfg.n_points,
        "grid.t_max": cfg.horizon,
        "grid.dt": cfg.time_step,
        "initial_state": cfg.initial_state,
        "sweep.temperatures": cfg.temperatures,
        "sweep.ratios": cfg.ratios,
        "sweep.n_states": cfg.n_states,
        "sweep.search_states": cfg.search_states,
        "bath.u_max": cfg.u_max,
        **extra,
    }
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        for k, v in items.items():
            if isinstance(v, Enum):
                v = v.value
            fh.write(f"{k} = {v}\n")


_PLOT_HEADER = '''"""Plots for the {scenario} scenario. Run from this directory."""
import numpy as np
import matplotlib.pyplot as plt


def load(name):
    return np.genfromtxt(name, delimiter=",", names=True)

'''

_PLOT_BODIES = {
    Scenario.FIG1_SCAN: '''d = load("sigma_field.csv")
n = int(round(np.sqrt(d.size)))
r1 = d["r1"].reshape(n, n)
r2 = d["r2"].reshape(n, n)
fig, axes = plt.subplots(1, 2, figsize=(10, 4.5), sharey=True)
for ax, col, title in zip(axes, ["sigma_redfield", "sigma_cp"], ["Redfield", "weak coupling"]):
    s = d[col].reshape(n, n)
    lim = np.nanmax(np.abs(s))
    im = ax.pcolormesh(r1, r2, s, cmap="RdBu", vmin=-lim, vmax=lim, shading="auto")
    ax.contour(r1, r2, s, levels=[0.0], colors="k", linewidths=0.8)
    ax.set_title(title)
    ax.set_xlabel("r1")
    ax.set_aspect("equal")
    fig.colorbar(im, ax=ax)
axes[0].set_ylabel("r2")
fig.savefig("sigma_field.png", dpi=150, bbox_inches="tight")
''',
    Scenario.TIMESERIES: '''d = load("timeseries.csv")
fig, (a, b) = plt.subplots(2, 1, figsize=(8, 6), sharex=True)
a.plot(d["t"], d["sigma_redfield"], color="tab:red", label="Redfield")
a.plot(d["t"], d["sigma_cp"], color="k", label="weak coupling")
a.axhline(0.0, color="0.6", lw=0.5)
a.set_ylabel("sigma")
a.legend()
b.plot(d["t"], d["heat_flux_redfield"], color="tab:red")
b.plot(d["t"], d["heat_flux_cp"], color="k")
b.set_xlabel("t (1/Delta)")
b.set_ylabel("heat flux")
fig.savefig("timeseries.png", dpi=150, bbox_inches="tight")
''',
    Scenario.SWEEP: '''d = load("sweep.csv")
fig, ax = plt.subplots(figsize=(6, 4))
for T in np.unique(d["T_kelvin"]):
    m = d["T_kelvin"] == T
    ax.plot(d["ratio"][m], d["frac_t0_redfield"][m], "o-", label=f"T = {T:g}")
ax.set_xscale("log")
ax.set_xlabel("Omega / Delta")
ax.set_ylabel("fraction with sigma(t=0) < 0")
ax.legend()
fig.savefig("sweep.png", dpi=150, bbox_inches="tight")
''',
    Scenario.TABULATE_BATH: '''d = load("bath_correlation.csv")
fig, ax = plt.subplots(figsize=(7, 4))
ax.plot(d["u"], d["re_G"], label="Re G")
ax.plot(d["u"], d["im_G"], label="Im G")
ax.set_yscale("symlog", linthresh=1e-3)
ax.set_xlabel("u (1/Delta)")
ax.legend()
fig.savefig("bath_correlation.png", dpi=150, bbox_inches="tight")
''',
    Scenario.SNAPSHOT_GENERATORS: '''d = load("generators.csv")
fig, axes = plt.subplots(1, 2, figsize=(8, 4))
names = [n for n in d.dtype.names if n.startswith("m")]
for ax, row in zip(axes, d):
    m = np.array([row[n] for n in names]).reshape(4, 4)
    im = ax.imshow(m, cmap="RdBu")
    fig.colorbar(im, ax=ax)
axes[0].set_title("Redfield")
axes[1].set_title("weak coupling")
fig.savefig("generators.png", dpi=150, bbox_inches="tight")
''',
}


def _write_plot_script(out: Path, scenario: Scenario) -> None:
    path = out / f"plot_{scenario.value}.py"
    path.write_text(_PLOT_HEADER.format(scenario=scenario.value) + _PLOT_BODIES[scenario], encoding="utf-8")


# --- scenarios ---------------------------------------------------------------

def _generators(p: ModelParams):
    return build_redfield(p), build_weak_coupling(p)


def _fig1_scan(cfg: ExperimentConfig, out: Path) -> dict:
    red, cp = _generators(cfg.params)
    states, inside = equatorial_grid(cfg.n_points)
    cols = []
    for g in (red, cp):
        s = sigma_many(g, states, Reference.of(g, cfg.reference))
        cols.append(np.where(inside, s, np.nan))
    write_csv(out / "sigma_field.csv", ["r1", "r2", "sigma_redfield", "sigma_cp"],
              zip(states[:, 1], states[:, 2], *cols))
    extra = {}
    for name, g in (("redfield", red), ("cp", cp)):
        rep = violation_scan_t0(g, Sampling.EQUATORIAL_GRID, cfg.n_points, cfg.seed, cfg.reference)
        extra[f"result.{name}.fraction_negative"] = rep.t0_fraction_negative
        extra[f"result.{name}.min_sigma"] = rep.min_sigma
    return extra


def _timeseries(cfg: ExperimentConfig, out: Path) -> dict:
    red, cp = _generators(cfg.params)
    r0 = np.array(cfg.initial_state)
    dt, t_max = cfg.time_step, cfg.horizon
    sig, heat, extra = {}, {}, {}
    for name, g in (("redfield", red), ("cp", cp)):
        ref = Reference.of(g, cfg.reference)
        rec = trajectory(g, r0, t_max, dt)
        rec.write_csv(out / f"trajectory_{name}.csv")
        sig[name] = sigma_many(g, rec.states, ref)
        heat[name] = heat_flux_many(g, rec.states)
        rep = violation_intervals(g, r0, t_max, dt, ref)
        extra[f"result.{name}.sigma_t0"] = rep.sigma_t0
        extra[f"result.{name}.negative_intervals"] = len(rep.negative_intervals)
        extra[f"result.{name}.min_sigma"] = rep.min_sigma
        extra[f"result.{name}.unphysical_samples"] = rep.unphysical_count
        times = rec.times
    write_csv(out / "timeseries.csv",
              ["t", "sigma_redfield", "sigma_cp", "heat_flux_redfield", "heat_flux_cp"],
              zip(times, sig["redfield"], sig["cp"], heat["redfield"], heat["cp"]))
    return extra


def _sweep(cfg: ExperimentConfig, out: Path) -> dict:
    cells = parameter_sweep(cfg.temperatures, cfg.ratios, cfg.params, cfg.n_states, cfg.seed,
                            search_states=cfg.search_states, periods=cfg.periods)
    rows, extra = [], {}
    for c in cells:
        if c.error is not None:
            extra[f"error.cell{c.index}"] = c.error
            rows.append((c.temperature, c.ratio, math.nan, math.nan, "0", math.nan))
            continue
        rows.append((c.temperature, c.ratio, c.redfield.t0_fraction_negative,
                     c.weak_coupling.t0_fraction_negative, "1" if c.has_time_violation else "0",
                     min(c.redfield.min_sigma, c.time_violation.min_sigma if c.time_violation else math.inf)))
    write_csv(out / "sweep.csv",
              ["T_kelvin", "ratio", "frac_t0_redfield", "frac_t0_cp", "has_time_violation", "min_sigma"], rows)
    extra["result.failed_cells"] = sum(c.error is not None for c in cells)
    if extra["result.failed_cells"]:
        raise _PartialFailure(extra)
    return extra


class _PartialFailure(RuntimeError):
    def __init__(self, extra):
        super().__init__("some sweep cells failed")
        self.extra = extra


def _tabulate_bath(cfg: ExperimentConfig, out: Path) -> dict:
    p = cfg.params
    model = SpectralModel.from_params(p)
    us = np.linspace(0.0, cfg.u_max, cfg.n_points)
    G = np.array([bath_correlation(u, model) for u in us])
    write_csv(out / "bath_correlation.csv", ["u", "re_G", "im_G"], zip(us, G.real, G.imag))
    w, x = p.omega_eff, p.ratio
    freqs = sorted({-(w + x), -abs(w - x), -x, x, abs(w - x), w + x})
    gam = [half_fourier(nu, model) for nu in freqs]
    write_csv(out / "half_fourier.csv", ["nu", "re_Gamma", "im_Gamma"],
              [(nu, g.real, g.imag) for nu, g in zip(freqs, gam)])
    return {}


def _snapshot(cfg: ExperimentConfig, out: Path) -> dict:
    red, cp = _generators(cfg.params)
    header = ["generator"] + [f"m{i}{j}" for i in range(4) for j in range(4)]
    write_csv(out / "generators.csv", header,
              [("redfield", *red.matrix.ravel()), ("cp", *cp.matrix.ravel())])
    return {}


_RUNNERS = {
    Scenario.FIG1_SCAN: _fig1_scan,
    Scenario.TIMESERIES: _timeseries,
    Scenario.SWEEP: _sweep,
    Scenario.TABULATE_BATH: _tabulate_bath,
    Scenario.SNAPSHOT_GENERATORS: _snapshot,
}


def run(cfg: ExperimentConfig, stream=None) -> int:
    """Execute a scenario; returns the process exit status."""
    stream = stream or sys.stderr
    out = Path(cfg.output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"config error: output_dir: {exc}", file=stream)
        return EXIT_CONFIG
    start = time.perf_counter()
    status = EXIT_OK
    try:
        extra = _RUNNERS[cfg.scenario](cfg, out)
    except _PartialFailure as exc:
        extra, status = exc.extra, EXIT_NUMERICAL
        for k, v in extra.items():
            if k.startswith("error."):
                print(f"numerical error in thermo.parameter_sweep {k}: {v}", file=stream)
    except NUMERICAL_ERRORS as exc:
        module = type(exc).__module__.rsplit(".", 1)[-1]
        print(f"numerical error in {module}: {type(exc).__name__}: {exc}", file=stream)
        extra, status = {"error": f"{type(exc).__name__}: {exc}"}, EXIT_NUMERICAL
    _write_manifest(out / "run_manifest.txt", cfg, {**extra, "exit_status": status},
                    time.perf_counter() - start)
    if status == EXIT_OK:
        _write_plot_script(out, cfg.scenario)
    return status
