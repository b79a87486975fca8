"""Entropy production, heat flux and second-law violation detection.

For a qubit ``log rho = a 1 + (1/2) l . sh`` with the log-vector
``l = 2 artanh(|r|) r / |r|``, so with ``dr/dt = -2 L r`` the internal entropy
production relative to a reference state is

    sigma = -Tr(L[rho] (log rho - log rho_ref)) = (L r) . (l(r) - l_ref).

References are carried as exact log-vectors, which keeps sigma finite and
accurate when the reference is polarized to within machine precision of a
pure state (weak coupling at low temperature).
"""
from __future__ import annotations

import dataclasses
import math
import os
from concurrent.futures import ProcessPoolExecutor
from enum import Enum

import numpy as np

from .dynamics import default_dt, propagate, propagator, trajectory
from .generators import (
    BlochGenerator,
    GeneratorKind,
    build_redfield,
    build_weak_coupling,
    equilibrium_log_ratio,
    operator_action,
    stationary_bloch,
)
from .params import ModelParams
from .qubit import NORM_TOL, UnphysicalStateError, as_bloch, rotated_pauli

PURE_CLAMP = 1.0 - 1e-9
VIOLATION_SCALE = 1e-9  # sigma < -VIOLATION_SCALE * lambda^2 is a violation


class Sampling(str, Enum):
    EQUATORIAL_GRID = "equatorial_grid"
    RANDOM_BALL = "random_ball"
    RANDOM_SPHERE = "random_sphere"


class ReferenceKind(str, Enum):
    STATIONARY = "stationary"
    GIBBS = "gibbs"


# --- reference states --------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class Reference:
    """A strictly mixed reference state and its exact log-vector."""

    bloch: np.ndarray
    log_vector: np.ndarray

    @classmethod
    def from_bloch(cls, r) -> "Reference":
        r = as_bloch(r)
        n = float(np.linalg.norm(r[1:]))
        if n >= 1.0:
            raise ValueError("reference state must be strictly mixed")
        if n == 0.0:
            return cls(r, np.zeros(3))
        return cls(r, 2.0 * math.atanh(n) * r[1:] / n)

    @classmethod
    def gibbs(cls, params: ModelParams) -> "Reference":
        """Gibbs state of H_eff = (omega_eff/2) sh_3 at inverse temperature beta."""
        x = params.beta * params.omega_eff
        if not math.isfinite(x):
            raise ValueError("Gibbs reference needs a finite temperature")
        return cls(np.array([1.0, 0.0, 0.0, -math.tanh(0.5 * x)]), np.array([0.0, 0.0, -x]))

    @classmethod
    def stationary(cls, g: BlochGenerator) -> "Reference":
        r = stationary_bloch(g)
        if g.kind is GeneratorKind.WEAK_COUPLING:
            # the stationary state is diagonal in the H_eff basis
            ell = equilibrium_log_ratio(g.params, g.model)
            if not math.isfinite(ell):
                raise ValueError("weak-coupling stationary state is pure")
            return cls(r, np.array([0.0, 0.0, -ell]))
        return cls.from_bloch(r)

    @classmethod
    def of(cls, g: BlochGenerator, kind: "ReferenceKind | str" = ReferenceKind.STATIONARY) -> "Reference":
        if ReferenceKind(kind) is ReferenceKind.GIBBS:
            return cls.gibbs(g.params)
        return cls.stationary(g)


def _resolve_reference(g, r_ref) -> Reference:
    if r_ref is None:
        return Reference.stationary(g)
    if isinstance(r_ref, Reference):
        return r_ref
    if isinstance(r_ref, (str, ReferenceKind)):
        return Reference.of(g, r_ref)
    return Reference.from_bloch(r_ref)


# --- Bloch-form quantities ---------------------------------------------------

def log_vector(states) -> np.ndarray:
    """Log-vectors of states of shape (..., 4); norms are clamped to PURE_CLAMP
    and states with norm above 1 + NORM_TOL give NaN."""
    v = np.asarray(states, dtype=float)[..., 1:]
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    nc = np.minimum(n, PURE_CLAMP)
    with np.errstate(invalid="ignore", divide="ignore"):
        ell = np.where(n > 0, 2.0 * np.arctanh(nc) * v / np.where(n > 0, n, 1.0), 0.0)
    return np.where(n > 1.0 + NORM_TOL, np.nan, ell)


def _bath_flow(g: BlochGenerator, states) -> np.ndarray:
    """lambda^2 (B r)_i, i = 1..3, for states of shape (..., 4)."""
    B = g.params.coupling_sq * g.bath_block[1:, :]
    return np.asarray(states, dtype=float) @ B.T


def _hamiltonian_flow(g: BlochGenerator, states) -> np.ndarray:
    return np.asarray(states, dtype=float) @ g.hamiltonian[1:, :].T


def sigma_many(g: BlochGenerator, states, ref: Reference) -> np.ndarray:
    """Vectorized sigma for states of shape (..., 4); NaN where unphysical.

    The Hamiltonian flow is orthogonal to l(r) and drops out of that term.
    """
    states = np.asarray(states, dtype=float)
    ell = log_vector(states)
    out = np.einsum("...i,...i->...", _bath_flow(g, states), ell - ref.log_vector)
    return out - _hamiltonian_flow(g, states) @ ref.log_vector


def _check_physical(r) -> np.ndarray:
    r = as_bloch(r)
    if abs(r[0] - 1.0) > 1e-12:
        raise ValueError("Bloch vector must have r0 == 1")
    n = float(np.linalg.norm(r[1:]))
    if n > 1.0 + NORM_TOL:
        raise UnphysicalStateError(f"polarization {n} exceeds 1")
    return r


def entropy_production_bloch(g: BlochGenerator, r, r_ref=None) -> float:
    """Internal entropy production in units of Delta.

    ``r_ref`` may be a Bloch vector, a :class:`Reference`, ``"gibbs"`` or
    ``"stationary"`` (default). Pure states are evaluated at polarization
    ``1 - 1e-9``.
    """
    r = _check_physical(r)
    return float(sigma_many(g, r, _resolve_reference(g, r_ref)))


def entropy_rate(g: BlochGenerator, r) -> float:
    """dS/dt = -Tr(L[rho] log rho)."""
    r = _check_physical(r)
    return float(_bath_flow(g, r) @ log_vector(r))


def heat_flux(g: BlochGenerator, r) -> float:
    """Tr(H_eff K[rho]) with K the non-Hamiltonian part of the generator."""
    r = _check_physical(r)
    return float(-g.params.omega_eff * _bath_flow(g, r)[2])


def heat_flux_many(g: BlochGenerator, states) -> np.ndarray:
    return -g.params.omega_eff * _bath_flow(g, states)[..., 2]


# --- trace-formula oracle ----------------------------------------------------

def _log_on_support(rho, atol=1e-14):
    p, V = np.linalg.eigh(rho)
    support = p > atol
    logs = np.where(support, np.log(np.where(support, p, 1.0)), 0.0)
    return p, V, logs, support


def entropy_production_trace(g: BlochGenerator, r, r_ref=None) -> float:
    """-Tr(L[rho] (log rho - log rho_ref)) by 2x2 spectral decomposition.

    For a pure ``r`` the logarithm is taken on the support. If the generator
    moves weight into the kernel of rho the result diverges and +-inf is
    returned with the sign of that weight.
    """
    r = _check_physical(r)
    params = g.params
    if r_ref is None:
        r_ref = stationary_bloch(g)
    elif isinstance(r_ref, Reference):
        r_ref = r_ref.bloch
    r_ref = as_bloch(r_ref)
    if np.linalg.norm(r_ref[1:]) >= 1.0:
        raise ValueError("reference state must be strictly mixed")
    basis = rotated_pauli(params)
    rho = 0.5 * np.tensordot(r, basis, axes=1)
    ref = 0.5 * np.tensordot(r_ref, basis, axes=1)
    drho = operator_action(-2.0 * g.matrix, rho, params)

    p, V, logs, support = _log_on_support(rho)
    flow = np.real(np.einsum("ia,ij,ja->a", V.conj(), drho, V))
    if not np.all(support):
        leak = float(np.sum(flow[~support]))
        if abs(leak) > 1e-14:
            return math.copysign(math.inf, leak)
    term_rho = -float(np.sum(flow * logs))

    q, W = np.linalg.eigh(ref)
    log_ref = (W * np.log(q)) @ W.conj().T
    term_ref = float(np.real(np.trace(drho @ log_ref)))
    return term_rho + term_ref


# --- reports -----------------------------------------------------------------

@dataclasses.dataclass(frozen=True)
class SigmaSample:
    time: float
    sigma: float
    entropy_rate: float
    heat_flux: float


@dataclasses.dataclass(frozen=True, eq=False)
class ViolationReport:
    """Second-law violation evidence for one generator.

    For scans ``t0_fraction_negative`` is the violating fraction of the
    sampled states. For trajectories it is 1.0 when the initial state
    already violates, else 0.0, and ``sigma_t0`` holds the initial value.
    """

    params: ModelParams
    generator_kind: GeneratorKind
    t0_fraction_negative: float
    negative_intervals: tuple
    min_sigma: float
    min_sigma_time: float
    sample_count: int
    rng_seed: int | None
    sigma_t0: float = math.nan
    unphysical_count: int = 0
    t_max: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.t0_fraction_negative <= 1.0:
            raise ValueError("fraction must lie in [0, 1]")
        last = -math.inf
        for a, b in self.negative_intervals:
            if not (last <= a <= b):
                raise ValueError("intervals must be ordered and disjoint")
            last = b

    @property
    def violates(self) -> bool:
        return self.t0_fraction_negative > 0 or bool(self.negative_intervals)


def violation_tolerance(params: ModelParams) -> float:
    return VIOLATION_SCALE * params.coupling_sq


# --- sampling ----------------------------------------------------------------

def equatorial_grid(n: int) -> tuple[np.ndarray, np.ndarray]:
    """n x n Cartesian grid over [-1, 1]^2 in the r3 = 0 plane.

    Returns the states (n*n, 4) in row-major (r2 fastest) order and a mask of
    the points inside the closed unit disk.
    """
    axis = np.linspace(-1.0, 1.0, n) if n > 1 else np.zeros(1)
    r1, r2 = np.meshgrid(axis, axis, indexing="ij")
    states = np.column_stack([np.ones(n * n), r1.ravel(), r2.ravel(), np.zeros(n * n)])
    inside = r1.ravel() ** 2 + r2.ravel() ** 2 <= 1.0 + 1e-12
    return states, inside


def random_states(n: int, seed: int, surface: bool = False) -> np.ndarray:
    """Uniform over the Bloch ball (radius u^(1/3)) or its surface."""
    rng = np.random.default_rng(seed)
    v = rng.standard_normal((n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    if not surface:
        v *= np.cbrt(rng.random(n))[:, None]
    return np.column_stack([np.ones(n), v])


def sample_states(sampling, n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    sampling = Sampling(sampling)
    if sampling is Sampling.EQUATORIAL_GRID:
        return equatorial_grid(n)
    states = random_states(n, seed, surface=sampling is Sampling.RANDOM_SPHERE)
    return states, np.ones(n, dtype=bool)


def violation_scan_t0(g: BlochGenerator, sampling="random_ball", n: int = 1000, seed: int = 0,
                      reference=None, states=None) -> ViolationReport:
    """sigma at t = 0 over a grid (n x n points) or n random states.

    Explicit ``states`` override the sampler.
    """
    if states is None:
        if n < 1:
            raise ValueError("n must be >= 1")
        states, inside = sample_states(sampling, n, seed)
        states = states[inside]
    else:
        states = np.atleast_2d(np.asarray(states, dtype=float))
    ref = _resolve_reference(g, reference)
    sig = sigma_many(g, states, ref)
    finite = np.isfinite(sig)
    tol = violation_tolerance(g.params)
    frac = float(np.count_nonzero(sig[finite] < -tol)) / max(1, np.count_nonzero(finite))
    k = int(np.nanargmin(sig)) if finite.any() else 0
    return ViolationReport(
        params=g.params, generator_kind=g.kind, t0_fraction_negative=frac,
        negative_intervals=(), min_sigma=float(sig[k]), min_sigma_time=0.0,
        sample_count=int(states.shape[0]), rng_seed=seed,
        unphysical_count=int(np.count_nonzero(~finite)),
    )


# --- violations along trajectories ------------------------------------------

def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Index ranges [i, j] of maximal True runs."""
    if not mask.any():
        return []
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(np.int8)))
    return [(int(a), int(b) - 1) for a, b in zip(edges[::2], edges[1::2])]


def _bisect(fn, lo: float, hi: float, lo_negative: bool, tol: float) -> float:
    """Locate the crossing of ``fn < 0`` between lo and hi."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if (fn(mid) < 0) == lo_negative:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sigma_series(g: BlochGenerator, r0, t_max: float, dt: float | None = None, reference=None):
    """Times, states and sigma along a trajectory."""
    rec = trajectory(g, r0, t_max, dt)
    ref = _resolve_reference(g, reference)
    return rec, sigma_many(g, rec.states, ref)


def sigma_samples(g: BlochGenerator, r0, t_max: float, dt: float | None = None,
                  reference=None) -> list[SigmaSample]:
    rec, sig = sigma_series(g, r0, t_max, dt, reference)
    rate = np.einsum("ki,ki->k", _bath_flow(g, rec.states), log_vector(rec.states))
    heat = heat_flux_many(g, rec.states)
    return [SigmaSample(float(t), float(s), float(e), float(q))
            for t, s, e, q in zip(rec.times, sig, rate, heat)]


def violation_intervals(g: BlochGenerator, r0, t_max: float, dt: float | None = None,
                        reference=None) -> ViolationReport:
    """Maximal time intervals with sigma < -tolerance, endpoints bisected to 1e-3 dt."""
    if dt is None:
        dt = default_dt(g.params)
    r0 = _check_physical(r0)
    ref = _resolve_reference(g, reference)
    rec = trajectory(g, r0, t_max, dt)
    sig = sigma_many(g, rec.states, ref)
    tol = violation_tolerance(g.params)
    times = rec.times

    def shifted(t):
        return float(sigma_many(g, propagate(g, r0, t), ref)) + tol

    intervals = []
    for i, j in _runs(sig < -tol):
        start = times[0] if i == 0 else _bisect(shifted, times[i - 1], times[i], False, 1e-3 * dt)
        end = times[-1] if j == len(times) - 1 else _bisect(shifted, times[j], times[j + 1], True, 1e-3 * dt)
        intervals.append((float(start), float(end)))

    finite = np.isfinite(sig)
    k = int(np.nanargmin(sig)) if finite.any() else 0
    return ViolationReport(
        params=g.params, generator_kind=g.kind,
        t0_fraction_negative=1.0 if sig[0] < -tol else 0.0,
        negative_intervals=tuple(intervals), min_sigma=float(sig[k]),
        min_sigma_time=float(times[k]), sample_count=int(times.size), rng_seed=None,
        sigma_t0=float(sig[0]), unphysical_count=int(np.count_nonzero(~finite)),
        t_max=float(times[-1]),
    )


def batch_sigma_trajectories(g: BlochGenerator, states, steps: int, dt: float, ref: Reference) -> np.ndarray:
    """sigma for many initial states, shape (n_states, steps + 1)."""
    step = propagator(g, dt)
    cur = np.array(states, dtype=float)
    out = np.empty((cur.shape[0], steps + 1))
    out[:, 0] = sigma_many(g, cur, ref)
    for k in range(steps):
        cur = cur @ step.T
        cur[:, 0] = 1.0
        out[:, k + 1] = sigma_many(g, cur, ref)
    return out


def find_time_violation(g: BlochGenerator, candidates, periods: float = 10.0,
                        min_intervals: int = 2, reference=None):
    """First candidate (in order) whose sigma goes negative in at least
    ``min_intervals`` disjoint intervals over ``periods`` effective periods.

    Returns (state, report) or (None, None).
    """
    ref = _resolve_reference(g, reference)
    dt = default_dt(g.params)
    steps = int(round(periods * g.params.period / dt))
    sig = batch_sigma_trajectories(g, candidates, steps, dt, ref)
    tol = violation_tolerance(g.params)
    for k, row in enumerate(sig):
        if len(_runs(row < -tol)) >= min_intervals:
            state = np.asarray(candidates[k], dtype=float)
            return state, violation_intervals(g, state, steps * dt, dt, ref)
    return None, None


# --- parameter sweeps --------------------------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class SweepCell:
    """One (temperature, ratio) cell of a sweep with paired reports."""

    index: int
    temperature: float
    ratio: float
    redfield: ViolationReport | None
    weak_coupling: ViolationReport | None
    time_violation_state: np.ndarray | None = None
    time_violation: ViolationReport | None = None
    cp_min_sigma_along: float = math.nan
    error: str | None = None

    @property
    def has_time_violation(self) -> bool:
        return self.time_violation is not None

    @property
    def reports(self) -> list[ViolationReport]:
        return [r for r in (self.redfield, self.weak_coupling) if r is not None]


def _sweep_cell(args) -> SweepCell:
    index, T, ratio, base, n_states, seed, search, periods = args
    try:
        params = base.replace(temperature=T).with_ratio(ratio)
        red = build_redfield(params)
        wc = build_weak_coupling(params)
        red_rep = violation_scan_t0(red, Sampling.RANDOM_BALL, n_states, seed)
        wc_rep = violation_scan_t0(wc, Sampling.RANDOM_BALL, n_states, seed)
        candidates = random_states(n_states, seed)[:search]
        state, time_rep = find_time_violation(red, candidates, periods)
        dt = default_dt(params)
        steps = int(round(periods * params.period / dt))
        cp_sig = batch_sigma_trajectories(wc, candidates, steps, dt, Reference.stationary(wc))
        return SweepCell(index, T, ratio, red_rep, wc_rep, state, time_rep, float(np.nanmin(cp_sig)))
    except Exception as exc:  # isolate the cell, keep sweeping
        return SweepCell(index, T, ratio, None, None, error=f"{type(exc).__name__}: {exc}")


def worker_count() -> int:
    env = os.environ.get("OQS_NUM_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parameter_sweep(T_values, ratio_values, base: ModelParams, n_states: int = 1000, seed: int = 0,
                    search_states: int = 200, periods: float = 10.0,
                    workers: int | None = None) -> list[SweepCell]:
    """Violation statistics on the (T, Omega/Delta) grid, ordered T-major.

    Every cell uses the same seeded states so cells are directly comparable.
    """
    T_values, ratio_values = list(T_values), list(ratio_values)
    if not T_values or not ratio_values:
        raise ValueError("sweep grids must be nonempty")
    jobs = [(i * len(ratio_values) + j, T, x, base, n_states, seed, search_states, periods)
            for i, T in enumerate(T_values) for j, x in enumerate(ratio_values)]
    workers = min(workers or worker_count(), len(jobs))
    if workers <= 1:
        cells = [_sweep_cell(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(_sweep_cell, jobs))
    return sorted(cells, key=lambda c: c.index)
