"""Propagation of Bloch vectors under a fixed rotating-frame generator."""
from __future__ import annotations

import csv
import dataclasses
import math

import numpy as np
from scipy import linalg

from .generators import BlochGenerator, GeneratorKind
from .params import ModelParams
from .qubit import NORM_TOL, as_bloch


def propagator(g: BlochGenerator, t: float) -> np.ndarray:
    """exp(-2 t L); the r0 row is pinned to (1, 0, 0, 0)."""
    if t < 0:
        raise ValueError("t must be non-negative")
    U = linalg.expm(-2.0 * t * g.matrix)
    U[0, :] = (1.0, 0.0, 0.0, 0.0)
    return U


def propagate(g: BlochGenerator, r0, t: float) -> np.ndarray:
    r0 = as_bloch(r0)
    out = propagator(g, t) @ r0
    out[0] = r0[0]
    return out


@dataclasses.dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    times: np.ndarray
    states: np.ndarray  # shape (n, 4)
    generator_kind: GeneratorKind
    params: ModelParams

    def __post_init__(self):
        if self.states.shape != (self.times.size, 4):
            raise ValueError("states must align with times")
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def norms(self) -> np.ndarray:
        return np.linalg.norm(self.states[:, 1:], axis=1)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["t", "r1", "r2", "r3", "norm"])
            for t, r, n in zip(self.times, self.states, self.norms):
                writer.writerow([f"{v:.17g}" for v in (t, r[1], r[2], r[3], n)])


def default_dt(params: ModelParams) -> float:
    """64 samples per effective rotation period."""
    return params.period / 64


def trajectory(g: BlochGenerator, r0, t_max: float, dt: float | None = None) -> TrajectoryRecord:
    if dt is None:
        dt = default_dt(g.params)
    if dt <= 0 or t_max < dt:
        raise ValueError("need dt > 0 and t_max >= dt")
    r0 = as_bloch(r0)
    steps = int(math.floor(t_max / dt * (1 + 1e-12)))
    step = propagator(g, dt)
    states = np.empty((steps + 1, 4))
    states[0] = r0
    for k in range(steps):
        states[k + 1] = step @ states[k]
    states[:, 0] = r0[0]
    times = dt * np.arange(steps + 1)
    return TrajectoryRecord(times, states, g.kind, g.params)


def purity_monitor(rec: TrajectoryRecord, tol: float = NORM_TOL) -> list[tuple[float, float]]:
    """Samples whose polarization exceeds 1 + tol (positivity loss)."""
    norms = rec.norms
    idx = np.flatnonzero(norms > 1.0 + tol)
    return [(float(rec.times[i]), float(norms[i])) for i in idx]
