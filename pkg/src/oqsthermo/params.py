"""Physical parameters of the driven qubit and unit handling.

All numerics run in dimensionless units: frequencies in units of the
pumping amplitude ``delta``, times in ``1/delta``, hbar = k_B = 1.
Physical inputs (rad/s, kelvin) are converted once at the boundary.
"""
from __future__ import annotations

import dataclasses
import math
from enum import Enum

from scipy import constants

HBAR = constants.hbar
K_B = constants.k


class UnitMode(str, Enum):
    PHYSICAL = "physical"
    DIMENSIONLESS = "dimensionless"


@dataclasses.dataclass(frozen=True)
class ModelParams:
    """Driven open qubit parameters.

    In ``physical`` mode ``delta``, ``omega_drive`` and ``omega_cutoff`` are
    angular frequencies in rad/s and ``temperature`` is in kelvin. In
    ``dimensionless`` mode ``delta`` must be 1, the other frequencies are in
    units of delta and ``temperature`` means k_B T / (hbar delta).
    """

    delta: float
    omega_drive: float
    lambda_coupling: float
    temperature: float
    omega_cutoff: float
    unit_mode: UnitMode = UnitMode.PHYSICAL

    def __post_init__(self):
        object.__setattr__(self, "unit_mode", UnitMode(self.unit_mode))
        for name in ("delta", "omega_drive", "lambda_coupling", "temperature", "omega_cutoff"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.omega_cutoff <= 0:
            raise ValueError("omega_cutoff must be positive")
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.omega_drive < 0:
            raise ValueError("omega_drive must be non-negative")
        if self.unit_mode is UnitMode.DIMENSIONLESS and self.delta != 1.0:
            raise ValueError("dimensionless mode requires delta == 1")

    # dimensionless views -------------------------------------------------

    @property
    def ratio(self) -> float:
        """Omega / Delta."""
        return self.omega_drive / self.delta

    @property
    def cutoff_ratio(self) -> float:
        """omega_c / Delta."""
        return self.omega_cutoff / self.delta

    @property
    def omega_eff(self) -> float:
        """Effective frequency sqrt(1 + (Omega/Delta)^2), in units of Delta."""
        return math.hypot(1.0, self.ratio)

    @property
    def beta(self) -> float:
        """Dimensionless inverse temperature beta * hbar * Delta."""
        if self.unit_mode is UnitMode.DIMENSIONLESS:
            return 1.0 / self.temperature
        return HBAR * self.delta / (K_B * self.temperature)

    @property
    def coupling_sq(self) -> float:
        return self.lambda_coupling ** 2

    @property
    def time_unit(self) -> float:
        """Seconds per dimensionless time unit (1 in dimensionless mode)."""
        if self.unit_mode is UnitMode.DIMENSIONLESS:
            return 1.0
        return 1.0 / self.delta

    @property
    def period(self) -> float:
        """Effective rotation period 2 pi / omega_eff in units of 1/Delta."""
        return 2.0 * math.pi / self.omega_eff

    def replace(self, **changes) -> "ModelParams":
        return dataclasses.replace(self, **changes)

    def with_ratio(self, ratio: float) -> "ModelParams":
        return self.replace(omega_drive=ratio * self.delta)

    def to_dimensionless(self) -> "ModelParams":
        if self.unit_mode is UnitMode.DIMENSIONLESS:
            return self
        return ModelParams(
            delta=1.0,
            omega_drive=self.ratio,
            lambda_coupling=self.lambda_coupling,
            temperature=1.0 / self.beta,
            omega_cutoff=self.cutoff_ratio,
            unit_mode=UnitMode.DIMENSIONLESS,
        )

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["unit_mode"] = self.unit_mode.value
        return d


class FrequencyConvention(str, Enum):
    """How a quoted frequency such as "8 GHz" maps to an angular frequency."""

    CYCLIC = "cyclic"    # f in Hz, omega = 2 pi f
    ANGULAR = "angular"  # the number is already in rad/s


def angular_frequency(value_hz: float, convention: FrequencyConvention | str) -> float:
    convention = FrequencyConvention(convention)
    return 2.0 * math.pi * value_hz if convention is FrequencyConvention.CYCLIC else value_hz


def footnote_params(convention: FrequencyConvention | str = FrequencyConvention.CYCLIC) -> ModelParams:
    """Reference operating point: lambda = 0.005, T = 6 mK, Delta = 8 GHz,
    omega_c/Delta = 1e3, Omega/Delta = 2.

    With the default cyclic reading beta*hbar*Delta is about 64; the angular
    reading gives about 10.2.
    """
    delta = angular_frequency(8.0e9, convention)
    return ModelParams(
        delta=delta,
        omega_drive=2.0 * delta,
        lambda_coupling=0.005,
        temperature=0.006,
        omega_cutoff=1.0e3 * delta,
        unit_mode=UnitMode.PHYSICAL,
    )


# temperature and drive grid explored in the sweeps (kelvin, Omega/Delta)
SWEEP_TEMPERATURES = (0.0006, 0.006, 0.06)
SWEEP_RATIOS = (0.1, 1.0, 2.0, 10.0)
