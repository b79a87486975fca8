"""Ohmic bath: spectral density, thermal two-point functions and the
one-sided time integrals that feed the dissipative coefficients.

Frequencies are in units of Delta and ``beta`` is the dimensionless
combination beta*hbar*Delta, so thermal factors read coth(beta*w/2).
"""
from __future__ import annotations

import dataclasses
import functools
import math
from enum import Enum

import numpy as np
from scipy import integrate

from .params import ModelParams

QUAD_EPSABS = 1e-10
QUAD_EPSREL = 1e-8


class QuadratureError(RuntimeError):
    """Raised when an integral misses its tolerance; carries the estimate."""

    def __init__(self, message, value=None, error=None):
        super().__init__(message)
        self.value = value
        self.error = error


class Kernel(str, Enum):
    COS = "cos"
    SIN = "sin"


class Part(str, Enum):
    REAL = "real"
    IMAG = "imag"


@dataclasses.dataclass(frozen=True)
class SpectralModel:
    """Ohmic spectral density J(w) = w exp(-w/omega_cutoff) at inverse
    temperature ``beta`` (``math.inf`` for the zero-temperature bath)."""

    omega_cutoff: float
    beta: float
    form: str = "ohmic-exponential-cutoff"

    def __post_init__(self):
        if self.form != "ohmic-exponential-cutoff":
            raise ValueError(f"unsupported spectral form {self.form!r}")
        if not self.omega_cutoff > 0:
            raise ValueError("omega_cutoff must be positive")
        if not self.beta > 0:
            raise ValueError("beta must be positive")

    @classmethod
    def from_params(cls, params: ModelParams) -> "SpectralModel":
        return cls(omega_cutoff=params.cutoff_ratio, beta=params.beta)

    @property
    def zero_temperature(self) -> bool:
        return math.isinf(self.beta)


@dataclasses.dataclass(frozen=True)
class TransformRequest:
    nu: float
    time_kernel: Kernel
    correlation_part: Part

    def __post_init__(self):
        if not math.isfinite(self.nu):
            raise ValueError("nu must be finite")
        object.__setattr__(self, "time_kernel", Kernel(self.time_kernel))
        object.__setattr__(self, "correlation_part", Part(self.correlation_part))


# --- spectral functions ---------------------------------------------------

def spectral_density(omega, model: SpectralModel):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    out = omega * np.exp(-omega / model.omega_cutoff)
    return out if out.ndim else float(out)


def coth_half(beta: float, omega):
    """coth(beta*omega/2) via expm1 (no cancellation at small argument)."""
    omega = np.asarray(omega, dtype=float)
    if math.isinf(beta):
        return np.ones_like(omega) if omega.ndim else 1.0
    with np.errstate(divide="ignore", over="ignore"):
        out = 1.0 + 2.0 / np.expm1(beta * omega)
    return out if out.ndim else float(out)


def _bose_weight(omega, beta):
    """omega / expm1(beta*omega), equal to 1/beta at omega = 0."""
    omega = np.asarray(omega, dtype=float)
    x = beta * omega
    small = np.abs(x) < 1e-8
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = np.where(small, (1.0 - 0.5 * x) / beta, omega / np.expm1(np.where(small, 1.0, x)))
    return out


def thermal_density(omega, model: SpectralModel):
    """J(w) coth(beta w / 2) for w >= 0, continuous at w = 0 (value 2/beta)."""
    omega = np.asarray(omega, dtype=float)
    decay = np.exp(-omega / model.omega_cutoff)
    if model.zero_temperature:
        out = omega * decay
    else:
        out = (omega + 2.0 * _bose_weight(omega, model.beta)) * decay
    return out if out.ndim else float(out)


def two_point(t, omega, model: SpectralModel):
    """C_t(w) = cos(w t) coth(beta w / 2) - i sin(w t)."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0) and not model.zero_temperature:
        raise ValueError("two_point needs omega > 0; use the J-weighted form at omega = 0")
    t = np.asarray(t, dtype=float)
    out = np.cos(omega * t) * coth_half(model.beta, omega) - 1j * np.sin(omega * t)
    return out if out.ndim else complex(out)


def _checked_quad(func, a, b, what, **kwargs):
    kwargs.setdefault("epsabs", QUAD_EPSABS)
    kwargs.setdefault("epsrel", QUAD_EPSREL)
    kwargs.setdefault("limit", 500)
    value, err, *rest = integrate.quad(func, a, b, full_output=1, **kwargs)
    info = rest[1] if len(rest) > 1 else ""
    tol = max(kwargs["epsabs"], kwargs["epsrel"] * abs(value))
    if err > 100 * tol:
        raise QuadratureError(f"{what}: error estimate {err:.3e} above tolerance ({info})",
                              value=value, error=err)
    return value


def bath_correlation(u: float, model: SpectralModel) -> complex:
    """G(u) = int_0^inf dw J(w) C_u(w), both parts by adaptive quadrature."""
    u = float(u)
    if u < 0:
        raise ValueError("bath_correlation needs u >= 0")
    wc = model.omega_cutoff
    scale = wc * wc
    opts = dict(epsabs=1e-13 * scale, epsrel=1e-11)
    f = functools.partial(thermal_density, model=model)
    j = functools.partial(spectral_density, model=model)
    if u == 0.0:
        re = _checked_quad(f, 0.0, np.inf, "Re G(0)", **opts)
        return complex(re, 0.0)
    re = _checked_quad(f, 0.0, np.inf, "Re G(u)", weight="cos", wvar=u, epsabs=opts["epsabs"])
    im = -_checked_quad(j, 0.0, np.inf, "Im G(u)", weight="sin", wvar=u, epsabs=opts["epsabs"])
    return complex(re, im)


def bath_correlation_imag_exact(u, model: SpectralModel):
    """Closed form of Im G(u) = -2 u wc^3 / (1 + u^2 wc^2)^2."""
    wc = model.omega_cutoff
    u = np.asarray(u, dtype=float)
    return -2.0 * u * wc ** 3 / (1.0 + (u * wc) ** 2) ** 2


def bath_correlation_real_zero_temperature(u, model: SpectralModel):
    """Closed form of Re G(u) for beta -> inf."""
    wc = model.omega_cutoff
    x = (np.asarray(u, dtype=float) * wc) ** 2
    return (1.0 - x) * wc * wc / (1.0 + x) ** 2


# --- one-sided transforms (frequency route) -------------------------------

def _breakpoints(lo, hi, model, extra=()):
    pts = [5.0 / model.beta if not model.zero_temperature else 0.0,
           40.0 / model.beta if not model.zero_temperature else 0.0,
           model.omega_cutoff, 5 * model.omega_cutoff, *extra]
    return sorted({p for p in pts if lo < p < hi})


def _principal_value(numer, nu, model, what):
    """PV int_0^inf numer(w) / (w - nu) dw for nu > 0."""
    b = 2.0 * nu
    head = _checked_quad(numer, 0.0, b, what, weight="cauchy", wvar=nu,
                         epsabs=1e-13, epsrel=1e-12)
    top = 60.0 * model.omega_cutoff
    tail_f = lambda w: numer(w) / (w - nu)  # noqa: E731
    tail = 0.0
    edges = [b, *_breakpoints(b, top, model), top]
    for lo, hi in zip(edges[:-1], edges[1:]):
        tail += _checked_quad(tail_f, lo, hi, what, epsabs=1e-13, epsrel=1e-12)
    return head + tail


@functools.lru_cache(maxsize=4096)
def _transform_cached(nu: float, kernel: Kernel, part: Part, model: SpectralModel) -> float:
    sign = math.copysign(1.0, nu)
    a = abs(nu)
    if kernel is Kernel.COS and part is Part.REAL:
        # int_0^inf du cos(nu u) Re G(u) = (pi/2) J(|nu|) coth(beta |nu| / 2)
        return 0.5 * math.pi * thermal_density(a, model)
    if kernel is Kernel.SIN and part is Part.IMAG:
        return -0.5 * math.pi * sign * spectral_density(a, model) if a > 0 else 0.0
    if kernel is Kernel.SIN and part is Part.REAL:
        # PV int dw f(w) nu / (nu^2 - w^2)
        if a == 0.0:
            return 0.0
        numer = lambda w: -a * thermal_density(w, model) / (w + a)  # noqa: E731
        return sign * _principal_value(numer, a, model, "sin/real transform")
    # cos kernel, imaginary part: -PV int dw J(w) w / (w^2 - nu^2)
    if a == 0.0:
        return -_checked_quad(lambda w: math.exp(-w / model.omega_cutoff), 0.0, np.inf,
                              "cos/imag transform", epsabs=1e-13, epsrel=1e-12)
    numer = lambda w: spectral_density(w, model) * w / (w + a)  # noqa: E731
    return -_principal_value(numer, a, model, "cos/imag transform")


def one_sided_transform(req: TransformRequest, model: SpectralModel) -> float:
    """int_0^inf du [part of G(u)] * kernel(nu u).

    The u-integral is taken analytically (delta-function and principal-value
    parts), leaving one-dimensional frequency integrals.
    """
    return _transform_cached(float(req.nu), Kernel(req.time_kernel), Part(req.correlation_part), model)


def transform(nu: float, kernel: Kernel | str, part: Part | str, model: SpectralModel) -> float:
    return one_sided_transform(TransformRequest(nu, kernel, part), model)


def one_sided_complex(nu: float, kernel: Kernel | str, model: SpectralModel) -> complex:
    """int_0^inf du G(u) kernel(nu u) as a complex number."""
    return complex(transform(nu, kernel, Part.REAL, model), transform(nu, kernel, Part.IMAG, model))


def half_fourier(nu: float, model: SpectralModel) -> complex:
    """Gamma(nu) = int_0^inf du exp(i nu u) G(u)."""
    return one_sided_complex(nu, Kernel.COS, model) + 1j * one_sided_complex(nu, Kernel.SIN, model)


# --- time route: Abel-regularized quadrature ------------------------------

def _gauss_panels(edges, order):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.asarray(edges, dtype=float)
    lo, hi = edges[:-1, None], edges[1:, None]
    half = 0.5 * (hi - lo)
    nodes = (lo + half * (1 + x)).ravel()
    weights = (half * w).ravel()
    return nodes, weights


@dataclasses.dataclass(frozen=True)
class CorrelationGrid:
    """G(u) sampled on composite Gauss-Legendre nodes over [0, u_max]."""

    nodes: np.ndarray
    weights: np.ndarray
    real: np.ndarray
    imag: np.ndarray


@functools.lru_cache(maxsize=16)
def correlation_grid(model: SpectralModel, u_max: float = 1.0e3, max_freq: float = 25.0,
                     order: int = 16) -> CorrelationGrid:
    """Sample G on a grid resolving kernels up to frequency ``max_freq``.

    The zero-temperature and imaginary parts are closed-form; the thermal
    remainder 2 int J(w) n(w) cos(w u) dw is done by Gauss-Legendre in w.
    """
    a = 1.0 / model.omega_cutoff
    near = np.geomspace(1e-4 * a, 1.0, 60)
    w_top = 0.0 if model.zero_temperature else min(60.0 / model.beta, 60.0 * model.omega_cutoff)
    h_u = min(0.25, 2.0 * math.pi / max(max_freq, w_top, 1.0))
    far = np.arange(1.0, u_max, h_u)[1:]
    edges = np.concatenate([[0.0], near, far, [u_max]])
    u, wu = _gauss_panels(edges, order)

    real = bath_correlation_real_zero_temperature(u, model)
    imag = bath_correlation_imag_exact(u, model)
    if not model.zero_temperature:
        h_w = min(w_top / 8, 6.0 * math.pi / u_max)
        n_w = int(math.ceil(w_top / h_w))
        om, ww = _gauss_panels(np.linspace(0.0, w_top, n_w + 1), order)
        dens = 2.0 * _bose_weight(om, model.beta) * np.exp(-om / model.omega_cutoff) * ww
        thermal = np.empty_like(u)
        for start in range(0, u.size, 2048):
            sl = slice(start, start + 2048)
            thermal[sl] = np.cos(np.outer(u[sl], om)) @ dens
        real = real + thermal
    return CorrelationGrid(u, wu, real, imag)


def abel_transform(req: TransformRequest, model: SpectralModel, eps0: float,
                   grid: CorrelationGrid | None = None, levels: int = 3) -> float:
    """Time-domain value of ``one_sided_transform``.

    Integrates exp(-eps u) kernel(nu u) G(u) on a grid for eps = eps0,
    eps0/2, eps0/4 and Richardson-extrapolates to eps = 0.
    """
    if grid is None:
        grid = correlation_grid(model)
    g = grid.real if Part(req.correlation_part) is Part.REAL else grid.imag
    trig = np.cos if Kernel(req.time_kernel) is Kernel.COS else np.sin
    base = grid.weights * trig(req.nu * grid.nodes) * g
    table = [float(np.sum(base * np.exp(-(eps0 / 2 ** k) * grid.nodes))) for k in range(levels)]
    # Richardson on eps -> 0 with halving ratio
    for order in range(1, levels):
        factor = 2.0 ** order
        table = [(factor * table[k + 1] - table[k]) / (factor - 1.0) for k in range(len(table) - 1)]
    return table[0]
