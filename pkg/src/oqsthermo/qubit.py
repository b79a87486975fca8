"""Single-qubit algebra in the rotated Pauli basis.

States are Bloch 4-vectors ``r = (r0, r1, r2, r3)`` with
``rho = (1/2) sum_mu r_mu sh_mu`` where ``sh_0`` is the identity,
``sh_1 = s1``, ``sh_2 = (s2 + (Omega/Delta) s3) / w`` and
``sh_3 = (s3 - (Omega/Delta) s2) / w`` with ``w = sqrt(1 + (Omega/Delta)^2)``.
"""
from __future__ import annotations

from enum import Enum

import numpy as np

from .params import ModelParams

NORM_TOL = 1e-9

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = np.array([IDENTITY, SIGMA_X, SIGMA_Y, SIGMA_Z])


class UnphysicalStateError(ValueError):
    pass


class FrameDirection(str, Enum):
    TO_ROTATING = "to_rotating"
    TO_LAB = "to_lab"


def mixing_angles(ratio: float) -> tuple[float, float]:
    """(cos a, sin a) = (Delta, Omega) / omega_eff."""
    w = np.hypot(1.0, ratio)
    return 1.0 / w, ratio / w


def rotated_pauli(params: ModelParams | float) -> np.ndarray:
    """Stack ``(sh_0, sh_1, sh_2, sh_3)`` of shape (4, 2, 2)."""
    ratio = params.ratio if isinstance(params, ModelParams) else float(params)
    c, s = mixing_angles(ratio)
    return np.array([
        IDENTITY,
        SIGMA_X,
        c * SIGMA_Y + s * SIGMA_Z,
        c * SIGMA_Z - s * SIGMA_Y,
    ])


def bloch(r1: float, r2: float, r3: float) -> np.ndarray:
    return np.array([1.0, r1, r2, r3])


def as_bloch(r) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if r.shape != (4,):
        raise ValueError(f"Bloch vector must have shape (4,), got {r.shape}")
    if not np.all(np.isfinite(r)):
        raise ValueError("Bloch vector has non-finite components")
    return r


def polarization(r) -> float:
    r = np.asarray(r, dtype=float)
    return float(np.linalg.norm(r[..., 1:], axis=-1))


def density_from_bloch(r, params: ModelParams | float) -> np.ndarray:
    r = as_bloch(r)
    if abs(r[0] - 1.0) > 1e-12:
        raise ValueError("Bloch vector must have r0 == 1")
    return 0.5 * np.tensordot(r, rotated_pauli(params), axes=1)


def bloch_from_density(rho, params: ModelParams | float, atol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError("density matrix must be 2x2")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    r = np.real(np.einsum("mij,ji->m", rotated_pauli(params), rho))
    if abs(r[0] - 1.0) > atol:
        raise ValueError(f"density matrix trace is {r[0]}, expected 1")
    r[0] = 1.0
    return r


def _checked_norm(r) -> float:
    n = polarization(r)
    if n > 1.0 + NORM_TOL:
        raise UnphysicalStateError(f"polarization {n} exceeds 1")
    return min(n, 1.0)


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(p > 0, p * np.log(np.where(p > 0, p, 1.0)), 0.0)


def binary_entropy(n) -> np.ndarray:
    """Entropy of a qubit with polarization ``n`` (vectorized)."""
    n = np.clip(np.asarray(n, dtype=float), 0.0, 1.0)
    return -(_xlogx(0.5 * (1 + n)) + _xlogx(0.5 * (1 - n)))


def von_neumann_entropy(r) -> float:
    return float(binary_entropy(_checked_norm(r)))


def log_ratio(n) -> np.ndarray:
    """``log((1+n)/(1-n))``, i.e. 2 artanh(n)."""
    return 2.0 * np.arctanh(np.asarray(n, dtype=float))


def relative_entropy(r, s) -> float:
    """Tr rho (log rho - log sigma) for Bloch vectors ``r`` and ``s``.

    Returns ``inf`` when ``s`` is pure and the states differ.
    """
    nr = _checked_norm(r)
    ns = _checked_norm(s)
    r = np.asarray(r, float)
    s = np.asarray(s, float)
    if ns >= 1.0:
        if np.allclose(r[1:], s[1:], atol=1e-12):
            return 0.0
        return float("inf")
    dot = float(np.dot(r[1:], s[1:]))
    tr_rho_log_sigma = 0.5 * np.log(0.25 * (1 - ns * ns))
    if ns > 0:
        tr_rho_log_sigma += 0.5 * log_ratio(ns) * dot / ns
    return float(-binary_entropy(nr) - tr_rho_log_sigma)


def trace_distance(r, s) -> float:
    _checked_norm(r)
    _checked_norm(s)
    return 0.5 * float(np.linalg.norm(np.asarray(r, float)[1:] - np.asarray(s, float)[1:]))


def frame_unitary(t: float, params: ModelParams) -> np.ndarray:
    """R_t = exp(-i Omega t s2 / 2) with time in units of 1/Delta."""
    phi = 0.5 * params.ratio * t
    return np.cos(phi) * IDENTITY - 1j * np.sin(phi) * SIGMA_Y


def rotate_frame(r, t: float, params: ModelParams,
                 direction: FrameDirection | str = FrameDirection.TO_ROTATING) -> np.ndarray:
    """Map a lab-frame state to the rotating frame (``R^+ rho R``) or back."""
    direction = FrameDirection(direction)
    R = frame_unitary(t, params)
    rho = density_from_bloch(r, params)
    if direction is FrameDirection.TO_ROTATING:
        out = R.conj().T @ rho @ R
    else:
        out = R @ rho @ R.conj().T
    return bloch_from_density(out, params)
