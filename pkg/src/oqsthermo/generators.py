"""Bloch-space generators of the rotating-frame qubit dynamics.

Every generator is a real 4x4 matrix ``L`` acting on Bloch vectors through
``dr/dt = -2 L r``. It is stored together with its three parts so that
``L = hamiltonian + lambda^2 (lamb_shift + dissipative)``.
"""
from __future__ import annotations

import dataclasses
import math
from collections import defaultdict
from enum import Enum

import numpy as np
from scipy import linalg

from .bath import Kernel, SpectralModel, half_fourier, one_sided_complex, spectral_density, coth_half
from .params import ModelParams
from .qubit import mixing_angles, rotated_pauli


class GeneratorKind(str, Enum):
    REDFIELD = "redfield"
    WEAK_COUPLING = "weak_coupling"


class DegenerateStationaryStateError(ValueError):
    pass


class MalformedGeneratorError(ValueError):
    pass


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclasses.dataclass(frozen=True, eq=False)
class BlochGenerator:
    matrix: np.ndarray
    hamiltonian: np.ndarray
    lamb_shift: np.ndarray
    dissipative: np.ndarray
    kind: GeneratorKind
    params: ModelParams
    model: SpectralModel

    @classmethod
    def assemble(cls, hamiltonian, lamb_shift, dissipative, kind, params, model):
        lam2 = params.coupling_sq
        matrix = np.asarray(hamiltonian) + lam2 * (np.asarray(lamb_shift) + np.asarray(dissipative))
        matrix[0, :] = 0.0
        return cls(_frozen(matrix), _frozen(hamiltonian), _frozen(lamb_shift),
                   _frozen(dissipative), GeneratorKind(kind), params, model)

    @property
    def bath_block(self) -> np.ndarray:
        """Non-Hamiltonian part without the lambda^2 factor."""
        return self.lamb_shift + self.dissipative

    def rhs(self, r) -> np.ndarray:
        """Time derivative -2 L r."""
        return -2.0 * self.matrix @ np.asarray(r, dtype=float)


def hamiltonian_block(params: ModelParams) -> np.ndarray:
    """Bloch matrix of the commutator with H_eff = (omega_eff/2) sh_3."""
    h = np.zeros((4, 4))
    h[1, 2] = 0.5 * params.omega_eff
    h[2, 1] = -0.5 * params.omega_eff
    return h


# --- dressed coupling operators -------------------------------------------
#
# U_u s~_xi(-u) U_u^+ expanded over sh_1, sh_2, sh_3; each component is a
# sum of coef * kernel(nu u) with nu in {omega_eff +- Omega, Omega}.

def coupling_table(params: ModelParams) -> dict[int, list[list[tuple[float, Kernel, float]]]]:
    ratio = params.ratio
    c, s = mixing_angles(ratio)
    w = params.omega_eff
    wp, wm = w + ratio, w - ratio
    a, b = 0.5 * (1.0 - s), 0.5 * (1.0 + s)
    cos, sin = Kernel.COS, Kernel.SIN
    return {
        1: [
            [(b, cos, wm), (a, cos, wp)],
            [(a, sin, wp), (b, sin, wm)],
            [(-c, sin, ratio)],
        ],
        3: [
            [(a, sin, wp), (-b, sin, wm)],
            [(b, cos, wm), (-a, cos, wp)],
            [(c, cos, ratio)],
        ],
    }


def coupling_operators(params: ModelParams) -> dict[int, np.ndarray]:
    """The bare coupling operators s1 and s3 as sh-basis 3-vectors."""
    c, s = mixing_angles(params.ratio)
    return {1: np.array([1.0, 0.0, 0.0]), 3: np.array([0.0, s, c])}


def dressed_coupling(u, params: ModelParams) -> dict[int, np.ndarray]:
    """Evaluate the coefficient tables at times ``u`` (shape (..., 3))."""
    u = np.asarray(u, dtype=float)
    out = {}
    for xi, comps in coupling_table(params).items():
        vals = []
        for terms in comps:
            acc = np.zeros_like(u)
            for coef, kernel, nu in terms:
                acc = acc + coef * (np.cos(nu * u) if kernel is Kernel.COS else np.sin(nu * u))
            vals.append(acc)
        out[xi] = np.stack(vals, axis=-1)
    return out


# --- superoperator <-> Bloch ----------------------------------------------

def bloch_matrix_of(superop, params: ModelParams) -> np.ndarray:
    """Real 4x4 matrix S with r'_mu = sum_nu S_mu,nu r_nu for rho' = superop(rho)."""
    basis = rotated_pauli(params)
    S = np.empty((4, 4))
    for nu in range(4):
        image = superop(basis[nu])
        vals = 0.5 * np.einsum("mij,ji->m", basis, image)
        if np.max(np.abs(vals.imag)) > 1e-9 * max(1.0, np.max(np.abs(vals.real))):
            raise MalformedGeneratorError("superoperator does not preserve Hermiticity")
        S[:, nu] = vals.real
    return S


def operator_action(block: np.ndarray, rho, params: ModelParams) -> np.ndarray:
    """Apply the map rho -> rho' encoded by Bloch matrix ``block`` (r' = block r)."""
    basis = rotated_pauli(params)
    r = np.einsum("mij,ji->m", basis, rho)
    return 0.5 * np.tensordot(block @ r, basis, axes=1)


def _split_bath_block(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Split a generator block into antisymmetric (coherent) and rest."""
    lamb = np.zeros((4, 4))
    inner = S[1:, 1:]
    lamb[1:, 1:] = 0.5 * (inner - inner.T)
    diss = S - lamb
    diss[0, :] = 0.0
    return lamb, diss


# --- Redfield ---------------------------------------------------------------

def redfield_dressed_integrals(params: ModelParams, model: SpectralModel) -> dict[int, np.ndarray]:
    """b_xi = int_0^inf du G(u) U_u s~_xi(-u) U_u^+ as complex sh-basis 3-vectors."""
    out = {}
    for xi, comps in coupling_table(params).items():
        out[xi] = np.array([
            sum(coef * one_sided_complex(nu, kernel, model) for coef, kernel, nu in terms)
            for terms in comps
        ])
    return out


def redfield_superoperator(params: ModelParams, model: SpectralModel):
    """rho -> -sum_xi ([A, B rho] + [rho B^+, A]) as a callable."""
    basis = rotated_pauli(params)[1:]
    bvecs = redfield_dressed_integrals(params, model)
    pairs = []
    for xi, avec in coupling_operators(params).items():
        A = np.tensordot(avec, basis, axes=1)
        B = np.tensordot(bvecs[xi], basis, axes=1)
        pairs.append((A, B))

    def apply(rho):
        out = np.zeros((2, 2), dtype=complex)
        for A, B in pairs:
            Br = B @ rho
            rB = rho @ B.conj().T
            out -= (A @ Br - Br @ A) + (rB @ A - A @ rB)
        return out

    return apply


def build_redfield(params: ModelParams, model: SpectralModel | None = None) -> BlochGenerator:
    if model is None:
        model = SpectralModel.from_params(params)
    S = bloch_matrix_of(redfield_superoperator(params, model), params)
    lamb, diss = _split_bath_block(-0.5 * S)
    return BlochGenerator.assemble(hamiltonian_block(params), lamb, diss, GeneratorKind.REDFIELD, params, model)


# --- weak-coupling (Davies) generator --------------------------------------

def bohr_components(params: ModelParams, decimals: int = 12) -> dict[int, dict[float, np.ndarray]]:
    """Split U_u s~_xi(-u) U_u^+ = sum_w A_xi(w) exp(i w u); A as complex sh 3-vectors."""
    out = {}
    for xi, comps in coupling_table(params).items():
        acc: dict[float, np.ndarray] = defaultdict(lambda: np.zeros(3, dtype=complex))
        for k, terms in enumerate(comps):
            for coef, kernel, nu in terms:
                key_p, key_m = round(nu, decimals), round(-nu, decimals)
                if kernel is Kernel.COS:
                    acc[key_p][k] += 0.5 * coef
                    acc[key_m][k] += 0.5 * coef
                else:
                    acc[key_p][k] += coef / 2j
                    acc[key_m][k] -= coef / 2j
        out[xi] = dict(acc)
    return out


def davies_superoperator(params: ModelParams, model: SpectralModel):
    basis = rotated_pauli(params)[1:]
    terms = []
    lamb_h = np.zeros((2, 2), dtype=complex)
    for xi, comps in bohr_components(params).items():
        for freq, avec in comps.items():
            if not np.any(np.abs(avec) > 0):
                continue
            gamma = half_fourier(freq, model)
            A = np.tensordot(avec, basis, axes=1)
            AdA = A.conj().T @ A
            terms.append((2.0 * gamma.real, A, AdA))
            lamb_h += gamma.imag * AdA

    def apply(rho):
        out = -1j * (lamb_h @ rho - rho @ lamb_h)
        for rate, A, AdA in terms:
            out += rate * (A @ rho @ A.conj().T - 0.5 * (AdA @ rho + rho @ AdA))
        return out

    return apply


def build_weak_coupling(params: ModelParams, model: SpectralModel | None = None) -> BlochGenerator:
    if model is None:
        model = SpectralModel.from_params(params)
    S = bloch_matrix_of(davies_superoperator(params, model), params)
    lamb, diss = _split_bath_block(-0.5 * S)
    return BlochGenerator.assemble(hamiltonian_block(params), lamb, diss,
                                   GeneratorKind.WEAK_COUPLING, params, model)


def secular_average(g: BlochGenerator, samples: int = 16) -> BlochGenerator:
    """Average the bath part over one period of the H_eff rotation.

    The rotation is a trigonometric polynomial of degree 2 in omega_eff t,
    so an equally spaced rule with ``samples`` > 4 points is exact.
    """
    if not isinstance(g, BlochGenerator):
        raise TypeError("secular_average needs a BlochGenerator")
    h = g.hamiltonian
    period = 2.0 * math.pi / g.params.omega_eff
    parts = []
    for block in (g.lamb_shift, g.dissipative):
        acc = np.zeros((4, 4))
        for t in np.arange(samples) * period / samples:
            rot = linalg.expm(2.0 * t * h)
            acc += rot.T @ block @ rot
        parts.append(acc / samples)
    return BlochGenerator.assemble(h, parts[0], parts[1], GeneratorKind.WEAK_COUPLING, g.params, g.model)


# --- stationary state --------------------------------------------------------

def stationary_bloch(g: BlochGenerator, max_condition: float = 1e12) -> np.ndarray:
    block = g.matrix[1:, 1:]
    cond = np.linalg.cond(block)
    if not np.isfinite(cond) or cond > max_condition:
        raise DegenerateStationaryStateError(f"stationary state not unique (condition {cond:.3e})")
    x = linalg.solve(block, -g.matrix[1:, 0])
    return np.concatenate([[1.0], x])


def _sideband_weights(params: ModelParams, model: SpectralModel):
    w, ratio = params.omega_eff, params.ratio
    wp, wm = w + ratio, w - ratio
    return [(wm ** 2, wp), (wp ** 2, wm)]


def r3_equilibrium(params: ModelParams, model: SpectralModel | None = None) -> float:
    """Closed-form stationary polarization along sh_3 of the weak-coupling generator.

    Its magnitude is
    [(w-O)^2 J+ + (w+O)^2 J-] / [(w-O)^2 c+ J+ + (w+O)^2 c- J-]
    with J+- = J(w +- O) and c+- = coth(beta (w +- O) / 2). The state relaxes
    towards the lower level of H_eff, so the sign is negative.
    """
    if model is None:
        model = SpectralModel.from_params(params)
    num = den = 0.0
    for weight, nu in _sideband_weights(params, model):
        if nu <= 0:
            continue
        j = spectral_density(nu, model)
        num += weight * j
        den += weight * j * coth_half(model.beta, nu)
    return -num / den


def equilibrium_log_ratio(params: ModelParams, model: SpectralModel | None = None) -> float:
    """log(downward / upward rate) of the weak-coupling generator.

    Equals log((1 + |r3|) / (1 - |r3|)) for the closed-form equilibrium,
    evaluated without the cancellation in 1 - |r3| at low temperature.
    """
    if model is None:
        model = SpectralModel.from_params(params)
    if model.zero_temperature:
        return math.inf
    log_down, log_up = [], []
    for weight, nu in _sideband_weights(params, model):
        if nu <= 0:
            continue
        base = math.log(weight * spectral_density(nu, model))
        x = model.beta * nu
        # n = 1/expm1(x); n + 1 = 1/(1 - exp(-x))
        log_up.append(base - (x + math.log(-math.expm1(-x))))
        log_down.append(base - math.log(-math.expm1(-x)))
    return float(np.logaddexp.reduce(log_down) - np.logaddexp.reduce(log_up))


# --- complete positivity diagnostics ----------------------------------------

@dataclasses.dataclass(frozen=True, eq=False)
class KossakowskiData:
    matrix: np.ndarray
    eigenvalues: np.ndarray
    lamb_shift_vector: np.ndarray

    @property
    def is_completely_positive(self) -> bool:
        return bool(self.eigenvalues[0] >= -1e-12 * max(1.0, abs(self.eigenvalues[-1])))


def _vec_superop(fn) -> np.ndarray:
    """Row-major vectorization matrix of a map on 2x2 matrices."""
    S = np.zeros((4, 4), dtype=complex)
    for col in range(4):
        E = np.zeros(4, dtype=complex)
        E[col] = 1.0
        S[:, col] = fn(E.reshape(2, 2)).ravel()
    return S


def kossakowski_spectrum(g: BlochGenerator, tol: float = 1e-10) -> KossakowskiData:
    """Expand the bath part (without lambda^2) as
    sum_jk K_jk (sh_k rho sh_j - 1/2 {sh_j sh_k, rho}) - i [H_LS, rho]."""
    params = g.params
    basis = rotated_pauli(params)
    block = -2.0 * g.bath_block
    S = _vec_superop(lambda rho: operator_action(block, rho, params))
    F = basis / math.sqrt(2.0)
    c = np.einsum("mab,ncd,acbd->mn", F.conj(), F, S.reshape(2, 2, 2, 2))
    K = 0.5 * c[1:, 1:].T
    K = 0.5 * (K + K.conj().T)

    def gksl(rho):
        out = np.zeros((2, 2), dtype=complex)
        for j in range(3):
            for k in range(3):
                sj, sk = basis[j + 1], basis[k + 1]
                out += K[j, k] * (sk @ rho @ sj - 0.5 * (sj @ sk @ rho + rho @ sj @ sk))
        return out

    residual = block - bloch_matrix_of(gksl, params)
    lamb = 0.5 * (residual[1:, 1:] - residual[1:, 1:].T)
    rest = residual.copy()
    rest[1:, 1:] -= lamb
    scale = max(1.0, float(np.max(np.abs(block))))
    if np.max(np.abs(rest)) > tol * scale:
        raise MalformedGeneratorError(
            f"GKSL decomposition residual {np.max(np.abs(rest)):.3e} exceeds tolerance")
    # -i[H, rho] with H = (1/2) h.sh gives r' = h x r, i.e. lamb[k, j] = eps_ijk h_i
    h = np.array([lamb[2, 1], lamb[0, 2], lamb[1, 0]])
    eig = np.linalg.eigvalsh(K)
    return KossakowskiData(K, eig, h)


def bloch_channel(g: BlochGenerator, t: float) -> np.ndarray:
    return linalg.expm(-2.0 * t * g.matrix)


def choi_matrix(g: BlochGenerator, t: float) -> np.ndarray:
    """(Lambda_t (x) id) applied to the maximally entangled two-qubit state."""
    channel = bloch_channel(g, t)
    params = g.params
    choi = np.zeros((4, 4), dtype=complex)
    for a in range(2):
        for b in range(2):
            E = np.zeros((2, 2), dtype=complex)
            E[a, b] = 1.0
            choi += np.kron(operator_action(channel, E, params), E)
    return 0.5 * choi


def choi_minimum_eigenvalue(g: BlochGenerator, t: float) -> float:
    if t < 0:
        raise ValueError("t must be non-negative")
    return float(np.linalg.eigvalsh(choi_matrix(g, t))[0])
