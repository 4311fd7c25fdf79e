"""Continuous-limit master equation of the qubit machine.

In the limit of vanishing collision time the qubit obeys

    drho/dt = -i [B sigma_z + G, rho]
              + gamma (n1 + n2 + 2) L[sigma_minus, rho]
              + gamma (n1 + n2)     L[sigma_plus,  rho],

with L[S, rho] = 2 S rho S^dag - {S^dag S, rho} and the coherence-induced
Hamiltonian correction

    G = sqrt(2 gamma) * sum_i eps_i sqrt(2 n_i + 1) (cos(phi_i) sigma_x + sin(phi_i) sigma_y).

This is dissipation into a single effective bath with mean occupation
n = (n1 + n2)/2 and decay rate gamma_eff = 2 gamma, driven by an effective
coherence eps_eff e^{i phi} that lumps both reservoirs together. The steady
state is known in closed form and is cross-checked here against a null-space
solve of the vectorized generator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .linalg import SIGMA_MINUS, SIGMA_PLUS, SIGMA_X, SIGMA_Y, SIGMA_Z, hermitize
from .model import MachineParams, thermal_occupation

KERNEL_GAP_MIN = 1e-8
TRACE_DRIFT_MAX = 1e-6


@dataclass(frozen=True)
class EffectiveCoherence:
    """Polar form of the lumped two-bath coherence driving the qubit."""

    eps_eff: float
    phi: float
    gamma_eff: float
    n_avg: float


@dataclass(frozen=True)
class SteadyState:
    rho: np.ndarray
    method: str  # "analytic" or "numeric"


def effective_coherence(params: MachineParams) -> EffectiveCoherence:
    """eps_eff e^{i phi} = [eps1 e^{i phi1} sqrt(1+2n1) + eps2 e^{i phi2} sqrt(1+2n2)] / (sqrt(2) sqrt(1+2n))."""
    n1 = thermal_occupation(params.bath1)
    n2 = thermal_occupation(params.bath2)
    n = 0.5 * (n1 + n2)
    z = (
        params.bath1.epsilon * np.exp(1j * params.bath1.phi) * math.sqrt(1.0 + 2.0 * n1)
        + params.bath2.epsilon * np.exp(1j * params.bath2.phi) * math.sqrt(1.0 + 2.0 * n2)
    ) / (math.sqrt(2.0) * math.sqrt(1.0 + 2.0 * n))
    eps_eff = abs(z)
    phi = float(np.angle(z)) % (2.0 * math.pi) if eps_eff > 0.0 else 0.0
    return EffectiveCoherence(eps_eff=eps_eff, phi=phi, gamma_eff=2.0 * params.gamma, n_avg=n)


def hamiltonian_correction(params: MachineParams) -> np.ndarray:
    """Traceless Hermitian correction G added to the system Hamiltonian by the bath coherences."""
    out = np.zeros((2, 2), dtype=complex)
    for bath in params.baths:
        n = thermal_occupation(bath)
        amp = math.sqrt(2.0 * params.gamma) * bath.epsilon * math.sqrt(2.0 * n + 1.0)
        out += amp * (math.cos(bath.phi) * SIGMA_X + math.sin(bath.phi) * SIGMA_Y)
    return out


def _lindblad_term(op: np.ndarray, rho: np.ndarray) -> np.ndarray:
    opd = op.conj().T
    return 2.0 * op @ rho @ opd - opd @ op @ rho - rho @ opd @ op


def generator_apply(params: MachineParams, rho: np.ndarray) -> np.ndarray:
    """Right-hand side of the master equation evaluated at rho."""
    rho = np.asarray(rho, dtype=complex)
    n1 = thermal_occupation(params.bath1)
    n2 = thermal_occupation(params.bath2)
    h = params.B * SIGMA_Z + hamiltonian_correction(params)
    out = -1j * (h @ rho - rho @ h)
    out += params.gamma * (n1 + n2 + 2.0) * _lindblad_term(SIGMA_MINUS, rho)
    out += params.gamma * (n1 + n2) * _lindblad_term(SIGMA_PLUS, rho)
    return out


def generator_matrix(params: MachineParams) -> np.ndarray:
    """4x4 matrix of the generator acting on row-major vectorized 2x2 matrices."""
    mat = np.zeros((4, 4), dtype=complex)
    for k in range(4):
        basis = np.zeros(4, dtype=complex)
        basis[k] = 1.0
        mat[:, k] = generator_apply(params, basis.reshape(2, 2)).reshape(4)
    return mat


def steady_state_analytic(params: MachineParams) -> SteadyState:
    """Closed-form steady state in terms of the effective coherence.

    With n = (n1+n2)/2, g_e = gamma_eff = 2 gamma and R the normalization,
        rho_ee  = [4 B^2 n + g_e (1+2n)^2 (2 eps_eff^2 + n g_e)] / R
        rho_ge  = i eps_eff e^{i phi} sqrt(2 g_e (2n+1)) (2iB + (2n+1) g_e) / R
        R       = (2n+1) [4 B^2 + g_e (2n+1) (4 eps_eff^2 + (2n+1) g_e)].
    """
    eff = effective_coherence(params)
    n = eff.n_avg
    ge = eff.gamma_eff
    e2 = eff.eps_eff**2
    r = (2.0 * n + 1.0) * (4.0 * params.B**2 + ge * (2.0 * n + 1.0) * (4.0 * e2 + (2.0 * n + 1.0) * ge))
    rho_ee = (4.0 * params.B**2 * n + ge * (1.0 + 2.0 * n) ** 2 * (2.0 * e2 + n * ge)) / r
    rho_ge = (
        1j * eff.eps_eff * np.exp(1j * eff.phi) * math.sqrt(2.0 * ge * (2.0 * n + 1.0))
        * (2j * params.B + (2.0 * n + 1.0) * ge) / r
    )
    rho = np.array([[rho_ee, np.conj(rho_ge)], [rho_ge, 1.0 - rho_ee]], dtype=complex)
    return SteadyState(rho=rho, method="analytic")


def steady_state_numeric(params: MachineParams) -> SteadyState:
    """Steady state from the null vector of the vectorized generator.

    The kernel must be one-dimensional: the second-smallest singular value has
    to clear KERNEL_GAP_MIN, otherwise the parameters are flagged as degenerate.
    """
    mat = generator_matrix(params)
    _, s, vh = np.linalg.svd(mat)
    if s[-2] < KERNEL_GAP_MIN:
        raise NumericalError(
            f"degenerate generator kernel: singular values {s[-1]:.3e}, {s[-2]:.3e}"
        )
    rho = vh.conj().T[:, -1].reshape(2, 2)
    rho = rho / np.trace(rho)
    return SteadyState(rho=hermitize(rho), method="numeric")


def integrate(params: MachineParams, rho0: np.ndarray, t_final: float, dt: float | None = None) -> np.ndarray:
    """Fixed-step RK4 integration of the master equation up to t_final.

    The step must satisfy dt <= 0.01/gamma_eff; trace drift beyond
    TRACE_DRIFT_MAX aborts the run.
    """
    if t_final < 0:
        raise ValueError(f"t_final must be >= 0, got {t_final}")
    rho = np.asarray(rho0, dtype=complex).copy()
    if t_final == 0.0:
        return rho
    dt_max = 0.01 / (2.0 * params.gamma)
    if dt is None:
        dt = dt_max
    if dt > dt_max * (1.0 + 1e-12):
        raise ValueError(f"dt = {dt:g} exceeds the stability bound 0.01/gamma_eff = {dt_max:g}")
    n_steps = max(1, int(math.ceil(t_final / dt)))
    h = t_final / n_steps
    for _ in range(n_steps):
        k1 = generator_apply(params, rho)
        k2 = generator_apply(params, rho + 0.5 * h * k1)
        k3 = generator_apply(params, rho + 0.5 * h * k2)
        k4 = generator_apply(params, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        drift = abs(np.trace(rho) - 1.0)
        if drift > TRACE_DRIFT_MAX:
            raise NumericalError(f"trace drift {drift:.3e} exceeds {TRACE_DRIFT_MAX:g}; reduce dt")
    return rho
