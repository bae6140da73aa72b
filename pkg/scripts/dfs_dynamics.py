#!/usr/bin/env python3
"""
DFS Entanglement Generation
Second-order effective Hamiltonian inside the decoherence-free subspace {|10>, |01>}
and the resulting swap dynamics that produce (|10> + i|01>) / sqrt 2.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np

from bath_kernels import coth_half
from chain_model import ModeSpectrum
from config_constants import DELTA_LAMBDA_WARNING, RESONANCE_TOL
from dephasing import QubitPairState, basis_ket
from sim_errors import PhysicsValidityWarning

# Positions of |11>, |10>, |01>, |00> in the two-qubit basis
DFS_INDICES = (1, 2)
INTERMEDIATE_INDICES = (0, 3)


def _is_resonant(lambda_: float, omega_0: float) -> bool:
    scale = max(omega_0 ** 2, 4.0 * lambda_ ** 2, np.finfo(float).tiny)
    return abs(omega_0 ** 2 - 4.0 * lambda_ ** 2) <= RESONANCE_TOL * scale


def kappa(lambda_: float, delta: float, omega_0: float) -> float:
    """kappa = lambda Delta^2 / [2 (omega_0^2 - 4 lambda^2)]"""
    if _is_resonant(lambda_, omega_0):
        raise ValueError(
            f"kappa diverges at resonance omega_0 = +/-2 lambda "
            f"(omega_0={omega_0}, lambda={lambda_})"
        )
    return lambda_ * delta ** 2 / (2.0 * (omega_0 ** 2 - 4.0 * lambda_ ** 2))


@dataclass(frozen=True)
class DfsParams:
    """Laser drive and induced coupling of the qubit pair"""
    delta: float
    omega_0: float
    lambda_: float
    kappa: float = field(init=False)

    def __post_init__(self):
        for name in ('delta', 'omega_0', 'lambda_'):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        object.__setattr__(self, 'kappa', kappa(self.lambda_, self.delta, self.omega_0))
        ratio = abs(self.delta / self.lambda_) if self.lambda_ != 0 else float('inf')
        if self.delta != 0 and ratio > DELTA_LAMBDA_WARNING:
            warnings.warn(
                f"Delta / lambda = {ratio:.3g} exceeds {DELTA_LAMBDA_WARNING}; "
                "the second-order DFS theory needs Delta << lambda",
                PhysicsValidityWarning,
                stacklevel=3,
            )


def dfs_evolve(t: float, params: DfsParams) -> np.ndarray:
    """e^{2i kappa t} [cos(2 kappa t)|10> + i sin(2 kappa t)|01>] starting from |10>"""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    angle = 2.0 * params.kappa * t
    return np.exp(1j * angle) * (np.cos(angle) * basis_ket('10') + 1j * np.sin(angle) * basis_ket('01'))


def entangling_time(params: DfsParams) -> float:
    """t* = pi / (8 |kappa|)"""
    if params.kappa == 0:
        raise ValueError("entangling time is undefined for kappa = 0")
    return float(np.pi / (8.0 * abs(params.kappa)))


def effective_hamiltonian_matrix(params: DfsParams) -> np.ndarray:
    """
    Second-order effective Hamiltonian on {|10>, |01>}.

    Built from (H_eff)_mn = sum_l V_ml V_ln [1/(E_m - E_l) + 1/(E_n - E_l)] / 2 over the
    intermediate states |11>, |00>, with polaron-frame energies
    E_11 = omega_0 - lambda, E_00 = -omega_0 - lambda, E_10 = E_01 = lambda and
    V = (Delta / 2)(sigma_x^1 + sigma_x^2). Equals -2 kappa (I + sigma_x).
    """
    w0, lam, half = params.omega_0, params.lambda_, params.delta / 2.0
    energies = np.array([w0 - lam, lam, lam, -w0 - lam])
    sigma_x = np.array([[0, 1], [1, 0]], dtype=complex)
    identity = np.eye(2, dtype=complex)
    coupling = half * (np.kron(sigma_x, identity) + np.kron(identity, sigma_x))

    h_eff = np.zeros((2, 2), dtype=complex)
    for a, m in enumerate(DFS_INDICES):
        for b, n in enumerate(DFS_INDICES):
            for l in INTERMEDIATE_INDICES:
                h_eff[a, b] += coupling[m, l] * coupling[l, n] * 0.5 * (
                    1.0 / (energies[m] - energies[l]) + 1.0 / (energies[n] - energies[l])
                )
    return h_eff


def dressing_overlap(spectrum: ModeSpectrum, temperature: float) -> float:
    """Thermal <B_1^dagger B_2> = exp(-sum |g^1 - g^2|^2 / (8 w^2) coth(w / 2T))"""
    diff = np.abs(spectrum.couplings[:, 0] - spectrum.couplings[:, 1]) ** 2
    w = spectrum.frequencies
    return float(np.exp(-np.sum(diff / (8.0 * w ** 2) * coth_half(w, temperature))))


def dfs_state_with_dephasing(t: float, params: DfsParams, gamma_minus: float) -> QubitPairState:
    """Generated state with its |10><01| coherence damped by exp(-2 Gamma_-)"""
    if gamma_minus < 0:
        raise ValueError(f"gamma_minus must be >= 0, got {gamma_minus}")
    psi = dfs_evolve(t, params)
    rho = np.outer(psi, psi.conj())
    damping = np.exp(-2.0 * gamma_minus)
    rho[1, 2] *= damping
    rho[2, 1] *= damping
    return QubitPairState(rho)
