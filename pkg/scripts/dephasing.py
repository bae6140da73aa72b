#!/usr/bin/env python3
"""
Pure-Dephasing Dynamics
Exact Delta = 0 reduced dynamics of the qubit pair: populations are frozen and each
coherence is multiplied by its kernel factor. Basis order is |11>, |10>, |01>, |00>.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import pandas as pd
from scipy import linalg

from bath_kernels import DecoherenceKernels
from config_constants import HERMITICITY_TOL, TRACE_TOL, POSITIVITY_TOL

BASIS_LABELS = ('11', '10', '01', '00')


def basis_ket(label: str) -> np.ndarray:
    """Computational basis ket, e.g. basis_ket('10')"""
    if label not in BASIS_LABELS:
        raise ValueError(f"Unknown basis label {label!r}; expected one of {BASIS_LABELS}")
    ket = np.zeros(4, dtype=complex)
    ket[BASIS_LABELS.index(label)] = 1.0
    return ket


@dataclass(frozen=True, eq=False)
class QubitPairState:
    """Validated 4x4 two-qubit density matrix"""
    rho: np.ndarray
    trace_tol: float = TRACE_TOL

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError(f"rho must be 4x4, got shape {rho.shape}")
        if np.max(np.abs(rho - rho.conj().T)) > HERMITICITY_TOL:
            raise ValueError("rho is not Hermitian")
        trace = np.trace(rho).real
        if abs(trace - 1.0) > self.trace_tol:
            raise ValueError(f"rho has trace {trace!r}, expected 1")
        min_eig = linalg.eigvalsh(rho)[0]
        if min_eig < -POSITIVITY_TOL:
            raise ValueError(f"rho is not positive semidefinite (min eigenvalue {min_eig:.3e})")
        rho.setflags(write=False)
        object.__setattr__(self, 'rho', rho)

    @classmethod
    def from_ket(cls, ket) -> 'QubitPairState':
        psi = np.asarray(ket, dtype=complex).reshape(4)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise ValueError("ket must be non-zero")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @property
    def populations(self) -> np.ndarray:
        return np.diag(self.rho).real.copy()

    def element(self, a: str, b: str) -> complex:
        """<a|rho|b> by basis label"""
        return complex(self.rho[BASIS_LABELS.index(a), BASIS_LABELS.index(b)])


def dfs_state(relative_phase: float = 0.0) -> QubitPairState:
    """(|10> + e^{i theta} |01>) / sqrt 2"""
    return QubitPairState.from_ket(basis_ket('10') + np.exp(1j * relative_phase) * basis_ket('01'))


def enhanced_state() -> QubitPairState:
    """(|11> + |00>) / sqrt 2"""
    return QubitPairState.from_ket(basis_ket('11') + basis_ket('00'))


def dephasing_factors(gamma: float, gamma_plus: float, gamma_minus: float,
                      phi_plus: float, phi_minus: float) -> np.ndarray:
    """Hadamard factor matrix of the Delta = 0 channel at one time"""
    factors = np.ones((4, 4), dtype=complex)
    minus = np.exp(-1j * phi_minus - gamma)
    plus = np.exp(-1j * phi_plus - gamma)
    # rho_{11,10}, rho_{11,01} rotate with phi_-; rho_{10,00}, rho_{01,00} with phi_+
    factors[0, 1] = factors[0, 2] = minus
    factors[1, 3] = factors[2, 3] = plus
    factors[1, 2] = np.exp(-2.0 * gamma_minus)
    # phi_+ + phi_- = 2 omega_0 t
    factors[0, 3] = np.exp(-1j * (phi_plus + phi_minus) - 2.0 * gamma_plus)
    upper = np.triu_indices(4, k=1)
    factors[(upper[1], upper[0])] = factors[upper].conj()
    return factors


def _check_detuning(kernels: DecoherenceKernels, omega_0: float) -> None:
    if not np.isclose(omega_0, kernels.omega_0, rtol=1e-12, atol=1e-15):
        raise ValueError(f"omega_0 = {omega_0} does not match the kernel table "
                         f"(built with omega_0 = {kernels.omega_0})")


def dephase_map(rho0: QubitPairState, t: float, kernels: DecoherenceKernels,
                omega_0: float) -> QubitPairState:
    """
    Reduced state at grid time t.

    The phases come from the kernel table, so omega_0 has to be the detuning
    the table was built with.
    """
    _check_detuning(kernels, omega_0)
    k = kernels.at(t)
    factors = dephasing_factors(k['gamma'], k['gamma_plus'], k['gamma_minus'],
                                k['phi_plus'], k['phi_minus'])
    return QubitPairState(rho0.rho * factors)


def coherence_ratio(rho0: QubitPairState, t: float,
                    kernels: DecoherenceKernels) -> Tuple[Optional[float], Optional[float]]:
    """
    (|rho_23(t)| / |rho_23(0)|, |rho_14(t)| / |rho_14(0)|).

    A ratio whose initial coherence is zero is undefined and returned as None.
    """
    k = kernels.at(t)
    dfs = None
    if abs(rho0.rho[1, 2]) > 0:
        dfs = float(np.exp(-2.0 * k['gamma_minus']))
    enhanced = None
    if abs(rho0.rho[0, 3]) > 0:
        enhanced = float(np.exp(-2.0 * k['gamma_plus']))
    return dfs, enhanced


def dephase_trajectory(rho0: QubitPairState, kernels: DecoherenceKernels,
                       omega_0: float) -> pd.DataFrame:
    """Coherence magnitudes and populations over the whole kernel grid"""
    rows = []
    for t in kernels.time_grid:
        rho = dephase_map(rho0, t, kernels, omega_0).rho
        rows.append({
            't': t,
            'p11': rho[0, 0].real,
            'p10': rho[1, 1].real,
            'p01': rho[2, 2].real,
            'p00': rho[3, 3].real,
            'rho12_abs': abs(rho[0, 1]),
            'rho23_abs': abs(rho[1, 2]),
            'rho14_abs': abs(rho[0, 3]),
            'rho23_re': rho[1, 2].real,
            'rho23_im': rho[1, 2].imag,
        })
    return pd.DataFrame(rows)
