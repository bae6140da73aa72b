#!/usr/bin/env python3
"""
Coulomb Chain Model
Axial phonon spectrum of a linear ion chain and the spin-phonon couplings of the
two qubit ions, from the closed-form dispersion and from the exact trap + Coulomb
Hessian. Natural units: hbar = 1.
"""
import sys
from dataclasses import dataclass, field
from typing import List, Tuple

import numpy as np
from scipy import linalg

from config_constants import (
    EQUILIBRIUM_FORCE_TOL,
    EQUILIBRIUM_MAX_ITER,
    EQUILIBRIUM_SPACING_PREFACTOR,
    EQUILIBRIUM_SPACING_EXPONENT,
)
from sim_errors import NumericalError

WAVENUMBER_CONVENTIONS = ('traveling', 'standing')


@dataclass(frozen=True)
class ChainConfig:
    """Physical parameters of an equally spaced ion chain"""
    n_ions: int
    omega_z: float = 1.0
    ion_spacing_a: float = 1.0
    ion_mass_m: float = 1.0
    charge_e: float = 1.0
    laser_wavenumber_ktilde: float = 0.1
    qubit_positions: Tuple[int, int] = (0, 1)
    wavenumber_convention: str = 'traveling'
    allow_coincident_qubits: bool = False

    def __post_init__(self):
        if not isinstance(self.n_ions, (int, np.integer)) or isinstance(self.n_ions, bool):
            raise ValueError(f"n_ions must be an integer, got {self.n_ions!r}")
        if self.n_ions < 2:
            raise ValueError(f"n_ions must be >= 2, got {self.n_ions}")
        for name in ('omega_z', 'ion_spacing_a', 'ion_mass_m', 'charge_e'):
            value = getattr(self, name)
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {value}")
        if not np.isfinite(self.laser_wavenumber_ktilde):
            raise ValueError("laser_wavenumber_ktilde must be finite")
        if self.wavenumber_convention not in WAVENUMBER_CONVENTIONS:
            raise ValueError(
                f"wavenumber_convention must be one of {WAVENUMBER_CONVENTIONS}, "
                f"got {self.wavenumber_convention!r}"
            )
        positions = tuple(int(p) for p in self.qubit_positions)
        if len(positions) != 2:
            raise ValueError(f"qubit_positions must be a pair, got {self.qubit_positions!r}")
        for site in positions:
            if not 0 <= site < self.n_ions:
                raise ValueError(f"qubit site {site} outside [0, {self.n_ions})")
        if positions[0] == positions[1] and not self.allow_coincident_qubits:
            raise ValueError("qubit sites must be distinct")
        object.__setattr__(self, 'qubit_positions', positions)

    @property
    def chain_length(self) -> float:
        """L = N a"""
        return self.n_ions * self.ion_spacing_a

    @property
    def separation(self) -> float:
        """r = |z'_1 - z'_2|"""
        return abs(self.qubit_positions[0] - self.qubit_positions[1]) * self.ion_spacing_a

    def site_position(self, j: int) -> float:
        """z'_j for qubit j in {0, 1}"""
        return self.qubit_positions[j] * self.ion_spacing_a

    @property
    def stiffness_nu(self) -> float:
        """nu = (3 e^2 / m omega_z^2 a^3)^(1/2)"""
        return float(np.sqrt(3.0 * self.charge_e ** 2
                             / (self.ion_mass_m * self.omega_z ** 2 * self.ion_spacing_a ** 3)))


@dataclass(frozen=True)
class Mode:
    index: int
    frequency: float
    wavenumber: float
    zero_point_length: float
    g1: complex
    g2: complex


@dataclass(frozen=True)
class ModeSpectrum:
    """Discrete axial modes and their couplings to the two qubits"""
    modes: Tuple[Mode, ...]
    separation: float = 0.0
    frequencies: np.ndarray = field(init=False, repr=False, compare=False)
    wavenumbers: np.ndarray = field(init=False, repr=False, compare=False)
    couplings: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("ModeSpectrum needs at least one mode")
        freqs = np.array([m.frequency for m in modes], dtype=float)
        if np.any(freqs <= 0):
            raise ValueError("mode frequencies must be positive")
        if np.any(np.diff(freqs) <= 0):
            raise ValueError("mode frequencies must be strictly increasing")
        couplings = np.array([[m.g1, m.g2] for m in modes], dtype=complex)
        mags = np.abs(couplings)
        if not np.allclose(mags[:, 0], mags[:, 1], rtol=1e-12, atol=0.0):
            raise ValueError("|g_n^1| and |g_n^2| must agree for every mode")
        object.__setattr__(self, 'modes', modes)
        object.__setattr__(self, 'frequencies', freqs)
        object.__setattr__(self, 'wavenumbers', np.array([m.wavenumber for m in modes], dtype=float))
        object.__setattr__(self, 'couplings', couplings)

    def __len__(self) -> int:
        return len(self.modes)

    def truncated(self, n_modes: int) -> 'ModeSpectrum':
        """Lowest n_modes modes"""
        if not 1 <= n_modes <= len(self.modes):
            raise ValueError(f"n_modes must be in [1, {len(self.modes)}], got {n_modes}")
        return ModeSpectrum(self.modes[:n_modes], separation=self.separation)


def mode_frequency(n: int, omega_z: float) -> float:
    """omega_n = omega_z sqrt(n (n + 1) / 2), n >= 1"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise ValueError(f"mode index must be an integer, got {n!r}")
    if n < 1:
        raise ValueError(f"mode index must be >= 1 (no zero-frequency mode), got {n}")
    return float(omega_z * np.sqrt(n * (n + 1) / 2.0))


def mode_wavenumber(n: int, cfg: ChainConfig) -> float:
    """k_n = 2 pi n / L (traveling) or pi n / L (standing)"""
    factor = 2.0 * np.pi if cfg.wavenumber_convention == 'traveling' else np.pi
    return factor * n / cfg.chain_length


def build_spectrum(cfg: ChainConfig, n_modes: int = None) -> ModeSpectrum:
    """
    Build the closed-form axial spectrum with couplings g_n^j = i k~ z~_n omega_n e^{i k_n z'_j}.

    Args:
        cfg: Chain configuration
        n_modes: Number of modes (defaults to n_ions - 1)

    Returns:
        ModeSpectrum for modes n = 1..n_modes
    """
    if n_modes is None:
        n_modes = cfg.n_ions - 1
    if not 1 <= n_modes <= cfg.n_ions - 1:
        raise ValueError(f"n_modes must be in [1, {cfg.n_ions - 1}], got {n_modes}")

    z1, z2 = cfg.site_position(0), cfg.site_position(1)
    modes = []
    for n in range(1, n_modes + 1):
        omega = mode_frequency(n, cfg.omega_z)
        k = mode_wavenumber(n, cfg)
        z_tilde = 1.0 / np.sqrt(2.0 * cfg.ion_mass_m * omega)
        amplitude = 1j * cfg.laser_wavenumber_ktilde * z_tilde * omega
        modes.append(Mode(
            index=n,
            frequency=omega,
            wavenumber=k,
            zero_point_length=float(z_tilde),
            g1=complex(amplitude * np.exp(1j * k * z1)),
            g2=complex(amplitude * np.exp(1j * k * z2)),
        ))
    return ModeSpectrum(tuple(modes), separation=cfg.separation)


def _force_and_hessian(u: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    # Dimensionless potential: sum u_i^2 / 2 + sum_{i<j} 1 / |u_i - u_j|
    diff = u[:, None] - u[None, :]
    np.fill_diagonal(diff, 1.0)
    inv2 = np.sign(diff) / diff ** 2
    inv3 = 1.0 / np.abs(diff) ** 3
    np.fill_diagonal(inv2, 0.0)
    np.fill_diagonal(inv3, 0.0)
    force = u - inv2.sum(axis=1)
    hessian = -2.0 * inv3
    np.fill_diagonal(hessian, 1.0 + 2.0 * inv3.sum(axis=1))
    return force, hessian


def equilibrium_positions(n_ions: int) -> np.ndarray:
    """
    Axial equilibrium positions in units of (e^2 / m omega_z^2)^(1/3).

    Damped Newton iteration on the net force from a uniformly spaced guess;
    positions stay strictly ordered at every accepted step.
    """
    if n_ions < 2:
        raise ValueError(f"n_ions must be >= 2, got {n_ions}")
    spacing = EQUILIBRIUM_SPACING_PREFACTOR * n_ions ** EQUILIBRIUM_SPACING_EXPONENT
    u = (np.arange(n_ions) - (n_ions - 1) / 2.0) * spacing

    force, hessian = _force_and_hessian(u)
    residual = np.max(np.abs(force))
    for _ in range(EQUILIBRIUM_MAX_ITER):
        if residual < EQUILIBRIUM_FORCE_TOL:
            return u
        step = linalg.solve(hessian, force, assume_a='sym')
        alpha = 1.0
        while alpha > 1e-8:
            trial = u - alpha * step
            if np.all(np.diff(trial) > 0):
                trial_force, trial_hessian = _force_and_hessian(trial)
                trial_residual = np.max(np.abs(trial_force))
                if trial_residual < residual or trial_residual < EQUILIBRIUM_FORCE_TOL:
                    break
            alpha *= 0.5
        else:
            break
        u, force, hessian, residual = trial, trial_force, trial_hessian, trial_residual

    if residual < EQUILIBRIUM_FORCE_TOL:
        return u
    raise NumericalError(
        'exact_axial_modes',
        'equilibrium solve did not converge',
        {'residual_norm': float(residual), 'n_ions': n_ions},
    )


def exact_axial_modes(cfg: ChainConfig) -> List[float]:
    """Axial normal-mode frequencies from the exact trap + Coulomb Hessian, ascending"""
    u = equilibrium_positions(cfg.n_ions)
    _, hessian = _force_and_hessian(u)
    eigenvalues = linalg.eigvalsh(hessian)
    if eigenvalues[0] <= 0:
        raise NumericalError('exact_axial_modes', 'Hessian is not positive definite',
                             {'min_eigenvalue': float(eigenvalues[0])})
    return [float(cfg.omega_z * np.sqrt(ev)) for ev in eigenvalues]


def coupling_lambda(spectrum: ModeSpectrum, r: float) -> float:
    """lambda = sum_n |g_n|^2 cos(k_n r) / omega_n"""
    weights = np.abs(spectrum.couplings[:, 0]) ** 2 / spectrum.frequencies
    return float(np.sum(weights * np.cos(spectrum.wavenumbers * r)))


def polaron_coupling(spectrum: ModeSpectrum, r: float) -> float:
    """
    Ising shift of the sigma_z/2-coupled Hamiltonian after the polaron transformation.

    The transformed Hamiltonian carries -J sigma_z^1 sigma_z^2 with J = lambda / 2;
    this is the induced coupling the exact simulator actually realizes.
    """
    return 0.5 * coupling_lambda(spectrum, r)


def displacement_amplitudes(spectrum: ModeSpectrum) -> np.ndarray:
    """|g_n / omega_n| per mode"""
    return np.abs(spectrum.couplings[:, 0]) / spectrum.frequencies


def describe_spectrum(spectrum: ModeSpectrum) -> None:
    print(f"🎼 {len(spectrum)} modes, omega in [{spectrum.frequencies[0]:.4g}, "
          f"{spectrum.frequencies[-1]:.4g}], r = {spectrum.separation:.4g}", file=sys.stderr)
