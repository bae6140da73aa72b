#!/usr/bin/env python3
"""
Bath Kernels
Decoherence exponents Gamma(t), Gamma_+(t), Gamma_-(t) and phases phi_+(t), phi_-(t)
for the Ohmic phonon bath J(w) = eta w exp(-w / w_c), evaluated either as continuum
integrals (adaptive quadrature) or as exact sums over a discrete ModeSpectrum.
"""
import sys
import warnings
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import integrate, optimize, special

from chain_model import ChainConfig, ModeSpectrum, coupling_lambda
from config_constants import (
    QUAD_TOL,
    QUAD_LIMIT,
    QUAD_MAXP1,
    CUTOFF_MULTIPLE,
    OSCILLATION_SPLIT,
    COTH_SERIES_THRESHOLD,
    CUTOFF_RATIO_WARNING,
    GRID_MATCH_TOL,
    LIFETIME_WINDOW,
    LIFETIME_GRID_POINTS,
    LIFETIME_XTOL,
    LIFETIME_HORIZON_MULTIPLE,
    LIFETIME_POINTS_PER_DECADE,
)
from sim_errors import NumericalError, PhysicsValidityWarning

KERNEL_METHODS = ('continuum', 'mode_sum')
KERNEL_COLUMNS = ['t', 'gamma', 'gamma_plus', 'gamma_minus', 'phi_plus', 'phi_minus']


@dataclass(frozen=True)
class BathParams:
    """Continuum Ohmic bath in natural units (hbar = k_B = 1)"""
    eta: float
    omega_c: float
    temperature: float = 0.0
    nu: Optional[float] = None
    dispersion_velocity: Optional[float] = None

    def __post_init__(self):
        if not np.isfinite(self.eta) or self.eta <= 0:
            raise ValueError(f"eta must be > 0, got {self.eta}")
        if not np.isfinite(self.omega_c) or self.omega_c <= 0:
            raise ValueError(f"omega_c must be > 0, got {self.omega_c}")
        if not np.isfinite(self.temperature) or self.temperature < 0:
            raise ValueError(f"temperature must be >= 0, got {self.temperature}")
        if self.nu is not None and self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.dispersion_velocity is not None and self.dispersion_velocity <= 0:
            raise ValueError(f"dispersion_velocity must be > 0, got {self.dispersion_velocity}")
        self.check_regime()

    def check_regime(self, delta: float = 0.0) -> bool:
        """Warn unless omega_c >> temperature and omega_c >> |delta|"""
        scale = max(self.temperature, abs(delta))
        if self.omega_c < CUTOFF_RATIO_WARNING * scale:
            warnings.warn(
                f"omega_c = {self.omega_c:g} is not much greater than "
                f"max(T, |Delta|) = {scale:g}",
                PhysicsValidityWarning,
                stacklevel=3,
            )
            return False
        return True

    @classmethod
    def from_chain(cls, cfg: ChainConfig, temperature: float, omega_c: float,
                   dispersion_velocity: Optional[float] = None) -> 'BathParams':
        """eta = k~^2 / (2 m omega_z nu) with nu = (3 e^2 / m omega_z^2 a^3)^(1/2)"""
        nu = cfg.stiffness_nu
        eta = cfg.laser_wavenumber_ktilde ** 2 / (2.0 * cfg.ion_mass_m * cfg.omega_z * nu)
        if dispersion_velocity is None:
            dispersion_velocity = default_dispersion_velocity(cfg)
        return cls(eta=float(eta), omega_c=omega_c, temperature=temperature, nu=nu,
                   dispersion_velocity=dispersion_velocity)


@dataclass(frozen=True, eq=False)
class DecoherenceKernels:
    """Kernel table on an ascending time grid"""
    time_grid: np.ndarray
    gamma: np.ndarray
    gamma_plus: np.ndarray
    gamma_minus: np.ndarray
    phi_plus: np.ndarray
    phi_minus: np.ndarray
    method: str
    omega_0: float = 0.0

    def __post_init__(self):
        if self.method not in KERNEL_METHODS:
            raise ValueError(f"method must be one of {KERNEL_METHODS}, got {self.method!r}")
        grid = np.asarray(self.time_grid, dtype=float)
        if grid.ndim != 1 or grid.size < 1:
            raise ValueError("time_grid must be a non-empty 1D sequence")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("time_grid must be strictly increasing")
        object.__setattr__(self, 'time_grid', grid)
        for name in ('gamma', 'gamma_plus', 'gamma_minus', 'phi_plus', 'phi_minus'):
            values = np.asarray(getattr(self, name), dtype=float)
            if values.shape != grid.shape:
                raise ValueError(f"{name} has shape {values.shape}, expected {grid.shape}")
            if name.startswith('gamma'):
                if np.any(values < -QUAD_TOL):
                    raise ValueError(f"{name} must be non-negative")
                values = np.maximum(values, 0.0)
            object.__setattr__(self, name, values)

    def index_of(self, t: float) -> int:
        """Grid index of t; times off the grid are rejected"""
        grid = self.time_grid
        i = int(np.argmin(np.abs(grid - t)))
        if abs(grid[i] - t) > GRID_MATCH_TOL * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not a kernel grid point "
                             f"(grid spans [{grid[0]}, {grid[-1]}])")
        return i

    def at(self, t: float) -> Dict[str, float]:
        i = self.index_of(t)
        return {name: float(getattr(self, name)[i]) for name in KERNEL_COLUMNS[1:]}

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            't': self.time_grid,
            'gamma': self.gamma,
            'gamma_plus': self.gamma_plus,
            'gamma_minus': self.gamma_minus,
            'phi_plus': self.phi_plus,
            'phi_minus': self.phi_minus,
        }, columns=KERNEL_COLUMNS)


@dataclass(frozen=True)
class LifetimeResult:
    tau: float
    estimate: float
    decays: bool
    plateau: float = float('nan')


# ============================================================================
# Spectral density and thermal factors
# ============================================================================

def spectral_density(omega, bath: BathParams):
    """J(w) = eta w exp(-w / w_c)"""
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("spectral density is defined for omega >= 0")
    result = bath.eta * w * np.exp(-w / bath.omega_c)
    return float(result) if result.ndim == 0 else result


def coth_half(omega, temperature: float):
    """coth(w / 2T); identically 1 at T = 0"""
    w = np.asarray(omega, dtype=float)
    if temperature == 0:
        result = np.ones_like(w)
    else:
        x = w / (2.0 * temperature)
        with np.errstate(divide='ignore', invalid='ignore'):
            series = 2.0 * temperature / w + w / (6.0 * temperature)
            exact = 1.0 / np.tanh(x)
        result = np.where(x < COTH_SERIES_THRESHOLD, series, exact)
    return float(result) if result.ndim == 0 else result


def omega_coth(omega, temperature: float):
    """w coth(w / 2T), finite at w = 0"""
    w = np.asarray(omega, dtype=float)
    if temperature == 0:
        result = w.copy()
    else:
        x = w / (2.0 * temperature)
        with np.errstate(divide='ignore', invalid='ignore'):
            exact = w / np.tanh(x)
        result = np.where(x < COTH_SERIES_THRESHOLD,
                          2.0 * temperature + w ** 2 / (6.0 * temperature), exact)
    return float(result) if result.ndim == 0 else result


def thermal_occupation(omega, temperature: float):
    """Bose occupation 1 / (exp(w / T) - 1); zero at T = 0"""
    w = np.asarray(omega, dtype=float)
    if temperature == 0:
        result = np.zeros_like(w)
    else:
        result = 1.0 / np.expm1(w / temperature)
    return float(result) if result.ndim == 0 else result


def default_dispersion_velocity(cfg: ChainConfig) -> float:
    """v = omega_z L / (2 pi sqrt 2), the large-n slope of omega_n against k_n = 2 pi n / L"""
    return cfg.omega_z * cfg.chain_length / (2.0 * np.pi * np.sqrt(2.0))


# ============================================================================
# Quadrature
# ============================================================================

def _quad(func: Callable, a: float, b: float, operation: str, weight: str = None,
          wvar: float = None) -> float:
    """scipy quad with failures escalated to NumericalError"""
    if b <= a:
        return 0.0
    kwargs = dict(epsabs=QUAD_TOL, epsrel=QUAD_TOL, limit=QUAD_LIMIT)
    if weight is not None:
        kwargs.update(weight=weight, wvar=wvar, maxp1=QUAD_MAXP1)
    with warnings.catch_warnings():
        warnings.simplefilter('error', integrate.IntegrationWarning)
        try:
            value, abserr = integrate.quad(func, a, b, **kwargs)
        except integrate.IntegrationWarning as e:
            raise NumericalError(operation, 'quadrature did not converge',
                                 {'interval': (a, b), 'weight': weight, 'detail': str(e).splitlines()[0]})
    allowed = 10.0 * max(QUAD_TOL, QUAD_TOL * abs(value))
    if not np.isfinite(value) or abserr > allowed:
        raise NumericalError(operation, 'quadrature error estimate above tolerance',
                             {'value': value, 'abserr': abserr, 'interval': (a, b)})
    return float(value)


def _tail_bound(bath: BathParams) -> float:
    # |integrand| <= 4 eta coth(w / 2T) exp(-w / w_c) / w beyond the cutoff
    omega_max = CUTOFF_MULTIPLE * bath.omega_c
    return 4.0 * bath.eta * coth_half(omega_max, bath.temperature) * special.exp1(CUTOFF_MULTIPLE)


def _bracket(branch: int, s: float) -> Callable:
    if branch == 0:
        return lambda w: 1.0
    if branch > 0:
        return lambda w: 1.0 + np.cos(w * s)
    return lambda w: 2.0 * np.sin(0.5 * w * s) ** 2


def _oscillation_terms(branch: int, t: float, s: float) -> List[Tuple[float, float]]:
    # (1 - cos wt)(1 +/- cos ws) expanded into sum c_k cos(nu_k w)
    if branch > 0:
        return [(1.0, 0.0), (-1.0, t), (1.0, s), (-0.5, abs(t - s)), (-0.5, t + s)]
    return [(1.0, 0.0), (-1.0, t), (-1.0, s), (0.5, abs(t - s)), (0.5, t + s)]


def _decay_integral(t: float, s: float, branch: int, bath: BathParams, operation: str) -> float:
    """
    int_0^inf J(w)/w^2 coth(w/2T) (1 - cos wt) B(w) dw with B = 1 (branch 0)
    or 1 +/- cos(w s) (branch +1 / -1).
    """
    if t == 0 or (branch < 0 and s == 0):
        return 0.0
    eta, wc, T = bath.eta, bath.omega_c, bath.temperature
    omega_max = CUTOFF_MULTIPLE * wc
    bracket = _bracket(branch, s)

    def direct(w):
        # (1 - cos wt) / w^2 = (t^2 / 2) sinc(wt / 2pi)^2
        return (eta * np.exp(-w / wc) * omega_coth(w, T)
                * 0.5 * t * t * np.sinc(w * t / (2.0 * np.pi)) ** 2 * bracket(w))

    def envelope(w):
        return eta * np.exp(-w / wc) * omega_coth(w, T) / (w * w)

    slow_bracket = branch == 0 or wc * s <= OSCILLATION_SPLIT
    if wc * t <= OSCILLATION_SPLIT and slow_bracket:
        value = _quad(direct, 0.0, omega_max, operation)
    elif slow_bracket:
        split = min(np.pi / t, omega_max)
        h = lambda w: envelope(w) * bracket(w)
        value = (_quad(direct, 0.0, split, operation)
                 + _quad(h, split, omega_max, operation)
                 - _quad(h, split, omega_max, operation, weight='cos', wvar=t))
    else:
        split = min(np.pi / (t + s), omega_max)
        value = _quad(direct, 0.0, split, operation)
        for coeff, freq in _oscillation_terms(branch, t, s):
            if freq == 0:
                value += coeff * _quad(envelope, split, omega_max, operation)
            else:
                value += coeff * _quad(envelope, split, omega_max, operation,
                                       weight='cos', wvar=freq)

    bound = _tail_bound(bath)
    if bound > QUAD_TOL * max(1.0, abs(value)):
        raise NumericalError(operation, 'truncated tail exceeds tolerance',
                             {'tail_bound': bound, 'omega_max': omega_max})
    return float(value)


def phase_integral(t: float, bath: BathParams) -> float:
    """
    S(t) = int_0^inf J(w)/w^2 sin(wt) dw, equal to eta arctan(w_c t).

    The sine part carries no coth factor: with it the integral diverges
    logarithmically at w -> 0 for any T > 0.
    """
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if t == 0:
        return 0.0
    eta, wc = bath.eta, bath.omega_c
    omega_max = CUTOFF_MULTIPLE * wc

    def direct(w):
        # sin(wt) / w = t sinc(wt / pi)
        return eta * np.exp(-w / wc) * t * np.sinc(w * t / np.pi)

    if wc * t <= OSCILLATION_SPLIT:
        return _quad(direct, 0.0, omega_max, 'phi_pm')
    split = np.pi / t
    return (_quad(direct, 0.0, split, 'phi_pm')
            + _quad(lambda w: eta * np.exp(-w / wc) / w, split, omega_max, 'phi_pm',
                    weight='sin', wvar=t))


# ============================================================================
# Kernel operations
# ============================================================================

def _resolve_velocity(bath: BathParams, dispersion_velocity: Optional[float]) -> float:
    v = dispersion_velocity if dispersion_velocity is not None else bath.dispersion_velocity
    if v is None:
        raise ValueError("a dispersion velocity is required for r > 0")
    if v <= 0:
        raise ValueError(f"dispersion velocity must be > 0, got {v}")
    return float(v)


def gamma(t: float, bath: BathParams) -> float:
    """Single-qubit decay exponent Gamma(t)"""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    return _decay_integral(float(t), 0.0, 0, bath, 'gamma')


def gamma_pm(t: float, r: float, bath: BathParams,
             dispersion_velocity: Optional[float] = None) -> Tuple[float, float]:
    """Collective exponents (Gamma_+, Gamma_-) with k(w) = w / v"""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if r == 0:
        return 2.0 * gamma(t, bath), 0.0
    s = r / _resolve_velocity(bath, dispersion_velocity)
    plus = _decay_integral(float(t), s, 1, bath, 'gamma_pm')
    minus = _decay_integral(float(t), s, -1, bath, 'gamma_pm')
    return plus, minus


def phi_pm(t: float, r: float, bath: BathParams, omega_0: float,
           lambda_: float) -> Tuple[float, float]:
    """
    Phases phi_+/- = omega_0 t +/- 2 lambda t +/- S(t).

    r does not enter the continuum phase; it is accepted so every kernel
    shares one call signature.
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    s = phase_integral(t, bath)
    return omega_0 * t + 2.0 * lambda_ * t + s, omega_0 * t - 2.0 * lambda_ * t - s


def continuum_kernels(time_grid: Sequence[float], r: float, bath: BathParams,
                      omega_0: float = 0.0, lambda_: float = 0.0,
                      dispersion_velocity: Optional[float] = None) -> DecoherenceKernels:
    """Evaluate all continuum kernels on a caller-supplied grid"""
    grid = np.asarray(time_grid, dtype=float)
    rows = []
    for t in grid:
        g = gamma(t, bath)
        if r == 0:
            gp, gm = 2.0 * g, 0.0
        else:
            gp, gm = gamma_pm(t, r, bath, dispersion_velocity)
        pp, pm = phi_pm(t, r, bath, omega_0, lambda_)
        rows.append((g, gp, gm, pp, pm))
    values = np.array(rows, dtype=float).reshape(len(grid), 5)
    return DecoherenceKernels(grid, *values.T, method='continuum', omega_0=float(omega_0))


def mode_sum_kernels(spectrum: ModeSpectrum, r: float, temperature: float,
                     time_grid: Sequence[float], omega_0: float = 0.0,
                     lambda_: Optional[float] = None) -> DecoherenceKernels:
    """
    Exact finite-chain kernels:
    Gamma_+/- = sum_n |g_n|^2 / w_n^2 coth(w_n / 2T) (1 - cos w_n t) [1 +/- cos(k_n r)].
    """
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    grid = np.asarray(time_grid, dtype=float)
    w = spectrum.frequencies
    k = spectrum.wavenumbers
    g2 = np.abs(spectrum.couplings[:, 0]) ** 2
    if lambda_ is None:
        lambda_ = coupling_lambda(spectrum, r)

    weight = g2 / w ** 2 * coth_half(w, temperature)
    one_minus_cos = 2.0 * np.sin(0.5 * np.outer(grid, w)) ** 2
    bracket_plus = 1.0 + np.cos(k * r)
    bracket_minus = 2.0 * np.sin(0.5 * k * r) ** 2

    g = one_minus_cos @ weight
    gp = one_minus_cos @ (weight * bracket_plus)
    gm = one_minus_cos @ (weight * bracket_minus)
    s = np.sin(np.outer(grid, w)) @ (g2 / w ** 2)
    phi_plus = omega_0 * grid + 2.0 * lambda_ * grid + s
    phi_minus = omega_0 * grid - 2.0 * lambda_ * grid - s
    return DecoherenceKernels(grid, g, gp, gm, phi_plus, phi_minus, method='mode_sum',
                              omega_0=float(omega_0))


def gamma_minus_plateau(r: float, bath: BathParams,
                        dispersion_velocity: Optional[float] = None) -> float:
    """
    Long-time limit of Gamma_-(t).

    The bracket 1 - cos(ws) removes the w -> 0 growth, so Gamma_- levels off
    at int J(w)/w^2 coth(w/2T) (1 - cos ws) dw = Gamma(s) with s = r / v.
    """
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if r == 0:
        return 0.0
    return gamma(r / _resolve_velocity(bath, dispersion_velocity), bath)


def dfs_lifetime(bath: BathParams, r: float, chain_L: float, omega_z: float,
                 dispersion_velocity: Optional[float] = None,
                 horizon: Optional[float] = None) -> LifetimeResult:
    """
    Time tau at which Gamma_-(tau) = 1, with the closed-form estimate
    sqrt[(eta T)^-1 (w_c r / w_z L)^-2] for comparison.

    Gamma_- saturates at gamma_minus_plateau; when that stays at or below 1
    the subspace never decays and tau is infinite. Otherwise the scan runs
    past LIFETIME_WINDOW until the crossing is bracketed, up to `horizon`
    (default: the larger of the window and 100 x the estimate).
    """
    if bath.temperature <= 0:
        raise ValueError("dfs_lifetime requires temperature > 0")
    if r < 0:
        raise ValueError(f"r must be >= 0, got {r}")
    if r == 0:
        return LifetimeResult(tau=float('inf'), estimate=float('inf'), decays=False, plateau=0.0)
    estimate = float(np.sqrt(1.0 / (bath.eta * bath.temperature))
                     * omega_z * chain_L / (bath.omega_c * r))
    s = r / _resolve_velocity(bath, dispersion_velocity)
    plateau = gamma(s, bath)
    if plateau <= 1.0:
        print(f"⚠️ Gamma_- levels off at {plateau:.6g} <= 1; no DFS decay", file=sys.stderr)
        return LifetimeResult(tau=float('inf'), estimate=estimate, decays=False, plateau=plateau)

    lo, hi = LIFETIME_WINDOW
    if horizon is None:
        horizon = max(hi / bath.omega_c, LIFETIME_HORIZON_MULTIPLE * estimate)
    if horizon <= lo / bath.omega_c:
        raise ValueError(f"horizon must exceed {lo / bath.omega_c:g}, got {horizon}")
    minus = lambda t: _decay_integral(float(t), s, -1, bath, 'dfs_lifetime')
    decades = np.log10(horizon * bath.omega_c / lo)
    n_points = max(LIFETIME_GRID_POINTS, int(np.ceil(LIFETIME_POINTS_PER_DECADE * decades)) + 1)
    times = np.geomspace(lo / bath.omega_c, horizon, n_points)
    previous = 0.0
    for t in times:
        if minus(t) >= 1.0:
            tau = optimize.bisect(lambda x: minus(x) - 1.0, previous, t,
                                  xtol=LIFETIME_XTOL, rtol=4 * np.finfo(float).eps)
            return LifetimeResult(tau=float(tau), estimate=estimate, decays=True, plateau=plateau)
        previous = t
    print(f"⚠️ Gamma_- stays below 1 up to t = {times[-1]:g} (plateau {plateau:.6g})",
          file=sys.stderr)
    return LifetimeResult(tau=float('inf'), estimate=estimate, decays=False, plateau=plateau)
