#!/usr/bin/env python3
"""
Shared Configuration Constants for Ionbath
Centralized tolerances, limits and defaults to avoid magic numbers across modules.
All physical quantities are dimensionless: hbar = k_B = 1, omega_z = 1, a = 1.
"""
import numpy as np

__version__ = "1.0.0"

# ============================================================================
# Validation Tolerances
# ============================================================================

HERMITICITY_TOL = 1e-12  # Entrywise |rho - rho^dagger|
TRACE_TOL = 1e-12  # |Tr(rho) - 1| for user-supplied states
REDUCED_TRACE_TOL = 1e-10  # Reduced states accumulate round-off from the partial trace
POSITIVITY_TOL = 1e-10  # Smallest eigenvalue allowed below zero
NORM_TOL = 1e-10  # Norm drift allowed during exact evolution
GRID_MATCH_TOL = 1e-12  # Relative tolerance when looking up a time on a kernel grid

# ============================================================================
# Chain Equilibrium Solver
# ============================================================================

EQUILIBRIUM_FORCE_TOL = 1e-12  # Infinity-norm of the dimensionless force residual
EQUILIBRIUM_MAX_ITER = 200
# Uniform initial spacing fit: du ~ 2.018 * N^-0.559 (dimensionless units)
EQUILIBRIUM_SPACING_PREFACTOR = 2.018
EQUILIBRIUM_SPACING_EXPONENT = -0.559

# ============================================================================
# Quadrature Configuration
# ============================================================================

QUAD_TOL = 1e-10  # Absolute and relative tolerance for scipy.integrate.quad
QUAD_LIMIT = 500  # Maximum adaptive subintervals
QUAD_MAXP1 = 100  # Chebyshev moments kept by the oscillatory (QAWO) rule
CUTOFF_MULTIPLE = 40.0  # Upper integration limit as a multiple of omega_c
OSCILLATION_SPLIT = 10.0  # omega_c * t above which the oscillatory rule is used
COTH_SERIES_THRESHOLD = 1e-6  # omega / 2T below which the Laurent series is used
CUTOFF_RATIO_WARNING = 10.0  # Warn unless omega_c exceeds T and Delta by this factor

# ============================================================================
# DFS Lifetime Search
# ============================================================================

LIFETIME_WINDOW = (1e-2, 1e4)  # Search window in units of 1/omega_c
LIFETIME_GRID_POINTS = 241  # Geometric scan points before bisection
LIFETIME_XTOL = 1e-12
LIFETIME_HORIZON_MULTIPLE = 100.0  # Default scan horizon as a multiple of the closed-form estimate
LIFETIME_POINTS_PER_DECADE = 40  # Geometric scan density when the horizon is extended

# ============================================================================
# Effective DFS Theory
# ============================================================================

DELTA_LAMBDA_WARNING = 0.2  # Warn when Delta / lambda exceeds this
RESONANCE_TOL = 1e-12  # Relative closeness of omega_0^2 to 4 lambda^2 treated as resonant

# ============================================================================
# Exact Simulator Limits
# ============================================================================

MAX_HILBERT_DIM = 2 ** 18  # Ceiling on 4 * d^M
MAX_MODES = 3
DEFAULT_FOCK_DIM = 8
MAX_GIBBS_DEFICIT = 1e-6  # Truncated Gibbs trace deficit escalated to an error
ENSEMBLE_WEIGHT_CUTOFF = 1e-11  # Discarded Gibbs weight when building the ensemble
OCCUPANCY_FACTOR = 3.0  # Warn when 3 * n_bar >= d
KRYLOV_TOL = 1e-10  # Per-step Krylov error bound
KRYLOV_DIM = 30  # Arnoldi subspace size
KRYLOV_STEP_RADIUS = 0.9  # Target spectral radius * dt per step
DENSE_MAX_DIM = 40  # Below this a single dense step is exact enough
CONVERGENCE_TOL = 1e-9  # Largest reduced-state change accepted between Fock cutoffs
FOCK_STEP = 2  # Fock cutoff increment while converging
FIT_RESIDUAL_TOL = 1e-2  # RMS residual of the swap-rate fit
FIT_MIN_TRANSFER = 1e-6  # Max P01 below which the swap rate is reported as zero

# ============================================================================
# Teleportation
# ============================================================================

MONTE_CARLO_SAMPLES = 10_000
DEFAULT_SEED = 20240101

# ============================================================================
# Output Configuration
# ============================================================================

CSV_FLOAT_FORMAT = '%.17g'
SUMMARY_FILENAME = 'summary.json'
CSV_SCHEMAS = {
    'modes': 'ionbath.modes.v1',
    'kernels': 'ionbath.kernels.v1',
    'dephase': 'ionbath.dephase.v1',
    'dfs': 'ionbath.dfs.v1',
    'exact': 'ionbath.exact.v1',
    'teleport': 'ionbath.teleport.v1',
    'sweep': 'ionbath.sweep.v1',
}
DEFAULT_WORKERS = 1

# ============================================================================
# Helper Functions
# ============================================================================

def get_schema_id(kind: str) -> str:
    """
    Get the versioned CSV schema id for an experiment kind.

    Args:
        kind: One of 'modes', 'kernels', 'dephase', 'dfs', 'exact', 'teleport', 'sweep'

    Returns:
        Schema id string written to the CSV header comment
    """
    if kind not in CSV_SCHEMAS:
        raise ValueError(f"Unknown experiment kind: {kind}")
    return CSV_SCHEMAS[kind]


def get_time_grid(t_start: float, t_end: float, n_points: int, spacing: str = 'linear') -> np.ndarray:
    """
    Build a strictly increasing time grid.

    Args:
        t_start: First time (must be > 0 for log spacing)
        t_end: Last time
        n_points: Number of points (>= 2)
        spacing: 'linear' or 'log'

    Returns:
        1D float array
    """
    if n_points < 2:
        raise ValueError(f"n_points must be >= 2, got {n_points}")
    if not t_end > t_start:
        raise ValueError(f"t_end ({t_end}) must exceed t_start ({t_start})")
    if t_start < 0:
        raise ValueError(f"t_start must be >= 0, got {t_start}")
    if spacing == 'linear':
        return np.linspace(t_start, t_end, n_points)
    if spacing == 'log':
        if t_start <= 0:
            raise ValueError("log spacing requires t_start > 0")
        return np.geomspace(t_start, t_end, n_points)
    raise ValueError(f"spacing must be 'linear' or 'log', got {spacing!r}")
