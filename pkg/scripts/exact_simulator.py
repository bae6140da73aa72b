#!/usr/bin/env python3
"""
Exact Spin-Boson Simulator
Brute-force evolution of two qubits coupled through sigma_z to a few truncated axial
modes. Serves as the oracle for the dephasing laws and the effective DFS theory.

Basis ordering: qubit pair slowest (|11>, |10>, |01>, |00>), then modes ascending,
each mode in its Fock basis |0>..|d-1>.
"""
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg, optimize, sparse

from bath_kernels import thermal_occupation
from chain_model import ModeSpectrum, polaron_coupling
from config_constants import (
    MAX_HILBERT_DIM,
    MAX_MODES,
    MAX_GIBBS_DEFICIT,
    ENSEMBLE_WEIGHT_CUTOFF,
    OCCUPANCY_FACTOR,
    KRYLOV_TOL,
    KRYLOV_DIM,
    KRYLOV_STEP_RADIUS,
    DENSE_MAX_DIM,
    NORM_TOL,
    REDUCED_TRACE_TOL,
    DELTA_LAMBDA_WARNING,
    FIT_RESIDUAL_TOL,
    FIT_MIN_TRANSFER,
    CONVERGENCE_TOL,
    FOCK_STEP,
)
from dephasing import QubitPairState, basis_ket
from sim_errors import NumericalError, PhysicsValidityWarning

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


@dataclass(frozen=True)
class TruncationSpec:
    """M modes, each truncated to d Fock states"""
    n_modes: int
    fock_dim: int
    max_dim: int = MAX_HILBERT_DIM

    def __post_init__(self):
        if not 1 <= self.n_modes <= MAX_MODES:
            raise ValueError(f"n_modes must be in [1, {MAX_MODES}], got {self.n_modes}")
        if self.fock_dim < 2:
            raise ValueError(f"fock_dim must be >= 2, got {self.fock_dim}")
        if self.dimension > self.max_dim:
            raise ValueError(
                f"Hilbert dimension 4 * {self.fock_dim}^{self.n_modes} = {self.dimension} "
                f"exceeds the ceiling {self.max_dim}"
            )

    @property
    def phonon_dim(self) -> int:
        return self.fock_dim ** self.n_modes

    @property
    def dimension(self) -> int:
        return 4 * self.phonon_dim


@dataclass(frozen=True, eq=False)
class FullState:
    """Weighted ensemble of pure states; a single member is a pure state"""
    vectors: np.ndarray
    weights: np.ndarray
    trunc: TruncationSpec

    def __post_init__(self):
        vectors = np.atleast_2d(np.asarray(self.vectors, dtype=complex))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        if vectors.shape != (weights.size, self.trunc.dimension):
            raise ValueError(f"expected {weights.size} vectors of length {self.trunc.dimension}, "
                             f"got shape {vectors.shape}")
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > NORM_TOL:
            raise ValueError("ensemble weights must be non-negative and sum to 1")
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValueError(f"ensemble members must be normalized (max drift {np.max(np.abs(norms - 1.0)):.2e})")
        object.__setattr__(self, 'vectors', vectors)
        object.__setattr__(self, 'weights', weights)

    @classmethod
    def pure(cls, vector, trunc: TruncationSpec) -> 'FullState':
        return cls(np.asarray(vector, dtype=complex)[None, :], np.ones(1), trunc)

    def density_matrix(self) -> np.ndarray:
        return (self.vectors.T * self.weights) @ self.vectors.conj()

    def expectation(self, operator) -> float:
        values = [np.vdot(v, operator @ v).real for v in self.vectors]
        return float(np.dot(self.weights, values))


# ============================================================================
# Hamiltonian
# ============================================================================

def boson_annihilation(fock_dim: int) -> sparse.csr_matrix:
    return sparse.diags(np.sqrt(np.arange(1, fock_dim, dtype=float)), offsets=1,
                        shape=(fock_dim, fock_dim), format='csr', dtype=complex)


def _embed_mode(op, n: int, trunc: TruncationSpec) -> sparse.csr_matrix:
    d = trunc.fock_dim
    left = sparse.identity(d ** n, dtype=complex, format='csr')
    right = sparse.identity(d ** (trunc.n_modes - n - 1), dtype=complex, format='csr')
    return sparse.kron(sparse.kron(left, op), right, format='csr')


def build_hamiltonian(spectrum: ModeSpectrum, trunc: TruncationSpec, delta: float,
                      omega_0: float) -> sparse.csr_matrix:
    """
    H = sum_j (Delta/2 sigma_x^j + omega_0/2 sigma_z^j) + sum_n w_n b_n^+ b_n
        + sum_j sum_n sigma_z^j / 2 (g_n^j b_n^+ + g_n^j* b_n)
    """
    if len(spectrum) < trunc.n_modes:
        raise ValueError(f"spectrum has {len(spectrum)} modes, truncation needs {trunc.n_modes}")
    eye2 = np.eye(2, dtype=complex)
    sx = [np.kron(SIGMA_X, eye2), np.kron(eye2, SIGMA_X)]
    sz = [np.kron(SIGMA_Z, eye2), np.kron(eye2, SIGMA_Z)]
    qubit = 0.5 * delta * (sx[0] + sx[1]) + 0.5 * omega_0 * (sz[0] + sz[1])

    phonon_id = sparse.identity(trunc.phonon_dim, dtype=complex, format='csr')
    h = sparse.kron(sparse.csr_matrix(qubit), phonon_id, format='csr')

    b = boson_annihilation(trunc.fock_dim)
    free = sparse.csr_matrix((trunc.phonon_dim, trunc.phonon_dim), dtype=complex)
    for n in range(trunc.n_modes):
        b_n = _embed_mode(b, n, trunc)
        free = free + spectrum.frequencies[n] * (b_n.conj().T @ b_n)
        for j in range(2):
            g = spectrum.couplings[n, j]
            displacement = g * b_n.conj().T + np.conj(g) * b_n
            h = h + sparse.kron(sparse.csr_matrix(0.5 * sz[j]), displacement, format='csr')
    h = h + sparse.kron(sparse.identity(4, dtype=complex, format='csr'), free, format='csr')
    h = h.tocsr()
    h.eliminate_zeros()

    asymmetry = abs(h - h.conj().T).max() if h.nnz else 0.0
    if asymmetry != 0:
        raise NumericalError('build_hamiltonian', 'assembled operator is not Hermitian',
                             {'max_asymmetry': float(asymmetry)})
    return h


# ============================================================================
# Initial states
# ============================================================================

def _normalized_qubit_ket(qubit_state) -> np.ndarray:
    psi = np.asarray(qubit_state, dtype=complex).reshape(4)
    norm = np.linalg.norm(psi)
    if norm == 0:
        raise ValueError("qubit state must be non-zero")
    return psi / norm


def _product_vector(qubit_ket: np.ndarray, fock_index: int, trunc: TruncationSpec) -> np.ndarray:
    phonon = np.zeros(trunc.phonon_dim, dtype=complex)
    phonon[fock_index] = 1.0
    return np.kron(qubit_ket, phonon)


def gibbs_trace_deficit(spectrum: ModeSpectrum, trunc: TruncationSpec, temperature: float) -> float:
    """1 - prod_n (1 - exp(-d w_n / T)): Gibbs weight lost to the Fock cutoff"""
    if temperature == 0:
        return 0.0
    w = spectrum.frequencies[:trunc.n_modes]
    kept = -np.expm1(-trunc.fock_dim * w / temperature)
    return float(-np.expm1(np.sum(np.log(kept))))


def gibbs_members(spectrum: ModeSpectrum, trunc: TruncationSpec, temperature: float,
                  max_trace_deficit: float = MAX_GIBBS_DEFICIT) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fock product indices and weights of the truncated per-mode Gibbs state.

    Members are sorted by weight (ties by Fock index) and the tail carrying less than
    ENSEMBLE_WEIGHT_CUTOFF of the total weight is dropped before renormalizing.
    """
    if temperature < 0:
        raise ValueError(f"temperature must be >= 0, got {temperature}")
    if len(spectrum) < trunc.n_modes:
        raise ValueError(f"spectrum has {len(spectrum)} modes, truncation needs {trunc.n_modes}")
    if temperature == 0:
        return np.zeros(1, dtype=int), np.ones(1)

    deficit = gibbs_trace_deficit(spectrum, trunc, temperature)
    if deficit > max_trace_deficit:
        raise ValueError(
            f"truncated Gibbs trace deficit {deficit:.3e} exceeds {max_trace_deficit:.1e}; "
            f"raise fock_dim above {trunc.fock_dim}"
        )
    w = spectrum.frequencies[:trunc.n_modes]
    n_bar = thermal_occupation(w, temperature)
    for n, occupancy in enumerate(np.atleast_1d(n_bar)):
        if OCCUPANCY_FACTOR * occupancy >= trunc.fock_dim:
            warnings.warn(
                f"mode {n + 1}: thermal occupancy {occupancy:.3g} is large for fock_dim={trunc.fock_dim}",
                PhysicsValidityWarning,
                stacklevel=3,
            )

    levels = np.arange(trunc.fock_dim)
    probs = np.array([1.0])
    for omega in w:
        p = np.exp(-levels * omega / temperature)
        probs = np.kron(probs, p / p.sum())
    order = np.argsort(-probs, kind='stable')
    cumulative = np.cumsum(probs[order])
    keep = int(np.searchsorted(cumulative, 1.0 - ENSEMBLE_WEIGHT_CUTOFF) + 1)
    chosen = order[:min(keep, order.size)]
    return chosen, probs[chosen] / probs[chosen].sum()


def thermal_initial_state(qubit_state, spectrum: ModeSpectrum, trunc: TruncationSpec,
                          temperature: float, max_trace_deficit: float = MAX_GIBBS_DEFICIT) -> FullState:
    """|psi><psi| (x) truncated per-mode Gibbs states, as an ensemble of Fock product states"""
    psi = _normalized_qubit_ket(qubit_state)
    indices, weights = gibbs_members(spectrum, trunc, temperature, max_trace_deficit)
    vectors = np.array([_product_vector(psi, int(i), trunc) for i in indices])
    return FullState(vectors, weights, trunc)


# ============================================================================
# Propagation
# ============================================================================

class Propagator:
    """e^{-iHt} on vectors: dense eigenbasis for small spaces, restarted Arnoldi otherwise"""

    def __init__(self, hamiltonian, tolerance: float = KRYLOV_TOL, krylov_dim: int = KRYLOV_DIM):
        self.hamiltonian = sparse.csr_matrix(hamiltonian)
        self.dim = self.hamiltonian.shape[0]
        self.tolerance = tolerance
        self.krylov_dim = min(krylov_dim, self.dim)
        self.dense = self.dim <= DENSE_MAX_DIM
        if self.dense:
            self._energies, self._eigvecs = linalg.eigh(self.hamiltonian.toarray())
            self.center, self.radius = 0.0, 0.0
            return
        diag = self.hamiltonian.diagonal().real
        offdiag = np.asarray(abs(self.hamiltonian).sum(axis=1)).ravel() - np.abs(diag)
        lower, upper = np.min(diag - offdiag), np.max(diag + offdiag)
        self.center = 0.5 * (lower + upper)
        self.radius = max(0.5 * (upper - lower), np.finfo(float).tiny)
        self._shifted = (self.hamiltonian
                         - self.center * sparse.identity(self.dim, dtype=complex, format='csr')).tocsr()

    def default_steps(self, t: float) -> int:
        if self.dense:
            return 1
        return max(1, int(np.ceil(self.radius * abs(t) / KRYLOV_STEP_RADIUS)))

    def propagate(self, psi: np.ndarray, t: float, n_steps: Optional[int] = None) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if t == 0:
            return psi.copy()
        if self.dense:
            return self._eigvecs @ (np.exp(-1j * self._energies * t) * (self._eigvecs.conj().T @ psi))
        if n_steps is None:
            n_steps = self.default_steps(t)
        tau = t / n_steps
        if self.radius * abs(tau) >= 1.0:
            raise ValueError(f"n_steps={n_steps} too small: spectral radius * dt = {self.radius * abs(tau):.3g}")
        norm0 = np.linalg.norm(psi)
        phase = np.exp(-1j * self.center * tau)
        for step in range(n_steps):
            psi = phase * self._krylov_step(psi, tau, step)
            drift = abs(np.linalg.norm(psi) - norm0)
            if drift > NORM_TOL:
                raise NumericalError('evolve', 'norm drift exceeded tolerance',
                                     {'step': step, 'drift': float(drift)})
        return psi

    def _krylov_step(self, psi: np.ndarray, tau: float, step: int) -> np.ndarray:
        beta = np.linalg.norm(psi)
        if beta == 0:
            return psi.copy()
        m_max = self.krylov_dim
        basis = np.zeros((m_max + 1, self.dim), dtype=complex)
        hess = np.zeros((m_max + 1, m_max), dtype=complex)
        basis[0] = psi / beta
        m, breakdown = m_max, False
        for j in range(m_max):
            w = self._shifted @ basis[j]
            # Classical Gram-Schmidt, applied twice
            for _ in range(2):
                coeffs = basis[:j + 1].conj() @ w
                w = w - coeffs @ basis[:j + 1]
                hess[:j + 1, j] += coeffs
            h = np.linalg.norm(w)
            hess[j + 1, j] = h
            if h <= 1e-14 * max(1.0, self.radius):
                m, breakdown = j + 1, True
                break
            basis[j + 1] = w / h

        small = hess[:m, :m]
        small = 0.5 * (small + small.conj().T)
        evals, evecs = linalg.eigh(small)
        column = evecs @ (np.exp(-1j * tau * evals) * evecs[0].conj())
        if not breakdown:
            error = beta * abs(hess[m, m - 1]) * abs(column[m - 1])
            if error > self.tolerance:
                raise NumericalError('evolve', 'Krylov step error above tolerance',
                                     {'step': step, 'error_estimate': float(error)})
        return beta * (column @ basis[:m])


def evolve(state: FullState, H, t: float, n_steps: Optional[int] = None) -> FullState:
    """Apply e^{-iHt} to every ensemble member"""
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    propagator = H if isinstance(H, Propagator) else Propagator(H)
    vectors = np.array([propagator.propagate(v, t, n_steps) for v in state.vectors])
    return FullState(vectors, state.weights, state.trunc)


class SectorPropagator:
    """
    e^{-iHt} for Delta = 0.

    Without tunneling H is block diagonal in the qubit basis, and each block
    E_s + sum_n h_{s,n} is a sum of commuting single-mode terms, so the block
    propagator is the Kronecker product of d x d exponentials. This is the same
    truncated dynamics build_hamiltonian describes, applied mode by mode.
    """

    def __init__(self, spectrum: ModeSpectrum, trunc: TruncationSpec, omega_0: float):
        if len(spectrum) < trunc.n_modes:
            raise ValueError(f"spectrum has {len(spectrum)} modes, truncation needs {trunc.n_modes}")
        self.trunc = trunc
        self.dim = trunc.dimension
        self._shape = (4,) + (trunc.fock_dim,) * trunc.n_modes
        b = boson_annihilation(trunc.fock_dim).toarray()
        number = b.conj().T @ b
        # sigma_z eigenvalues of (qubit 1, qubit 2) in |11>, |10>, |01>, |00>
        z = np.array([[1, 1], [1, -1], [-1, 1], [-1, -1]], dtype=float)
        self._offsets = 0.5 * omega_0 * z.sum(axis=1)
        self._blocks = []
        for z1, z2 in z:
            modes = []
            for n in range(trunc.n_modes):
                c = 0.5 * (z1 * spectrum.couplings[n, 0] + z2 * spectrum.couplings[n, 1])
                h = spectrum.frequencies[n] * number + c * b.conj().T + np.conj(c) * b
                modes.append(linalg.eigh(h))
            self._blocks.append(modes)

    def propagate(self, psi: np.ndarray, t: float, n_steps: Optional[int] = None) -> np.ndarray:
        psi = np.asarray(psi, dtype=complex)
        if t == 0:
            return psi.copy()
        tensor = psi.reshape(self._shape)
        out = np.empty_like(tensor)
        for s, modes in enumerate(self._blocks):
            block = tensor[s]
            for n, (energies, vectors) in enumerate(modes):
                unitary = (vectors * np.exp(-1j * energies * t)) @ vectors.conj().T
                block = np.moveaxis(np.tensordot(unitary, block, axes=([1], [n])), 0, n)
            out[s] = np.exp(-1j * self._offsets[s] * t) * block
        return out.reshape(-1)


# ============================================================================
# Reduced dynamics
# ============================================================================

def _reduce_vector(psi: np.ndarray) -> np.ndarray:
    block = psi.reshape(4, -1)
    return block @ block.conj().T


def reduced_qubit_state(state: FullState) -> QubitPairState:
    """Partial trace over all modes"""
    rho = np.zeros((4, 4), dtype=complex)
    for weight, psi in zip(state.weights, state.vectors):
        rho += weight * _reduce_vector(psi)
    return QubitPairState(0.5 * (rho + rho.conj().T), trace_tol=REDUCED_TRACE_TOL)


def _member_trajectory(args) -> np.ndarray:
    propagator, qubit_ket, fock_index, trunc, time_grid = args
    out = np.empty((len(time_grid), 4, 4), dtype=complex)
    current, t_prev = _product_vector(qubit_ket, fock_index, trunc), 0.0
    for i, t in enumerate(time_grid):
        current = propagator.propagate(current, t - t_prev)
        out[i] = _reduce_vector(current)
        t_prev = t
    return out


def simulate_reduced_dynamics(qubit_state, spectrum: ModeSpectrum, trunc: TruncationSpec,
                              temperature: float, delta: float, omega_0: float,
                              time_grid: Sequence[float], workers: int = 1,
                              max_trace_deficit: float = MAX_GIBBS_DEFICIT) -> np.ndarray:
    """
    Reduced 4x4 qubit states on a time grid, shape (len(time_grid), 4, 4).

    Gibbs ensemble members are independent trajectories; with workers > 1 they run in
    a process pool. The weighted sum is always taken in member order. At Delta = 0
    the blocks are propagated mode by mode (SectorPropagator).
    """
    grid = np.asarray(time_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0 or grid[0] < 0 or np.any(np.diff(grid) < 0):
        raise ValueError("time_grid must be a non-empty, non-decreasing sequence of times >= 0")
    psi = _normalized_qubit_ket(qubit_state)
    indices, weights = gibbs_members(spectrum, trunc, temperature, max_trace_deficit)
    if delta == 0:
        propagator = SectorPropagator(spectrum, trunc, omega_0)
    else:
        propagator = Propagator(build_hamiltonian(spectrum, trunc, delta, omega_0))
    print(f"⚙️ exact: dim={trunc.dimension}, members={len(weights)}, "
          f"points={grid.size}, workers={workers}", file=sys.stderr)

    jobs = [(propagator, psi, int(i), trunc, grid) for i in indices]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trajectories = list(pool.map(_member_trajectory, jobs))
    else:
        trajectories = [_member_trajectory(job) for job in jobs]

    total = np.zeros((grid.size, 4, 4), dtype=complex)
    for weight, trajectory in zip(weights, trajectories):
        total += weight * trajectory
    return 0.5 * (total + np.conj(np.swapaxes(total, 1, 2)))


@dataclass(frozen=True)
class TruncationConvergence:
    trunc: TruncationSpec
    change: float
    history: Tuple[Tuple[int, float], ...]


def _raised(trunc: TruncationSpec, step: int) -> TruncationSpec:
    try:
        return TruncationSpec(trunc.n_modes, trunc.fock_dim + step, trunc.max_dim)
    except ValueError as e:
        raise NumericalError('converge_truncation',
                             'Fock cutoff reached the dimension ceiling before converging',
                             {'fock_dim': trunc.fock_dim, 'max_dim': trunc.max_dim, 'detail': str(e)})


def converged_reduced_dynamics(qubit_state, spectrum: ModeSpectrum, trunc: TruncationSpec,
                               temperature: float, delta: float, omega_0: float,
                               time_grid: Sequence[float], workers: int = 1,
                               tolerance: float = CONVERGENCE_TOL, fock_step: int = FOCK_STEP,
                               max_trace_deficit: float = MAX_GIBBS_DEFICIT
                               ) -> Tuple[np.ndarray, TruncationConvergence]:
    """
    simulate_reduced_dynamics with the Fock cutoff raised by fock_step until no
    reduced-state element moves by more than tolerance.

    Starts from trunc, or from the first cutoff whose Gibbs trace deficit is
    acceptable. Returns the states at the finer of the last two cutoffs.
    """
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance}")
    if fock_step < 1:
        raise ValueError(f"fock_step must be >= 1, got {fock_step}")
    current = trunc
    while gibbs_trace_deficit(spectrum, current, temperature) > max_trace_deficit:
        current = _raised(current, fock_step)
    run = lambda spec: simulate_reduced_dynamics(qubit_state, spectrum, spec, temperature, delta,
                                                 omega_0, time_grid, workers, max_trace_deficit)
    reduced = run(current)
    history = []
    while True:
        finer_trunc = _raised(current, fock_step)
        finer = run(finer_trunc)
        change = float(np.max(np.abs(finer - reduced)))
        history.append((finer_trunc.fock_dim, change))
        print(f"⚙️ fock_dim {current.fock_dim} -> {finer_trunc.fock_dim}: max change {change:.3e}",
              file=sys.stderr)
        if change < tolerance:
            return finer, TruncationConvergence(finer_trunc, change, tuple(history))
        current, reduced = finer_trunc, finer


# ============================================================================
# Effective-theory validation
# ============================================================================

@dataclass(frozen=True)
class SwapFit:
    kappa: float
    amplitude: float
    rms_residual: float


def fit_swap_rate(times: Sequence[float], p01: Sequence[float]) -> SwapFit:
    """Least-squares fit of P_01(t) = A sin^2(2 kappa t); kappa >= 0"""
    times = np.asarray(times, dtype=float)
    p01 = np.asarray(p01, dtype=float)
    if times.size < 4 or times.shape != p01.shape:
        raise ValueError("need at least 4 matching samples to fit a swap rate")
    if np.max(p01) < FIT_MIN_TRANSFER:
        return SwapFit(kappa=0.0, amplitude=0.0, rms_residual=float(np.sqrt(np.mean(p01 ** 2))))

    span = times[-1] - times[0]
    dt = np.min(np.diff(times))
    candidates = np.geomspace(1.0 / (16.0 * span), np.pi / (4.0 * dt), 4000)
    basis = np.sin(2.0 * np.outer(candidates, times)) ** 2
    amplitudes = (basis @ p01) / np.maximum(np.sum(basis ** 2, axis=1), np.finfo(float).tiny)
    residuals = np.sum((basis * amplitudes[:, None] - p01) ** 2, axis=1)
    best = int(np.argmin(residuals))

    model = lambda t, k, a: a * np.sin(2.0 * k * t) ** 2
    try:
        (k_fit, a_fit), _ = optimize.curve_fit(model, times, p01,
                                               p0=[candidates[best], amplitudes[best]])
    except RuntimeError as e:
        raise NumericalError('measure_kappa', 'swap-rate fit did not converge',
                             {'kappa_guess': float(candidates[best]), 'detail': str(e)})
    rms = float(np.sqrt(np.mean((model(times, k_fit, a_fit) - p01) ** 2)))
    if rms > FIT_RESIDUAL_TOL:
        raise NumericalError('measure_kappa', 'poor swap-rate fit',
                             {'rms_residual': rms, 'kappa': float(abs(k_fit)), 'amplitude': float(a_fit)})
    return SwapFit(kappa=float(abs(k_fit)), amplitude=float(a_fit), rms_residual=rms)


def swap_dynamics(spectrum: ModeSpectrum, trunc: TruncationSpec, delta: float, omega_0: float,
                  times: Sequence[float], workers: int = 1) -> Tuple[np.ndarray, SwapFit]:
    """Reduced states from |10> (x) vacuum at T = 0 and the swap-rate fit of P_01"""
    modes = spectrum.truncated(trunc.n_modes)
    induced = polaron_coupling(modes, modes.separation)
    if induced == 0 or abs(delta / induced) > DELTA_LAMBDA_WARNING:
        raise ValueError(f"measure_kappa needs Delta / lambda <= {DELTA_LAMBDA_WARNING} "
                         f"(Delta={delta}, lambda={induced})")
    times = np.asarray(times, dtype=float)
    reduced = simulate_reduced_dynamics(basis_ket('10'), modes, trunc, 0.0, delta, omega_0,
                                        times, workers=workers)
    return reduced, fit_swap_rate(times, reduced[:, 2, 2].real)


def measure_kappa(spectrum: ModeSpectrum, trunc: TruncationSpec, delta: float, omega_0: float,
                  t_max: float, n_points: int = 400, workers: int = 1) -> float:
    """
    Swap rate kappa_fit of |10> -> |01> under the full Hamiltonian from |10> (x) vacuum.

    Delta is compared with the induced Ising coupling of the simulated modes.
    """
    if t_max <= 0:
        raise ValueError(f"t_max must be > 0, got {t_max}")
    _, fit = swap_dynamics(spectrum, trunc, delta, omega_0, np.linspace(0.0, t_max, n_points), workers)
    return fit.kappa
