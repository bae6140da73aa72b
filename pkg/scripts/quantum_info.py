#!/usr/bin/env python3
"""
Quantum Information Metrics
Concurrence, fidelities and the teleportation channel that relays a qubit along the
chain using (|10> + i|01>) / sqrt 2 pairs. Single-qubit basis order is (|1>, |0>).
"""
from dataclasses import dataclass, field
from typing import Dict, List, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from config_constants import MONTE_CARLO_SAMPLES
from dephasing import QubitPairState, basis_ket

SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SPIN_FLIP = np.kron(SIGMA_Y, SIGMA_Y)
TARGET_RESOURCE = (basis_ket('10') + 1j * basis_ket('01')) / np.sqrt(2.0)

BELL_STATES: Dict[str, np.ndarray] = {
    'phi_plus': (basis_ket('00') + basis_ket('11')) / np.sqrt(2.0),
    'phi_minus': (basis_ket('00') - basis_ket('11')) / np.sqrt(2.0),
    'psi_plus': (basis_ket('01') + basis_ket('10')) / np.sqrt(2.0),
    'psi_minus': (basis_ket('01') - basis_ket('10')) / np.sqrt(2.0),
}
BELL_LABELS = tuple(BELL_STATES)

# Six single-qubit states of three mutually unbiased bases, order (|1>, |0>)
SIX_STATES = [
    np.array([1, 0], dtype=complex),
    np.array([0, 1], dtype=complex),
    np.array([1, 1], dtype=complex) / np.sqrt(2.0),
    np.array([1, -1], dtype=complex) / np.sqrt(2.0),
    np.array([1, 1j], dtype=complex) / np.sqrt(2.0),
    np.array([1, -1j], dtype=complex) / np.sqrt(2.0),
]


def bell_states() -> Dict[str, np.ndarray]:
    return {label: ket.copy() for label, ket in BELL_STATES.items()}


def _as_matrix(rho) -> np.ndarray:
    return rho.rho if isinstance(rho, QubitPairState) else np.asarray(rho, dtype=complex)


def partial_trace(rho: np.ndarray, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Trace out every subsystem not listed in keep"""
    dims = list(dims)
    n = len(dims)
    keep = sorted(keep)
    tensor = np.asarray(rho, dtype=complex).reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    for offset, axis in enumerate(traced):
        current = n - offset
        tensor = np.trace(tensor, axis1=axis - offset, axis2=axis - offset + current)
    size = int(np.prod([dims[i] for i in keep])) if keep else 1
    return tensor.reshape(size, size)


def purity(rho) -> float:
    m = _as_matrix(rho)
    return float(np.real(np.trace(m @ m)))


def von_neumann_entropy(rho) -> float:
    """Entropy in bits"""
    evals = linalg.eigvalsh(_as_matrix(rho))
    evals = evals[evals > 1e-15]
    return float(-np.sum(evals * np.log2(evals)))


def concurrence(rho) -> float:
    """Wootters concurrence C = max(0, mu_1 - mu_2 - mu_3 - mu_4)"""
    m = _as_matrix(rho)
    evals, evecs = linalg.eigh(0.5 * (m + m.conj().T))
    mask = evals > 1e-14
    # rho = W W^dagger; the mu_i are the singular values of W^T (Y x Y) W
    w = evecs[:, mask] * np.sqrt(evals[mask])
    mu = np.zeros(4)
    if w.shape[1]:
        values = linalg.svdvals(w.T @ SPIN_FLIP @ w)
        mu[:values.size] = np.sort(values)[::-1]
    return float(max(0.0, mu[0] - mu[1] - mu[2] - mu[3]))


def state_fidelity(rho, target) -> float:
    """<target|rho|target> for a normalized pure target"""
    t = np.asarray(target, dtype=complex).ravel()
    if abs(np.linalg.norm(t) - 1.0) > 1e-12:
        raise ValueError("target state must be normalized")
    return float(np.real(np.vdot(t, _as_matrix(rho) @ t)))


def haar_random_qubit(rng: np.random.Generator) -> np.ndarray:
    z = rng.standard_normal(2) + 1j * rng.standard_normal(2)
    return z / np.linalg.norm(z)


# ============================================================================
# Teleportation
# ============================================================================

def _bell_amplitudes(resource_ket: np.ndarray) -> Dict[str, np.ndarray]:
    # X_k[a, c] = sum_b conj(beta_k[a, b]) T[b, c]; the outcome-k output is X_k^T psi
    t = resource_ket.reshape(2, 2)
    return {label: np.conj(beta.reshape(2, 2)) @ t for label, beta in BELL_STATES.items()}


def correction_table(target_state: np.ndarray = TARGET_RESOURCE) -> Dict[str, np.ndarray]:
    """Unitary applied to the receiving qubit after each Bell outcome"""
    table = {}
    for label, kraus in _bell_amplitudes(np.asarray(target_state, dtype=complex)).items():
        # With the ideal resource each outcome map is a unitary scaled by 1/2
        table[label] = (2.0 * kraus.T).conj().T
    return table


@dataclass(frozen=True, eq=False)
class TeleportResource:
    """Entangled pair used for one hop, with the ideal pair its corrections assume"""
    rho: QubitPairState
    target_state: np.ndarray = field(default_factory=lambda: TARGET_RESOURCE.copy())

    def __post_init__(self):
        if not isinstance(self.rho, QubitPairState):
            object.__setattr__(self, 'rho', QubitPairState(self.rho))
        target = np.asarray(self.target_state, dtype=complex).reshape(4)
        if abs(np.linalg.norm(target) - 1.0) > 1e-12:
            raise ValueError("target_state must be normalized")
        object.__setattr__(self, 'target_state', target)
        object.__setattr__(self, 'corrections', correction_table(target))
        fraction = self.singlet_fraction
        if not -1e-12 <= fraction <= 1.0 + 1e-12:
            raise ValueError(f"singlet fraction {fraction} outside [0, 1]")

    @property
    def singlet_fraction(self) -> float:
        return state_fidelity(self.rho, self.target_state)


def ideal_resource() -> TeleportResource:
    return TeleportResource(QubitPairState.from_ket(TARGET_RESOURCE))


def werner_resource(p: float) -> TeleportResource:
    """p |T><T| + (1 - p) I / 4"""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"Werner weight must be in [0, 1], got {p}")
    rho = p * np.outer(TARGET_RESOURCE, TARGET_RESOURCE.conj()) + (1.0 - p) * np.eye(4) / 4.0
    return TeleportResource(QubitPairState(rho))


def dephased_resource(coherence_factor: float) -> TeleportResource:
    """|T><T| with its |10><01| coherence scaled by coherence_factor, e.g. exp(-2 Gamma_-)"""
    if not 0.0 <= coherence_factor <= 1.0:
        raise ValueError(f"coherence factor must be in [0, 1], got {coherence_factor}")
    rho = np.outer(TARGET_RESOURCE, TARGET_RESOURCE.conj())
    rho[1, 2] *= coherence_factor
    rho[2, 1] *= coherence_factor
    return TeleportResource(QubitPairState(rho))


def _conditional_outputs(rho_in: np.ndarray, resource: TeleportResource) -> Dict[str, np.ndarray]:
    # Unnormalized receiver state C_k <beta_k| rho_in (x) rho_res |beta_k> C_k^dagger
    total = np.kron(rho_in, resource.rho.rho).reshape(4, 2, 4, 2)
    outputs = {}
    for label, beta in BELL_STATES.items():
        sigma = np.einsum('i,icjd,j->cd', beta.conj(), total, beta)
        c = resource.corrections[label]
        outputs[label] = c @ sigma @ c.conj().T
    return outputs


def teleport_all_outcomes(input_state, resource: TeleportResource) -> List[Dict]:
    """Every Bell outcome with its probability and corrected output"""
    psi = np.asarray(input_state, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    records = []
    for label, unnormalized in _conditional_outputs(np.outer(psi, psi.conj()), resource).items():
        p = float(np.real(np.trace(unnormalized)))
        output = unnormalized / p if p > 0 else np.zeros((2, 2), dtype=complex)
        records.append({'outcome': label, 'probability': p, 'output': output})
    return records


def teleport(input_state, resource: TeleportResource,
             rng_seed: Union[int, np.random.Generator, None] = None) -> Tuple[np.ndarray, Dict]:
    """
    One teleportation hop with a sampled Bell outcome.

    Returns:
        (2x2 output density matrix, outcome record with label, index and probability)
    """
    rng = np.random.default_rng(rng_seed)
    records = teleport_all_outcomes(input_state, resource)
    probs = np.array([r['probability'] for r in records])
    probs = np.clip(probs, 0.0, None)
    index = int(rng.choice(len(records), p=probs / probs.sum()))
    chosen = records[index]
    return chosen['output'], {'outcome': chosen['outcome'], 'index': index,
                              'probability': chosen['probability']}


def teleport_channel(resource: TeleportResource) -> np.ndarray:
    """Outcome-averaged hop as a 4x4 Liouville matrix acting on row-major vec(rho)"""
    channel = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            unit = np.zeros((2, 2), dtype=complex)
            unit[i, j] = 1.0
            image = sum(_conditional_outputs(unit, resource).values())
            channel[:, 2 * i + j] = image.reshape(4)
    return channel


def apply_channel(channel: np.ndarray, rho: np.ndarray) -> np.ndarray:
    return (channel @ np.asarray(rho, dtype=complex).reshape(4)).reshape(2, 2)


def channel_average_fidelity(channel: np.ndarray) -> float:
    """Haar-average fidelity (2 F_e + 1) / 3 with F_e = Tr(S) / 4"""
    return float((np.real(np.trace(channel)) + 2.0) / 6.0)


def six_state_fidelity(channel: np.ndarray) -> float:
    """Average fidelity over the six mutually unbiased basis states"""
    total = 0.0
    for psi in SIX_STATES:
        out = apply_channel(channel, np.outer(psi, psi.conj()))
        total += np.real(np.vdot(psi, out @ psi))
    return float(total / len(SIX_STATES))


def average_teleport_fidelity(resource: TeleportResource) -> float:
    """(2F + 1) / 3 with F the overlap of the resource with its target pair"""
    return (2.0 * resource.singlet_fraction + 1.0) / 3.0


def monte_carlo_teleport_fidelity(resource: TeleportResource, n_samples: int = MONTE_CARLO_SAMPLES,
                                  seed: Union[int, None] = None) -> Tuple[float, float]:
    """Mean and standard error of the fidelity over Haar-random inputs and sampled outcomes"""
    if n_samples < 2:
        raise ValueError(f"n_samples must be >= 2, got {n_samples}")
    rng = np.random.default_rng(seed)
    fidelities = np.empty(n_samples)
    for k in range(n_samples):
        psi = haar_random_qubit(rng)
        output, _ = teleport(psi, resource, rng)
        fidelities[k] = np.real(np.vdot(psi, output @ psi))
    return float(fidelities.mean()), float(fidelities.std(ddof=1) / np.sqrt(n_samples))


def relay_fidelity(n_hops: int,
                   per_hop_resource: Union[TeleportResource, Sequence[TeleportResource]]) -> float:
    """Average fidelity after composing n_hops teleportation channels"""
    if n_hops < 1:
        raise ValueError(f"n_hops must be >= 1, got {n_hops}")
    if isinstance(per_hop_resource, TeleportResource):
        resources = [per_hop_resource] * n_hops
    else:
        resources = list(per_hop_resource)
        if len(resources) != n_hops:
            raise ValueError(f"expected {n_hops} per-hop resources, got {len(resources)}")
    total = np.eye(4, dtype=complex)
    for resource in resources:
        total = teleport_channel(resource) @ total
    return channel_average_fidelity(total)
