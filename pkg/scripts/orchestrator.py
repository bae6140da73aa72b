#!/usr/bin/env python3
"""
Ionbath Orchestrator
Command-line entry point. Routes each experiment kind to its runner, captures physics
warnings, and writes the CSV table plus a JSON summary into the output directory.
"""
import argparse
import dataclasses
import io
import json
import os
import sys
import tempfile
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from bath_kernels import (
    continuum_kernels,
    dfs_lifetime,
    gamma_pm,
    mode_sum_kernels,
)
from chain_model import (
    build_spectrum,
    coupling_lambda,
    describe_spectrum,
    displacement_amplitudes,
    exact_axial_modes,
    polaron_coupling,
)
from config_constants import (
    __version__,
    CSV_FLOAT_FORMAT,
    DEFAULT_WORKERS,
    SUMMARY_FILENAME,
    get_schema_id,
)
from dephasing import QubitPairState, basis_ket, dephase_trajectory, dfs_state, enhanced_state
from dfs_dynamics import (
    DfsParams,
    dfs_evolve,
    dfs_state_with_dephasing,
    dressing_overlap,
    entangling_time,
    kappa,
)
from exact_simulator import converged_reduced_dynamics, simulate_reduced_dynamics, swap_dynamics
from experiment_config import ExperimentConfig, load_config, parse_config, sweep_points
from quantum_info import (
    SIX_STATES,
    TARGET_RESOURCE,
    TeleportResource,
    average_teleport_fidelity,
    concurrence,
    dephased_resource,
    ideal_resource,
    monte_carlo_teleport_fidelity,
    relay_fidelity,
    six_state_fidelity,
    teleport_all_outcomes,
    teleport_channel,
    werner_resource,
)
from sim_errors import ConfigError, NumericalError, PhysicsValidityWarning

DEFAULT_TOLERANCE = 1e-8

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


@dataclasses.dataclass(frozen=True)
class RunOptions:
    workers: int = DEFAULT_WORKERS
    tolerance: float = DEFAULT_TOLERANCE


ExperimentResult = Tuple[pd.DataFrame, Dict[str, Any]]


# ============================================================================
# Shared helpers
# ============================================================================

def initial_ket(name: str) -> np.ndarray:
    """Qubit-pair ket for an initial_state config value"""
    if name == 'dfs':
        return (basis_ket('10') + basis_ket('01')) / np.sqrt(2.0)
    if name == 'enhanced':
        return (basis_ket('11') + basis_ket('00')) / np.sqrt(2.0)
    if name == 'plus_plus':
        return np.full(4, 0.5, dtype=complex)
    if name == '10':
        return basis_ket('10')
    raise ValueError(f"Unknown initial state {name!r}")


def initial_density(name: str) -> QubitPairState:
    if name == 'dfs':
        return dfs_state()
    if name == 'enhanced':
        return enhanced_state()
    return QubitPairState.from_ket(initial_ket(name))


def _separation(config: ExperimentConfig) -> float:
    override = config.section('kernels').get('separation')
    if override is not None:
        return float(override) * config.chain.ion_spacing_a
    return config.chain.separation


def resolve_lambda(config: ExperimentConfig) -> float:
    """Induced qubit-qubit coupling: explicit dfs.lambda, else derived from the chain"""
    if config.dfs is not None and config.dfs.lambda_ is not None:
        return config.dfs.lambda_
    if config.chain is None:
        raise ConfigError('required section missing (needed to derive dfs.lambda)', field='chain')
    spectrum = build_spectrum(config.chain)
    if config.dfs is not None and config.dfs.lambda_source == 'polaron':
        return polaron_coupling(spectrum, config.chain.separation)
    return coupling_lambda(spectrum, config.chain.separation)


def dfs_params(config: ExperimentConfig) -> DfsParams:
    return DfsParams(delta=config.dfs.delta, omega_0=config.dfs.omega_0, lambda_=resolve_lambda(config))


def build_kernels(config: ExperimentConfig, method: str):
    """Kernel table on the configured grid and the induced coupling entering its phases"""
    grid = config.time_grid.values()
    r = _separation(config)
    omega_0 = config.dfs.omega_0 if config.dfs is not None else 0.0
    n_modes = config.section('kernels').get('n_modes')
    if method == 'mode_sum':
        spectrum = build_spectrum(config.chain, n_modes)
        if config.dfs is not None and config.dfs.lambda_ is not None:
            lambda_ = config.dfs.lambda_
        else:
            lambda_ = coupling_lambda(spectrum, r)
        return mode_sum_kernels(spectrum, r, config.bath.temperature, grid, omega_0, lambda_), lambda_
    if config.dfs is not None and config.dfs.lambda_ is not None:
        lambda_ = config.dfs.lambda_
    else:
        lambda_ = coupling_lambda(build_spectrum(config.chain), r)
    return continuum_kernels(grid, r, config.bath, omega_0, lambda_), lambda_


def _physical_rates(config: ExperimentConfig, scalars: Dict[str, Any]) -> None:
    units = config.physical
    if units is None:
        return
    if 'kappa' in scalars:
        scalars['kappa_hz'] = abs(scalars['kappa']) * units.frequency_unit_hz
    if 'lambda' in scalars:
        scalars['lambda_hz'] = scalars['lambda'] * units.frequency_unit_hz
    if 't_star' in scalars:
        scalars['t_star_s'] = scalars['t_star'] * units.time_unit_s
    if 'tau_dfs' in scalars:
        scalars['tau_dfs_s'] = scalars['tau_dfs'] * units.time_unit_s


# ============================================================================
# Experiments
# ============================================================================

def run_modes(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    chain = config.chain
    spectrum = build_spectrum(chain, config.section('modes').get('n_modes'))
    describe_spectrum(spectrum)
    exact = exact_axial_modes(chain)
    frame = pd.DataFrame({
        'n': [mode.index for mode in spectrum.modes],
        'omega': spectrum.frequencies,
        'omega_exact': exact[:len(spectrum)],
        'wavenumber': spectrum.wavenumbers,
        'g1_re': spectrum.couplings[:, 0].real,
        'g1_im': spectrum.couplings[:, 0].imag,
        'g2_re': spectrum.couplings[:, 1].real,
        'g2_im': spectrum.couplings[:, 1].imag,
        'displacement': displacement_amplitudes(spectrum),
    })
    frame['rel_deviation'] = np.abs(frame['omega_exact'] - frame['omega']) / frame['omega']
    lowest = frame['rel_deviation'].iloc[:3]
    scalars = {
        'n_modes': len(spectrum),
        'separation': chain.separation,
        'lambda': coupling_lambda(spectrum, chain.separation),
        'polaron_coupling': polaron_coupling(spectrum, chain.separation),
        'max_rel_deviation_lowest3': float(lowest.max()),
    }
    return frame, scalars


def run_kernels(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    method = config.section('kernels').get('method', 'continuum')
    kernels, lambda_ = build_kernels(config, method)
    frame = kernels.to_frame()
    bath = config.bath
    r = _separation(config)
    scalars = {
        'method': method,
        'separation': r,
        'eta': bath.eta,
        'gamma_max': float(kernels.gamma.max()),
        'gamma_plus_max': float(kernels.gamma_plus.max()),
        'gamma_minus_max': float(kernels.gamma_minus.max()),
    }
    if method == 'continuum' and bath.temperature == 0:
        # Zero-temperature closed forms (eta/2) ln(1 + w_c^2 t^2) and eta arctan(w_c t);
        # errors are relative once the reference exceeds 1
        t = kernels.time_grid
        reference = 0.5 * bath.eta * np.log1p((bath.omega_c * t) ** 2)
        phase_ref = bath.eta * np.arctan(bath.omega_c * t)
        phase = 0.5 * (kernels.phi_plus - kernels.phi_minus) - 2.0 * lambda_ * t
        errors = np.concatenate([
            np.abs(kernels.gamma - reference) / np.maximum(np.abs(reference), 1.0),
            np.abs(phase - phase_ref) / np.maximum(np.abs(phase_ref), 1.0),
        ])
        scalars['closed_form_max_error'] = float(errors.max())
        scalars['closed_form_passed'] = bool(errors.max() <= options.tolerance)
    if method == 'continuum' and bath.temperature > 0 and r > 0:
        lifetime = dfs_lifetime(bath, r, config.chain.chain_length, config.chain.omega_z)
        scalars['tau_dfs'] = lifetime.tau
        scalars['tau_dfs_estimate'] = lifetime.estimate
        scalars['gamma_minus_plateau'] = lifetime.plateau
    _physical_rates(config, scalars)
    return frame, scalars


def run_dephase(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    section = config.section('dephase')
    kernels, _ = build_kernels(config, section['method'])
    rho0 = initial_density(section['initial_state'])
    omega_0 = config.dfs.omega_0 if config.dfs is not None else 0.0
    frame = dephase_trajectory(rho0, kernels, omega_0)
    last = frame.iloc[-1]
    scalars = {
        'initial_state': section['initial_state'],
        'method': section['method'],
        'final_rho23_abs': float(last['rho23_abs']),
        'final_rho14_abs': float(last['rho14_abs']),
    }
    return frame, scalars


def run_dfs(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    params = dfs_params(config)
    t_star = entangling_time(params)
    if config.time_grid is not None:
        times = config.time_grid.values()
    else:
        times = np.linspace(0.0, 2.0 * t_star, 201)
    rows = []
    for t in times:
        psi = dfs_evolve(t, params)
        rho = QubitPairState.from_ket(psi)
        rows.append({
            't': t,
            'p10': abs(psi[1]) ** 2,
            'p01': abs(psi[2]) ** 2,
            'rho23_re': rho.rho[1, 2].real,
            'rho23_im': rho.rho[1, 2].imag,
            'concurrence': concurrence(rho),
            'target_fidelity': abs(np.vdot(TARGET_RESOURCE, psi)) ** 2,
        })
    frame = pd.DataFrame(rows)
    psi_star = dfs_evolve(t_star, params)
    scalars = {
        'lambda': params.lambda_,
        'delta': params.delta,
        'omega_0': params.omega_0,
        'kappa': params.kappa,
        't_star': t_star,
        'concurrence_at_t_star': concurrence(QubitPairState.from_ket(psi_star)),
        'fidelity_at_t_star': abs(np.vdot(TARGET_RESOURCE, psi_star)) ** 2,
    }
    if config.chain is not None:
        temperature = config.bath.temperature if config.bath is not None else 0.0
        scalars['dressing_overlap'] = dressing_overlap(build_spectrum(config.chain), temperature)
    if config.bath is not None and config.chain is not None:
        r = config.chain.separation
        config.bath.check_regime(params.delta)
        scalars['gamma_minus_at_t_star'] = gamma_pm(t_star, r, config.bath)[1]
        if config.bath.temperature > 0 and r > 0:
            lifetime = dfs_lifetime(config.bath, r, config.chain.chain_length, config.chain.omega_z)
            scalars['tau_dfs'] = lifetime.tau
            scalars['gamma_minus_plateau'] = lifetime.plateau
    _physical_rates(config, scalars)
    return frame, scalars


def _coherence_columns(reduced: np.ndarray) -> Dict[str, np.ndarray]:
    return {
        'p11': reduced[:, 0, 0].real,
        'p10': reduced[:, 1, 1].real,
        'p01': reduced[:, 2, 2].real,
        'p00': reduced[:, 3, 3].real,
        'rho12_abs': np.abs(reduced[:, 0, 1]),
        'rho23_abs': np.abs(reduced[:, 1, 2]),
        'rho14_abs': np.abs(reduced[:, 0, 3]),
    }


def run_exact(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    section = config.section('exact')
    trunc = config.truncation
    spectrum = build_spectrum(config.chain).truncated(trunc.n_modes)
    r = config.chain.separation
    delta = config.dfs.delta if config.dfs is not None else 0.0
    omega_0 = config.dfs.omega_0 if config.dfs is not None else 0.0

    if section['mode'] == 'kappa':
        induced = polaron_coupling(spectrum, r)
        theory = kappa(induced, delta, omega_0)
        t_max = section['t_max'] or 1.25 * np.pi / (4.0 * abs(theory))
        times = np.linspace(0.0, t_max, section['n_points'])
        reduced, fit = swap_dynamics(spectrum, trunc, delta, omega_0, times, options.workers)
        frame = pd.DataFrame({'t': times, **_coherence_columns(reduced)})
        scalars = {
            'mode': 'kappa',
            'lambda': induced,
            'kappa_theory': theory,
            'kappa_fit': fit.kappa,
            'kappa_ratio': fit.kappa / abs(theory),
            'fit_amplitude': fit.amplitude,
            'fit_rms_residual': fit.rms_residual,
            # vacuum overlap of the polaron dressing, exp(-sum |g/w|^2)
            'franck_condon_factor': float(np.exp(-np.sum(displacement_amplitudes(spectrum) ** 2))),
        }
        return frame, scalars

    temperature = section['temperature']
    if temperature is None:
        temperature = config.bath.temperature if config.bath is not None else 0.0
    times = config.time_grid.values()
    ket = initial_ket(section['initial_state'])
    kwargs = {}
    if section['max_trace_deficit'] is not None:
        kwargs['max_trace_deficit'] = section['max_trace_deficit']
    scalars = {'mode': 'dephasing', 'temperature': temperature}
    if section['converge']:
        reduced, convergence = converged_reduced_dynamics(
            ket, spectrum, trunc, temperature, delta, omega_0, times, workers=options.workers,
            tolerance=section['converge_tol'], **kwargs)
        trunc = convergence.trunc
        scalars['truncation_change'] = convergence.change
    else:
        reduced = simulate_reduced_dynamics(ket, spectrum, trunc, temperature, delta, omega_0,
                                            times, workers=options.workers, **kwargs)
    scalars['fock_dim'] = trunc.fock_dim
    scalars['dimension'] = trunc.dimension
    frame = pd.DataFrame({'t': times, **_coherence_columns(reduced)})
    if delta == 0:
        laws = mode_sum_kernels(spectrum, r, temperature, times, omega_0)
        rho0 = np.outer(ket, ket.conj())
        frame['rho23_law'] = abs(rho0[1, 2]) * np.exp(-2.0 * laws.gamma_minus)
        frame['rho14_law'] = abs(rho0[0, 3]) * np.exp(-2.0 * laws.gamma_plus)
        deviation = max(np.max(np.abs(frame['rho23_abs'] - frame['rho23_law'])),
                        np.max(np.abs(frame['rho14_abs'] - frame['rho14_law'])))
        scalars['max_law_deviation'] = float(deviation)
        scalars['law_agreement'] = bool(deviation <= options.tolerance)
    return frame, scalars


def build_resource(config: ExperimentConfig) -> TeleportResource:
    section = config.section('teleport')
    kind = section['resource']
    if kind == 'ideal':
        return ideal_resource()
    if kind == 'werner':
        return werner_resource(section['werner_p'])
    if kind == 'dephased':
        return dephased_resource(section['coherence_factor'])
    params = dfs_params(config)
    t_star = entangling_time(params)
    gamma_minus = gamma_pm(t_star, config.chain.separation, config.bath)[1]
    return TeleportResource(dfs_state_with_dephasing(t_star, params, gamma_minus))


def run_teleport(config: ExperimentConfig, options: RunOptions) -> ExperimentResult:
    section = config.section('teleport')
    resource = build_resource(config)
    channel = teleport_channel(resource)
    rows = []
    composed = np.eye(4, dtype=complex)
    for hop in range(1, section['n_hops'] + 1):
        composed = channel @ composed
        rows.append({
            'hop': hop,
            'relay_fidelity': relay_fidelity(hop, resource),
            'six_state_fidelity': six_state_fidelity(composed),
        })
    frame = pd.DataFrame(rows)

    mean, stderr = monte_carlo_teleport_fidelity(resource, section['n_samples'], config.rng_seed)
    closed_form = average_teleport_fidelity(resource)
    worst = min(
        float(np.real(np.vdot(psi, record['output'] @ psi)))
        for psi in SIX_STATES
        for record in teleport_all_outcomes(psi, resource)
        if record['probability'] > 0
    )
    scalars = {
        'resource': section['resource'],
        'singlet_fraction': resource.singlet_fraction,
        'concurrence': concurrence(resource.rho),
        'average_fidelity': closed_form,
        'monte_carlo_fidelity': mean,
        'monte_carlo_stderr': stderr,
        'monte_carlo_sigma': abs(mean - closed_form) / stderr if stderr > 0 else 0.0,
        'worst_outcome_fidelity': worst,
        'n_samples': section['n_samples'],
    }
    return frame, scalars


# Experiment Registry
EXPERIMENTS: Dict[str, Dict[str, Any]] = {
    'modes': {
        'name': 'Axial mode spectrum',
        'runner': run_modes,
        'outputs': ['omega', 'omega_exact', 'couplings'],
    },
    'kernels': {
        'name': 'Decoherence kernels',
        'runner': run_kernels,
        'outputs': ['gamma', 'gamma_plus', 'gamma_minus', 'phi_plus', 'phi_minus'],
    },
    'dephase': {
        'name': 'Pure-dephasing dynamics',
        'runner': run_dephase,
        'outputs': ['populations', 'coherences'],
    },
    'dfs': {
        'name': 'DFS entanglement generation',
        'runner': run_dfs,
        'outputs': ['kappa', 't_star', 'concurrence'],
    },
    'exact': {
        'name': 'Exact spin-boson simulation',
        'runner': run_exact,
        'outputs': ['coherences', 'kappa_fit'],
    },
    'teleport': {
        'name': 'Teleportation relay',
        'runner': run_teleport,
        'outputs': ['relay_fidelity', 'monte_carlo_fidelity'],
    },
}


# ============================================================================
# Sweeps
# ============================================================================

def _cell(value: Any) -> Any:
    if isinstance(value, (list, tuple, dict)):
        return json.dumps(value, sort_keys=True)
    return value


def _run_point(args) -> Tuple[Dict[str, Any], List[str]]:
    index, values, raw, options = args
    row: Dict[str, Any] = {'point': '-'.join(str(i) for i in index)}
    row.update({name: _cell(value) for name, value in values.items()})
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter('always', PhysicsValidityWarning)
        try:
            config = parse_config(raw)
            _, scalars = EXPERIMENTS[config.kind]['runner'](config, options)
            row['status'] = 'ok'
            row['reason'] = ''
            row.update({f"result.{key}": value for key, value in scalars.items()})
        except Exception as e:
            row['status'] = 'failed'
            row['reason'] = f"{type(e).__name__}: {e}"
    notes = [f"point {row['point']}: {w.message}" for w in caught
             if issubclass(w.category, PhysicsValidityWarning)]
    return row, notes


def run_sweep(config: ExperimentConfig, options: RunOptions) -> Tuple[pd.DataFrame, Dict[str, Any], List[str]]:
    """One row per grid point in lexicographic order; failing points become failed rows"""
    points = sweep_points(config)
    inner = dataclasses.replace(options, workers=1)
    jobs = [(index, values, raw, inner) for index, values, raw in points]
    print(f"🧭 sweep: {len(jobs)} points of {config.sweep_experiment}, workers={options.workers}",
          file=sys.stderr)
    if options.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=options.workers) as pool:
            results = list(pool.map(_run_point, jobs))
    else:
        results = [_run_point(job) for job in jobs]

    rows = [row for row, _ in results]
    notes = [note for _, point_notes in results for note in point_notes]
    leading = ['point'] + [axis.parameter for axis in config.sweep_axes] + ['status', 'reason']
    result_columns = sorted({key for row in rows for key in row if key not in leading})
    frame = pd.DataFrame(rows, columns=leading + result_columns)
    failed = int((frame['status'] == 'failed').sum())
    scalars = {
        'experiment': config.sweep_experiment,
        'n_points': len(rows),
        'n_failed': failed,
        'axes': {axis.parameter: list(axis.values) for axis in config.sweep_axes},
    }
    return frame, scalars, notes


# ============================================================================
# Output
# ============================================================================

def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if np.isfinite(value) else str(value)
    return value


def render_csv(frame: pd.DataFrame, kind: str) -> str:
    """Schema comment line followed by the table, LF line endings, 17 significant digits"""
    buffer = io.StringIO()
    buffer.write(f"# schema: {get_schema_id(kind)}\n")
    frame.to_csv(buffer, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator='\n')
    return buffer.getvalue()


class OutputStore:
    """Atomic writes confined to one output directory"""

    def __init__(self, out_dir: str):
        self.out_dir = Path(out_dir).resolve()
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def write_text(self, name: str, text: str) -> Path:
        file_path = self.out_dir / name
        try:
            file_path.resolve().relative_to(self.out_dir)
        except ValueError:
            raise ValueError(f"Refusing to write outside {self.out_dir}: {name}")
        tmp_path = None
        try:
            with tempfile.NamedTemporaryFile(mode='w', encoding='utf-8', newline='',
                                             dir=self.out_dir, delete=False) as tmp:
                tmp.write(text)
                tmp_path = tmp.name
            os.replace(tmp_path, file_path)
        except Exception:
            if tmp_path is not None and os.path.exists(tmp_path):
                os.unlink(tmp_path)
            raise
        return file_path


# ============================================================================
# Orchestration
# ============================================================================

class Orchestrator:
    """Routes experiment kinds to their runners and writes their outputs"""

    def __init__(self, options: Optional[RunOptions] = None):
        self.options = options or RunOptions()

    def route(self, kind: str) -> Callable[[ExperimentConfig, RunOptions], ExperimentResult]:
        if kind not in EXPERIMENTS:
            raise ValueError(f"Unknown experiment kind: {kind}")
        return EXPERIMENTS[kind]['runner']

    def execute(self, config: ExperimentConfig) -> Tuple[pd.DataFrame, Dict[str, Any], List[str]]:
        """Run one experiment; returns (table, scalars, warning messages)"""
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter('always', PhysicsValidityWarning)
            if config.kind == 'sweep':
                frame, scalars, notes = run_sweep(config, self.options)
            else:
                frame, scalars = self.route(config.kind)(config, self.options)
                notes = []
        messages = [str(w.message) for w in caught if issubclass(w.category, PhysicsValidityWarning)]
        for message in messages + notes:
            print(f"⚠️ {message}", file=sys.stderr)
        return frame, scalars, messages + notes

    def run(self, config: ExperimentConfig, out_dir: Optional[str] = None) -> Dict[str, Path]:
        frame, scalars, notes = self.execute(config)
        store = OutputStore(out_dir or config.output_dir)
        csv_path = store.write_text(f"{config.kind}.csv", render_csv(frame, config.kind))
        summary = {
            'kind': config.kind,
            'schema': get_schema_id(config.kind),
            'version': __version__,
            'seed': config.rng_seed,
            'config': config.raw,
            'results': scalars,
            'warnings': notes,
            'csv': csv_path.name,
        }
        text = json.dumps(_jsonable(summary), indent=2, sort_keys=True) + '\n'
        summary_path = store.write_text(SUMMARY_FILENAME, text)
        print(f"✅ {config.kind}: wrote {csv_path.name} ({len(frame)} rows) and {summary_path.name}",
              file=sys.stderr)
        return {'csv': csv_path, 'summary': summary_path}


# ============================================================================
# Command line
# ============================================================================

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='orchestrator.py',
                                     description='Two-qubit ion-chain spin-boson experiments')
    parser.add_argument('--version', action='version', version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in list(EXPERIMENTS) + ['sweep', 'validate']:
        sub = subparsers.add_parser(command)
        sub.add_argument('--config', required=True, help='JSON experiment file')
        sub.add_argument('--out', default=None, help='output directory (default: output.dir)')
        sub.add_argument('--seed', type=int, default=None, help='override rng_seed')
        sub.add_argument('--workers', type=int, default=DEFAULT_WORKERS)
        sub.add_argument('--tolerance', type=float, default=DEFAULT_TOLERANCE,
                         help='agreement threshold for closed-form and oracle checks')
    return parser


def _apply_overrides(config: ExperimentConfig, args) -> ExperimentConfig:
    if args.seed is not None:
        if not 0 <= args.seed < 2 ** 64:
            raise ConfigError('must be a 64-bit unsigned integer', field='--seed')
        config = dataclasses.replace(config, rng_seed=args.seed)
    if args.workers < 1:
        raise ConfigError('must be >= 1', field='--workers')
    if not args.tolerance > 0:
        raise ConfigError('must be > 0', field='--tolerance')
    if args.command not in ('validate', config.kind):
        raise ConfigError(f"config kind {config.kind!r} does not match subcommand {args.command!r}",
                          field='kind')
    return config


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = _apply_overrides(load_config(args.config), args)
        if args.command == 'validate':
            print("✅ config valid", file=sys.stderr)
            return EXIT_OK
        print(f"🎭 Orchestrator running: {EXPERIMENTS.get(config.kind, {}).get('name', config.kind)}",
              file=sys.stderr)
        orchestrator = Orchestrator(RunOptions(workers=args.workers, tolerance=args.tolerance))
        orchestrator.run(config, args.out)
        return EXIT_OK
    except NumericalError as e:
        print(f"❌ numerical failure in {e.operation}: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ConfigError as e:
        print(f"❌ config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        print(f"❌ invalid parameters: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as e:
        print(f"❌ Unexpected error: {e}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
