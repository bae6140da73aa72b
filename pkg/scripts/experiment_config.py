#!/usr/bin/env python3
"""
Experiment Configuration
Loads JSON experiment files, converts the optional physical-units block to the
dimensionless units used everywhere else (hbar = 1, omega_z = 1, a = 1) and validates
every sub-config before any computation starts.
"""
import copy
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy import constants

from bath_kernels import BathParams, KERNEL_METHODS, default_dispersion_velocity
from chain_model import ChainConfig, WAVENUMBER_CONVENTIONS
from config_constants import CONVERGENCE_TOL, CSV_SCHEMAS, DEFAULT_SEED, get_time_grid
from exact_simulator import TruncationSpec
from sim_errors import ConfigError

EXPERIMENT_KINDS = tuple(CSV_SCHEMAS)
INITIAL_STATES = ('dfs', 'enhanced', 'plus_plus', '10')
RESOURCE_KINDS = ('ideal', 'werner', 'dephased', 'generated')
EXACT_MODES = ('dephasing', 'kappa')
LAMBDA_SOURCES = ('chain', 'polaron')
MAX_SEED = 2 ** 64 - 1

_MISSING = object()


# ============================================================================
# Typed sections
# ============================================================================

@dataclass(frozen=True)
class TimeGrid:
    t_start: float
    t_end: float
    n_points: int
    spacing: str = 'linear'

    def values(self) -> np.ndarray:
        return get_time_grid(self.t_start, self.t_end, self.n_points, self.spacing)


@dataclass(frozen=True)
class DfsSettings:
    delta: float
    omega_0: float
    lambda_: Optional[float] = None
    lambda_source: str = 'chain'


@dataclass(frozen=True)
class SweepAxis:
    parameter: str
    values: Tuple[Any, ...]


@dataclass(frozen=True)
class PhysicalUnits:
    axial_frequency_mhz: float

    @property
    def frequency_unit_hz(self) -> float:
        """Ordinary frequency corresponding to one dimensionless frequency unit"""
        return self.axial_frequency_mhz * 1e6

    @property
    def time_unit_s(self) -> float:
        """Seconds per dimensionless time unit 1 / omega_z"""
        return 1.0 / (2.0 * np.pi * self.frequency_unit_hz)


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    kind: str
    raw: Dict[str, Any]
    chain: Optional[ChainConfig] = None
    bath: Optional[BathParams] = None
    dfs: Optional[DfsSettings] = None
    truncation: Optional[TruncationSpec] = None
    time_grid: Optional[TimeGrid] = None
    sweep_experiment: Optional[str] = None
    sweep_axes: Tuple[SweepAxis, ...] = ()
    rng_seed: int = DEFAULT_SEED
    output_dir: str = 'results'
    physical: Optional[PhysicalUnits] = None
    sections: Dict[str, Dict[str, Any]] = field(default_factory=dict)

    def section(self, name: str) -> Dict[str, Any]:
        return self.sections.get(name, {})


# ============================================================================
# Field access with line-precise errors
# ============================================================================

def _line_of(text: str, dotted: str) -> Optional[int]:
    """Line of the last key of a dotted path, searching keys in document order"""
    if not text:
        return None
    position, line = 0, None
    for key in dotted.split('.'):
        if key.isdigit():
            continue
        match = re.compile(r'"' + re.escape(key) + r'"\s*:').search(text, position)
        if not match:
            return line
        position = match.end()
        line = text.count('\n', 0, match.start()) + 1
    return line


class _Fields:
    """Typed reader over one JSON object"""

    def __init__(self, data: Any, path: str, text: str):
        self.path = path
        self.text = text
        if not isinstance(data, dict):
            raise self.error(None, f"expected an object, got {type(data).__name__}")
        self.data = data

    def _dotted(self, name: Optional[str]) -> str:
        if name is None:
            return self.path
        return f"{self.path}.{name}" if self.path else name

    def error(self, name: Optional[str], message: str) -> ConfigError:
        dotted = self._dotted(name)
        return ConfigError(message, field=dotted or None, line=_line_of(self.text, dotted))

    def reject_unknown(self, allowed) -> None:
        for key in self.data:
            if key not in allowed:
                raise self.error(key, f"unknown field (allowed: {', '.join(sorted(allowed))})")

    def get(self, name: str, kind=float, default=_MISSING, choices=None, check=None,
            message: str = 'invalid value'):
        if name not in self.data or self.data[name] is None:
            if default is _MISSING:
                raise self.error(name, 'required field missing')
            return default
        value = self.data[name]
        if kind is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise self.error(name, f"expected a number, got {value!r}")
            value = float(value)
            if not np.isfinite(value):
                raise self.error(name, 'must be finite')
        elif kind is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise self.error(name, f"expected an integer, got {value!r}")
        elif kind is str:
            if not isinstance(value, str):
                raise self.error(name, f"expected a string, got {value!r}")
        elif kind is bool:
            if not isinstance(value, bool):
                raise self.error(name, f"expected true/false, got {value!r}")
        elif kind is list:
            if not isinstance(value, list):
                raise self.error(name, f"expected a list, got {value!r}")
        if choices is not None and value not in choices:
            raise self.error(name, f"must be one of {list(choices)}, got {value!r}")
        if check is not None and not check(value):
            raise self.error(name, message)
        return value

    def child(self, name: str, required: bool = True) -> Optional['_Fields']:
        if name not in self.data:
            if required:
                raise self.error(name, 'required section missing')
            return None
        return _Fields(self.data[name], self._dotted(name), self.text)


# ============================================================================
# Section parsers
# ============================================================================

def _parse_physical(root: _Fields) -> Optional[Dict[str, Any]]:
    block = root.child('physical_units', required=False)
    if block is None:
        return None
    block.reject_unknown({'axial_frequency_mhz', 'ion_spacing_um', 'ion_mass_amu',
                          'laser_wavelength_nm', 'lambda_hz', 'delta_hz', 'omega_0_hz'})
    positive = lambda v: v > 0
    nu_z = block.get('axial_frequency_mhz', check=positive, message='must be > 0')
    units = PhysicalUnits(axial_frequency_mhz=nu_z)
    chain_overrides: Dict[str, float] = {}
    omega_z = 2.0 * np.pi * units.frequency_unit_hz

    spacing_um = block.get('ion_spacing_um', default=None, check=positive, message='must be > 0')
    mass_amu = block.get('ion_mass_amu', default=None, check=positive, message='must be > 0')
    wavelength_nm = block.get('laser_wavelength_nm', default=None, check=positive, message='must be > 0')
    if spacing_um is not None:
        a = spacing_um * 1e-6
        if mass_amu is not None:
            # m~ = m omega_z a^2 / hbar
            chain_overrides['ion_mass_m'] = mass_amu * constants.atomic_mass * omega_z * a ** 2 / constants.hbar
        if wavelength_nm is not None:
            chain_overrides['laser_wavenumber_ktilde'] = 2.0 * np.pi * a / (wavelength_nm * 1e-9)
        # e~^2 = q^2 / (4 pi eps0 hbar omega_z a)
        e2 = constants.e ** 2 / (4.0 * np.pi * constants.epsilon_0 * constants.hbar * omega_z * a)
        chain_overrides['charge_e'] = float(np.sqrt(e2))
    elif mass_amu is not None or wavelength_nm is not None:
        raise block.error('ion_spacing_um', 'required when ion_mass_amu or laser_wavelength_nm is given')

    dfs_overrides = {}
    for key, target in (('lambda_hz', 'lambda'), ('delta_hz', 'delta'), ('omega_0_hz', 'omega_0')):
        value = block.get(key, default=None)
        if value is not None:
            dfs_overrides[target] = value / units.frequency_unit_hz
    return {'units': units, 'chain': chain_overrides, 'dfs': dfs_overrides}


def _parse_chain(root: _Fields, overrides: Dict[str, float]) -> ChainConfig:
    block = root.child('chain')
    block.reject_unknown({'n_ions', 'omega_z', 'ion_spacing_a', 'ion_mass_m', 'charge_e',
                          'laser_wavenumber_ktilde', 'qubit_positions', 'wavenumber_convention',
                          'allow_coincident_qubits'})
    n_ions = block.get('n_ions', int, check=lambda v: v >= 2, message='must be >= 2')
    positions = block.get('qubit_positions', list, default=[0, 1],
                          check=lambda v: len(v) == 2 and all(isinstance(p, int) and not isinstance(p, bool) for p in v),
                          message='must be a pair of integer site indices')
    values = dict(
        n_ions=n_ions,
        omega_z=block.get('omega_z', default=1.0),
        ion_spacing_a=block.get('ion_spacing_a', default=1.0),
        ion_mass_m=block.get('ion_mass_m', default=1.0),
        charge_e=block.get('charge_e', default=1.0),
        laser_wavenumber_ktilde=block.get('laser_wavenumber_ktilde', default=0.1),
        qubit_positions=tuple(positions),
        wavenumber_convention=block.get('wavenumber_convention', str, default='traveling',
                                        choices=WAVENUMBER_CONVENTIONS),
        allow_coincident_qubits=block.get('allow_coincident_qubits', bool, default=False),
    )
    values.update(overrides)
    try:
        return ChainConfig(**values)
    except ValueError as e:
        raise block.error(None, str(e))


def _parse_bath(root: _Fields, chain: Optional[ChainConfig]) -> BathParams:
    block = root.child('bath')
    block.reject_unknown({'eta', 'omega_c', 'temperature', 'dispersion_velocity'})
    omega_c = block.get('omega_c', check=lambda v: v > 0, message='must be > 0')
    temperature = block.get('temperature', default=0.0, check=lambda v: v >= 0, message='must be >= 0')
    velocity = block.get('dispersion_velocity', default=None, check=lambda v: v > 0, message='must be > 0')
    eta = block.get('eta', default=None, check=lambda v: v > 0, message='must be > 0')
    try:
        if eta is None:
            if chain is None:
                raise block.error('eta', 'required when no chain section is given')
            return BathParams.from_chain(chain, temperature, omega_c, velocity)
        if velocity is None and chain is not None:
            velocity = default_dispersion_velocity(chain)
        return BathParams(eta=eta, omega_c=omega_c, temperature=temperature,
                          nu=chain.stiffness_nu if chain else None, dispersion_velocity=velocity)
    except ConfigError:
        raise
    except ValueError as e:
        raise block.error(None, str(e))


def _parse_dfs(root: _Fields, overrides: Dict[str, float], required: bool) -> Optional[DfsSettings]:
    block = root.child('dfs', required=required and not overrides)
    data = dict(block.data) if block is not None else {}
    data.update(overrides)
    fields = _Fields(data, 'dfs', root.text)
    fields.reject_unknown({'delta', 'omega_0', 'lambda', 'lambda_source'})
    return DfsSettings(
        delta=fields.get('delta', default=0.0),
        omega_0=fields.get('omega_0', default=0.0),
        lambda_=fields.get('lambda', default=None),
        lambda_source=fields.get('lambda_source', str, default='chain', choices=LAMBDA_SOURCES),
    )


def _parse_truncation(root: _Fields) -> TruncationSpec:
    block = root.child('truncation')
    block.reject_unknown({'n_modes', 'fock_dim', 'max_dim'})
    n_modes = block.get('n_modes', int)
    fock_dim = block.get('fock_dim', int, default=8)
    max_dim = block.get('max_dim', int, default=None)
    try:
        if max_dim is None:
            return TruncationSpec(n_modes=n_modes, fock_dim=fock_dim)
        return TruncationSpec(n_modes=n_modes, fock_dim=fock_dim, max_dim=max_dim)
    except ValueError as e:
        raise block.error(None, str(e))


def _parse_time_grid(root: _Fields, required: bool) -> Optional[TimeGrid]:
    block = root.child('time_grid', required=required)
    if block is None:
        return None
    block.reject_unknown({'t_start', 't_end', 'n_points', 'spacing'})
    grid = TimeGrid(
        t_start=block.get('t_start', default=0.0, check=lambda v: v >= 0, message='must be >= 0'),
        t_end=block.get('t_end'),
        n_points=block.get('n_points', int, check=lambda v: v >= 2, message='must be >= 2'),
        spacing=block.get('spacing', str, default='linear', choices=('linear', 'log')),
    )
    try:
        grid.values()
    except ValueError as e:
        raise block.error(None, str(e))
    return grid


def _parse_sections(root: _Fields, kind: str) -> Dict[str, Dict[str, Any]]:
    sections: Dict[str, Dict[str, Any]] = {}
    block = root.child('modes', required=False)
    if block is not None:
        block.reject_unknown({'n_modes'})
        sections['modes'] = {'n_modes': block.get('n_modes', int, default=None)}

    block = root.child('kernels', required=False)
    if block is not None or kind == 'kernels':
        block = block or _Fields({}, 'kernels', root.text)
        block.reject_unknown({'method', 'separation', 'n_modes'})
        sections['kernels'] = {
            'method': block.get('method', str, default='continuum', choices=KERNEL_METHODS),
            'separation': block.get('separation', default=None, check=lambda v: v >= 0, message='must be >= 0'),
            'n_modes': block.get('n_modes', int, default=None),
        }

    block = root.child('dephase', required=False)
    if block is not None or kind == 'dephase':
        block = block or _Fields({}, 'dephase', root.text)
        block.reject_unknown({'initial_state', 'method'})
        sections['dephase'] = {
            'initial_state': block.get('initial_state', str, default='dfs', choices=INITIAL_STATES),
            'method': block.get('method', str, default='continuum', choices=KERNEL_METHODS),
        }

    block = root.child('exact', required=False)
    if block is not None or kind == 'exact':
        block = block or _Fields({}, 'exact', root.text)
        block.reject_unknown({'mode', 'initial_state', 'temperature', 't_max', 'n_points',
                              'max_trace_deficit', 'converge', 'converge_tol'})
        sections['exact'] = {
            'mode': block.get('mode', str, default='dephasing', choices=EXACT_MODES),
            'initial_state': block.get('initial_state', str, default='plus_plus', choices=INITIAL_STATES),
            'temperature': block.get('temperature', default=None, check=lambda v: v >= 0, message='must be >= 0'),
            't_max': block.get('t_max', default=None, check=lambda v: v > 0, message='must be > 0'),
            'n_points': block.get('n_points', int, default=400, check=lambda v: v >= 4, message='must be >= 4'),
            'max_trace_deficit': block.get('max_trace_deficit', default=None,
                                           check=lambda v: 0 < v <= 1, message='must be in (0, 1]'),
            'converge': block.get('converge', bool, default=True),
            'converge_tol': block.get('converge_tol', default=CONVERGENCE_TOL, check=lambda v: v > 0,
                                      message='must be > 0'),
        }

    block = root.child('teleport', required=False)
    if block is not None or kind == 'teleport':
        block = block or _Fields({}, 'teleport', root.text)
        block.reject_unknown({'resource', 'werner_p', 'coherence_factor', 'n_hops', 'n_samples'})
        sections['teleport'] = {
            'resource': block.get('resource', str, default='ideal', choices=RESOURCE_KINDS),
            'werner_p': block.get('werner_p', default=0.9, check=lambda v: 0 <= v <= 1, message='must be in [0, 1]'),
            'coherence_factor': block.get('coherence_factor', default=0.9,
                                          check=lambda v: 0 <= v <= 1, message='must be in [0, 1]'),
            'n_hops': block.get('n_hops', int, default=5, check=lambda v: v >= 1, message='must be >= 1'),
            'n_samples': block.get('n_samples', int, default=10_000, check=lambda v: v >= 2, message='must be >= 2'),
        }
    return sections


def _parse_sweep(root: _Fields) -> Tuple[str, Tuple[SweepAxis, ...]]:
    block = root.child('sweep')
    block.reject_unknown({'experiment', 'axes'})
    experiment = block.get('experiment', str,
                           choices=[k for k in EXPERIMENT_KINDS if k != 'sweep'])
    axes_data = block.get('axes', list, check=lambda v: 1 <= len(v) <= 2,
                          message='exactly one or two sweep axes are required')
    axes = []
    for i, item in enumerate(axes_data):
        axis = _Fields(item, f"sweep.axes.{i}", root.text)
        axis.reject_unknown({'parameter', 'values'})
        parameter = axis.get('parameter', str, check=lambda v: bool(re.fullmatch(r'[a-z_0-9]+(\.[a-z_0-9]+)+', v)),
                             message='must be a dotted config path such as "dfs.delta"')
        values = axis.get('values', list, check=lambda v: len(v) >= 1, message='must be a non-empty list')
        axes.append(SweepAxis(parameter=parameter, values=tuple(values)))
    names = [a.parameter for a in axes]
    if len(set(names)) != len(names):
        raise block.error('axes', 'sweep axes must name distinct parameters')
    return experiment, tuple(axes)


# ============================================================================
# Entry points
# ============================================================================

def parse_config(data: Dict[str, Any], text: str = '') -> ExperimentConfig:
    """Validate a decoded config document"""
    root = _Fields(data, '', text)
    root.reject_unknown({'kind', 'chain', 'bath', 'dfs', 'truncation', 'time_grid', 'modes',
                         'kernels', 'dephase', 'exact', 'teleport', 'sweep', 'physical_units',
                         'rng_seed', 'output', 'description'})
    kind = root.get('kind', str, choices=EXPERIMENT_KINDS)
    seed = root.get('rng_seed', int, default=DEFAULT_SEED, check=lambda v: 0 <= v <= MAX_SEED,
                    message='must be a 64-bit unsigned integer')
    output = root.child('output', required=False)
    output_dir = 'results'
    if output is not None:
        output.reject_unknown({'dir'})
        output_dir = output.get('dir', str, default='results')

    sweep_experiment, sweep_axes = None, ()
    effective = kind
    if kind == 'sweep':
        sweep_experiment, sweep_axes = _parse_sweep(root)
        effective = sweep_experiment

    physical = _parse_physical(root)
    chain_overrides = physical['chain'] if physical else {}
    dfs_overrides = physical['dfs'] if physical else {}

    teleport_block = data.get('teleport') if isinstance(data.get('teleport'), dict) else {}
    generated = teleport_block.get('resource') == 'generated'
    exact_block = data.get('exact') if isinstance(data.get('exact'), dict) else {}
    kappa_run = effective == 'exact' and exact_block.get('mode') == 'kappa'
    needs_chain = effective in ('modes', 'kernels', 'dephase', 'exact') or generated or 'chain' in data
    needs_bath = effective in ('kernels', 'dephase') or generated or 'bath' in data
    needs_dfs = effective == 'dfs' or kappa_run or generated
    needs_grid = effective in ('kernels', 'dephase') or 'time_grid' in data

    chain = _parse_chain(root, chain_overrides) if needs_chain else None
    if effective == 'dfs' and chain is None:
        dfs_block = data.get('dfs') if isinstance(data.get('dfs'), dict) else {}
        if 'lambda' not in dfs_block and 'lambda' not in dfs_overrides:
            raise root.error('chain', 'required section missing (needed to derive dfs.lambda)')
    config = ExperimentConfig(
        kind=kind,
        raw=copy.deepcopy(data),
        chain=chain,
        bath=_parse_bath(root, chain) if needs_bath else None,
        dfs=_parse_dfs(root, dfs_overrides, required=needs_dfs)
        if needs_dfs or 'dfs' in data or dfs_overrides else None,
        truncation=_parse_truncation(root) if effective == 'exact' or 'truncation' in data else None,
        time_grid=_parse_time_grid(root, required=True) if needs_grid else None,
        sweep_experiment=sweep_experiment,
        sweep_axes=sweep_axes,
        rng_seed=seed,
        output_dir=output_dir,
        physical=physical['units'] if physical else None,
        sections=_parse_sections(root, effective),
    )
    if effective == 'exact' and config.section('exact')['mode'] == 'dephasing' and config.time_grid is None:
        raise root.error('time_grid', 'required section missing for exact dephasing runs')
    return config


def parse_config_text(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON: {e.msg} (column {e.colno})", line=e.lineno)
    return parse_config(data, text)


def load_config(path) -> ExperimentConfig:
    """Read and validate a JSON experiment file"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as e:
        raise ConfigError(f"cannot read config file {path}: {e.strerror}")
    return parse_config_text(text)


def set_dotted(data: Dict[str, Any], dotted: str, value: Any) -> Dict[str, Any]:
    """Copy of data with one dotted path replaced"""
    updated = copy.deepcopy(data)
    node = updated
    keys = dotted.split('.')
    for key in keys[:-1]:
        if key not in node or not isinstance(node[key], dict):
            node[key] = {}
        node = node[key]
    node[keys[-1]] = value
    return updated


def sweep_points(config: ExperimentConfig) -> List[Tuple[Tuple[int, ...], Dict[str, Any], Dict[str, Any]]]:
    """Grid points in lexicographic order: (index tuple, parameter values, inner raw config)"""
    if config.kind != 'sweep':
        raise ValueError("sweep_points needs a sweep config")
    base = copy.deepcopy(config.raw)
    base.pop('sweep')
    base['kind'] = config.sweep_experiment
    base['rng_seed'] = config.rng_seed
    indices = np.ndindex(*[len(axis.values) for axis in config.sweep_axes])
    points = []
    for index in indices:
        raw = base
        values = {}
        for axis, i in zip(config.sweep_axes, index):
            values[axis.parameter] = axis.values[i]
            raw = set_dotted(raw, axis.parameter, axis.values[i])
        points.append((tuple(index), values, raw))
    return points
