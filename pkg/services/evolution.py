"""
Spectral time evolution of the eight-component equation on reduced grids.

Inactive axes carry zero momentum. Without a space-dependent field every
Fourier mode is advanced exactly with exp(-i H(k) dt) from an 8x8
eigendecomposition; a space-dependent vector potential switches to Strang
splitting with the field sampled at the step midpoint.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from services.generators import energy
from services.grid import GridSpec
from services.interaction import CoupledApplier, FieldSpec, KineticHamiltonian, minimal_coupling
from services.opcalc import MomentumPoint
from services.params import TwoBodyParams
from utils.errors import ConfigError, DomainError, EvolutionError, GridError

logger = logging.getLogger(__name__)

POSITIVE_ENERGY = 'positive-energy'
RAW_SPINOR = 'raw-spinor'
COMPONENT_MODES = (POSITIVE_ENERGY, RAW_SPINOR)

EXACT = 'exact'
STRANG = 'strang'
STEPPERS = (EXACT, STRANG)

WRAP_CLEARANCE = 4.0
MIN_WIDTH_SPACINGS = 2.0


@dataclass(frozen=True)
class PacketSpec:
    """Gaussian packet with position standard deviation ``width`` per active axis."""
    center_x: Tuple[float, ...]
    center_p: Tuple[float, ...]
    width: Tuple[float, ...]
    component_mode: str = POSITIVE_ENERGY
    spinor: Optional[Tuple[complex, ...]] = None

    def __post_init__(self):
        if len(self.center_x) != 6 or len(self.center_p) != 6:
            raise GridError("Packet centres need six components")
        if self.component_mode not in COMPONENT_MODES:
            raise GridError(f"Unknown component mode {self.component_mode!r}; expected one of {COMPONENT_MODES}")

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'PacketSpec':
        try:
            width = config['width']
            spinor = config.get('spinor')
            return cls(
                center_x=tuple(float(x) for x in config.get('center_x', (0.0,) * 6)),
                center_p=tuple(float(x) for x in config.get('center_p', (0.0,) * 6)),
                width=tuple(float(w) for w in (width if isinstance(width, (list, tuple)) else [width])),
                component_mode=config.get('component_mode', POSITIVE_ENERGY),
                spinor=None if spinor is None else tuple(complex(*z) if isinstance(z, list) else complex(z)
                                                         for z in spinor),
            )
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"Invalid packet section {config!r}: {e}")

    def widths_for(self, grid: GridSpec) -> Tuple[float, ...]:
        if len(self.width) == 1:
            return self.width * grid.ndim
        if len(self.width) != grid.ndim:
            raise GridError(f"Need one width per active axis, got {self.width}")
        return self.width

    def to_dict(self) -> Dict[str, Any]:
        return {'center_x': list(self.center_x), 'center_p': list(self.center_p), 'width': list(self.width),
                'component_mode': self.component_mode}


@dataclass
class GridState:
    spec: GridSpec
    psi: np.ndarray
    t: float = 0.0
    packet: Optional[PacketSpec] = None
    initial_norm: float = 1.0

    def copy(self) -> 'GridState':
        return GridState(self.spec, self.psi.copy(), self.t, self.packet, self.initial_norm)


def mode_energies(kinetic: KineticHamiltonian, grid: GridSpec, shift: Optional[np.ndarray] = None) -> np.ndarray:
    """E(k) read from H(k)^2 = E(k)^2 I, shape grid.shape."""
    h = kinetic.mode_matrices(grid, shift)
    return np.sqrt(np.real(np.einsum('...ij,...ji->...', h, h)) / kinetic.dim)


def positive_projectors(kinetic: KineticHamiltonian, grid: GridSpec,
                        shift: Optional[np.ndarray] = None) -> np.ndarray:
    """P+(k) = (I + H(k)/E(k))/2 at every mode."""
    h = kinetic.mode_matrices(grid, shift)
    e = mode_energies(kinetic, grid, shift)
    return 0.5 * (np.eye(kinetic.dim) + h / e[..., None, None])


def init_gaussian(grid: GridSpec, packet: PacketSpec, kinetic: KineticHamiltonian,
                  shift: Optional[np.ndarray] = None) -> GridState:
    """Normalized Gaussian packet; in positive-energy mode each Fourier mode is projected by P+(k)."""
    widths = packet.widths_for(grid)
    for axis, width, spacing in zip(grid.active_axes, widths, grid.spacing):
        if width < MIN_WIDTH_SPACINGS * spacing:
            raise GridError(f"Packet width {width} on axis {axis} is under-resolved (spacing {spacing:.4g})")
    if not grid.contains(packet.center_x):
        raise GridError(f"Packet centre {packet.center_x} lies outside the box")
    for axis in range(1, 7):
        if axis not in grid.active_axes and packet.center_p[axis - 1]:
            raise GridError(f"Packet carries momentum along inactive axis {axis}")

    envelope = np.ones(grid.shape, dtype=complex)
    for index, (coords, width) in enumerate(zip(np.meshgrid(*grid.coordinates(), indexing='ij'), widths)):
        axis = grid.active_axes[index]
        x0, p0 = packet.center_x[axis - 1], packet.center_p[axis - 1]
        envelope *= np.exp(-((coords - x0) ** 2) / (4 * width ** 2) + 1j * p0 * coords)

    spinor = np.zeros(kinetic.dim, dtype=complex)
    if packet.spinor is None:
        spinor[0] = 1.0
    else:
        if len(packet.spinor) != kinetic.dim:
            raise GridError(f"Spinor needs {kinetic.dim} components, got {len(packet.spinor)}")
        spinor[:] = packet.spinor
    psi = envelope[..., None] * spinor

    if packet.component_mode == POSITIVE_ENERGY:
        psi_hat = np.einsum('...ij,...j->...i', positive_projectors(kinetic, grid, shift), grid.fft(psi))
        psi = grid.ifft(psi_hat)
    norm = grid.norm(psi)
    if not norm > 0:
        raise GridError("Packet has no weight after projection; choose another spinor")
    logger.debug(f"Initialized {packet.component_mode} packet on {grid.shape} grid")
    return GridState(grid, psi / norm, 0.0, packet, 1.0)


class Stepper:
    """Advances a GridState by one time step of the coupled Hamiltonian."""

    def __init__(self, applier: CoupledApplier, method: Optional[str] = None):
        fields = applier.fields
        exact_possible = fields.is_zero or (fields.is_uniform and fields.is_static)
        method = method or (EXACT if exact_possible else STRANG)
        if method not in STEPPERS:
            raise ConfigError(f"Unknown stepper {method!r}; expected one of {STEPPERS}")
        if method == EXACT and not exact_possible:
            raise GridError("The exact stepper needs a static, position-independent field")
        self.applier = applier
        self.method = method
        self._propagators: Dict[float, np.ndarray] = {}
        self.shift = None
        if method == EXACT and not fields.is_zero:
            self.shift = fields.charge * fields.uniform_value()

    @property
    def grid(self) -> GridSpec:
        return self.applier.grid

    @property
    def kinetic(self) -> KineticHamiltonian:
        return self.applier.kinetic

    def propagator(self, tau: float) -> np.ndarray:
        """exp(-i H(k) tau) per mode from a batched Hermitian eigendecomposition."""
        if tau not in self._propagators:
            h = self.kinetic.mode_matrices(self.grid, self.shift)
            eigenvalues, vectors = np.linalg.eigh(h)
            phases = np.exp(-1j * eigenvalues * tau)
            self._propagators[tau] = np.einsum('...ij,...j,...kj->...ik', vectors, phases, vectors.conj())
        return self._propagators[tau]

    def unitarity_residual(self) -> float:
        dt = self.grid.dt
        forward, backward = self.propagator(dt), self.propagator(-dt)
        product = np.einsum('...ij,...jk->...ik', forward, backward)
        return float(np.max(np.abs(product - np.eye(self.kinetic.dim))))

    def aliasing_number(self) -> float:
        """dt * max|E(k)| over the grid modes."""
        return float(self.grid.dt * np.max(mode_energies(self.kinetic, self.grid, self.shift)))

    def _kinetic(self, psi: np.ndarray, tau: float) -> np.ndarray:
        psi_hat = np.einsum('...ij,...j->...i', self.propagator(tau), self.grid.fft(psi))
        return self.grid.ifft(psi_hat)

    def _potential(self, psi: np.ndarray, t: float, tau: float) -> np.ndarray:
        """exp(-i V tau) with V = -e alpha.A, using V^2 = |a|^2 I pointwise."""
        v = self.applier.potential_matrices(t)
        a = np.sqrt(np.real(np.einsum('...ij,...ji->...', v, v)) / self.kinetic.dim)
        cos = np.cos(a * tau)
        sin_over_a = tau * np.sinc(a * tau / np.pi)
        vpsi = np.einsum('...ij,...j->...i', v, psi)
        return cos[..., None] * psi - 1j * sin_over_a[..., None] * vpsi

    def step(self, state: GridState, step_index: int = 0) -> GridState:
        dt = self.grid.dt
        if self.method == EXACT:
            psi = self._kinetic(state.psi, dt)
        else:
            psi = self._kinetic(state.psi, 0.5 * dt)
            psi = self._potential(psi, state.t + 0.5 * dt, dt)
            psi = self._kinetic(psi, 0.5 * dt)
        if not np.all(np.isfinite(psi)):
            logger.error(f"Non-finite wavefunction after step {step_index}")
            raise EvolutionError(f"Non-finite wavefunction after step {step_index}", step_index)
        return GridState(state.spec, psi, state.t + dt, state.packet, state.initial_norm)


def step(state: GridState, stepper: Stepper) -> GridState:
    return stepper.step(state)


# observables on the grid

def expectation_energy(state: GridState, applier: CoupledApplier) -> float:
    return float(state.spec.inner(state.psi, applier(state.psi, state.t)).real)


def positive_fraction(state: GridState, kinetic: KineticHamiltonian, shift: Optional[np.ndarray] = None) -> float:
    grid = state.spec
    psi_hat = grid.fft(state.psi)
    projected = np.einsum('...ij,...j->...i', positive_projectors(kinetic, grid, shift), psi_hat)
    return float(np.sum(np.abs(projected) ** 2) / np.sum(np.abs(psi_hat) ** 2))


def centroid(state: GridState) -> np.ndarray:
    """<x_A> for A = 1..6; zero on inactive axes."""
    density = np.sum(np.abs(state.psi) ** 2, axis=-1)
    weight = np.sum(density)
    x = state.spec.position_mesh()
    return np.array([np.sum(x[axis] * density) / weight for axis in range(6)])


@dataclass(frozen=True)
class Snapshot:
    t: float
    norm: float
    energy: float
    pos_fraction: float
    centroid: Tuple[float, ...]

    def to_row(self) -> Dict[str, float]:
        row = {'t': self.t, 'norm': self.norm, 'energy': self.energy, 'pos_fraction': self.pos_fraction}
        row.update({f'centroid_x{axis + 1}': x for axis, x in enumerate(self.centroid)})
        return row


def take_snapshot(state: GridState, stepper: Stepper) -> Snapshot:
    return Snapshot(
        t=state.t,
        norm=state.spec.norm(state.psi),
        energy=expectation_energy(state, stepper.applier),
        pos_fraction=positive_fraction(state, stepper.kinetic, stepper.shift),
        centroid=tuple(centroid(state)),
    )


def predicted_group_velocity(params: TwoBodyParams, packet: PacketSpec,
                             shift: Optional[np.ndarray] = None) -> np.ndarray:
    """grad E at the central kinetic momentum, center_p minus the constant field shift e A."""
    kinetic_p = np.asarray(packet.center_p, dtype=float)
    if shift is not None:
        kinetic_p = kinetic_p - np.asarray(shift, dtype=float)
    return np.real(energy(MomentumPoint(tuple(kinetic_p), params), 1).derivative_block(1))


def check_wrap_around(state: GridState, params: TwoBodyParams, steps: int,
                      shift: Optional[np.ndarray] = None) -> None:
    """Require the packet centre to stay 4 widths away from the box edges during the run."""
    packet = state.packet
    if packet is None:
        return
    grid = state.spec
    duration = steps * grid.dt
    velocity = predicted_group_velocity(params, packet, shift)
    for index, (axis, width) in enumerate(zip(grid.active_axes, packet.widths_for(grid))):
        x0 = packet.center_x[axis - 1]
        if packet.component_mode == POSITIVE_ENERGY:
            ends = [x0 + velocity[axis - 1] * duration]
        else:
            # both energy branches, bounded by the light cone
            ends = [x0 + duration, x0 - duration]
        reach = max(abs(x0), *(abs(x) for x in ends)) + WRAP_CLEARANCE * width
        if reach >= grid.L[index] / 2:
            logger.error(f"Packet reaches {reach:.4g} on axis {axis}, box half-length {grid.L[index] / 2:.4g}")
            raise GridError(f"Packet would wrap around on axis {axis} within {steps} steps")


@dataclass
class EvolutionRun:
    snapshots: List[Snapshot]
    final_state: GridState
    method: str
    aliasing_number: float
    unitarity_residual: float


def run(state: GridState, stepper: Stepper, params: TwoBodyParams, steps: Optional[int] = None,
        snapshots: int = 10) -> EvolutionRun:
    """Advance ``steps`` steps (default grid.steps), recording evenly spaced snapshots."""
    steps = state.spec.steps if steps is None else steps
    check_wrap_around(state, params, steps, stepper.shift)
    alias = stepper.aliasing_number()
    if alias >= np.pi:
        logger.warning(f"dt * max|E| = {alias:.4g} exceeds pi; phases alias between modes")
    unitarity = stepper.unitarity_residual() if stepper.method == EXACT else 0.0
    every = max(1, steps // max(1, snapshots))
    logger.info(f"Evolving {steps} steps of dt={state.spec.dt} with the {stepper.method} stepper")
    recorded = [take_snapshot(state, stepper)]
    for index in range(1, steps + 1):
        state = stepper.step(state, index)
        if index % every == 0 or index == steps:
            recorded.append(take_snapshot(state, stepper))
    return EvolutionRun(recorded, state, stepper.method, alias, unitarity)


@dataclass
class EvolutionDiagnostics:
    times: List[float]
    centroids: List[Tuple[float, ...]]
    fitted_velocity: Tuple[float, ...]
    predicted_velocity: Tuple[float, ...]
    norm_drift: List[float]
    energy_drift: List[float]
    positive_fraction: List[float]
    active_axes: Tuple[int, ...] = field(default_factory=tuple)

    @property
    def max_norm_drift(self) -> float:
        return max(abs(x) for x in self.norm_drift)

    @property
    def max_energy_drift(self) -> float:
        return max(abs(x) for x in self.energy_drift)

    @property
    def min_positive_fraction(self) -> float:
        return min(self.positive_fraction)

    @property
    def max_centroid_drift(self) -> float:
        """Largest displacement of the centroid from its first recorded position."""
        centroids = np.array(self.centroids)
        return float(np.max(np.abs(centroids - centroids[0])))

    def velocity_error(self, axis: int) -> float:
        """Relative error of the fitted centroid velocity against grad E on one axis."""
        predicted = self.predicted_velocity[axis - 1]
        fitted = self.fitted_velocity[axis - 1]
        if predicted == 0.0:
            return abs(fitted)
        return abs(fitted - predicted) / abs(predicted)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'fitted_velocity': list(self.fitted_velocity),
            'predicted_velocity': list(self.predicted_velocity),
            'max_norm_drift': self.max_norm_drift,
            'max_energy_drift': self.max_energy_drift,
            'min_positive_fraction': self.min_positive_fraction,
        }


def diagnose(snapshots: Sequence[Snapshot], params: TwoBodyParams, packet: PacketSpec,
             active_axes: Sequence[int] = tuple(range(1, 7)),
             shift: Optional[np.ndarray] = None) -> EvolutionDiagnostics:
    """Centroid fit, drift series and positive-energy fraction of a recorded run."""
    if len(snapshots) < 2:
        raise DomainError(f"Diagnostics need at least two snapshots, got {len(snapshots)}")
    times = np.array([s.t for s in snapshots])
    centroids = np.array([s.centroid for s in snapshots])
    fitted = tuple(float(np.polyfit(times, centroids[:, axis], 1)[0]) for axis in range(6))
    norm0, energy0 = snapshots[0].norm, snapshots[0].energy
    return EvolutionDiagnostics(
        times=list(times),
        centroids=[tuple(c) for c in centroids],
        fitted_velocity=fitted,
        predicted_velocity=tuple(float(v) for v in predicted_group_velocity(params, packet, shift)),
        norm_drift=[s.norm - norm0 for s in snapshots],
        energy_drift=[s.energy - energy0 for s in snapshots],
        positive_fraction=[s.pos_fraction for s in snapshots],
        active_axes=tuple(active_axes),
    )


def snapshot_frame(snapshots: Sequence[Snapshot]) -> pd.DataFrame:
    columns = ['t', 'norm', 'energy', 'pos_fraction'] + [f'centroid_x{axis}' for axis in range(1, 7)]
    return pd.DataFrame([s.to_row() for s in snapshots], columns=columns)


def write_snapshot_csv(snapshots: Sequence[Snapshot], path: str) -> None:
    snapshot_frame(snapshots).to_csv(path, index=False)
    logger.info(f"Wrote {len(snapshots)} snapshots to {path}")


# configured runs

@dataclass
class EvolveConfig:
    params: TwoBodyParams
    grid: GridSpec
    packet: PacketSpec
    fields: FieldSpec
    method: Optional[str] = None
    snapshots: int = 10

    @classmethod
    def from_config(cls, config: Dict[str, Any], params: TwoBodyParams) -> 'EvolveConfig':
        if 'grid' not in config or 'packet' not in config:
            raise ConfigError("Evolve config needs 'grid' and 'packet' sections")
        try:
            grid = GridSpec.from_config(config['grid'])
        except GridError as e:
            raise ConfigError(str(e))
        fields = FieldSpec.from_config(config['field']) if 'field' in config else FieldSpec.none()
        return cls(params, grid, PacketSpec.from_config(config['packet']), fields,
                   config.get('method'), int(config.get('snapshots', 10)))


def at_rest(config: EvolveConfig) -> EvolveConfig:
    """The same run with a zero-momentum positive-energy packet centred at the origin and no field."""
    packet = replace(config.packet, center_x=(0.0,) * 6, center_p=(0.0,) * 6, component_mode=POSITIVE_ENERGY)
    return replace(config, packet=packet, fields=FieldSpec.none(), method=None)


def build_stepper(config: EvolveConfig, grid: Optional[GridSpec] = None) -> Stepper:
    kinetic = KineticHamiltonian.from_params(config.params)
    return Stepper(minimal_coupling(kinetic, config.fields, grid or config.grid), config.method)


def evolve(config: EvolveConfig) -> Tuple[EvolutionRun, EvolutionDiagnostics]:
    stepper = build_stepper(config)
    state = init_gaussian(config.grid, config.packet, stepper.kinetic, stepper.shift)
    result = run(state, stepper, config.params, snapshots=config.snapshots)
    diagnostics = diagnose(result.snapshots, config.params, config.packet, config.grid.active_axes,
                           stepper.shift)
    logger.info(f"Evolution finished: norm drift {diagnostics.max_norm_drift:.3e}, "
                f"energy drift {diagnostics.max_energy_drift:.3e}")
    return result, diagnostics


def strang_convergence(params: TwoBodyParams, fields: FieldSpec, grid: GridSpec, packet: PacketSpec,
                       duration: float, dt: float, refinement: int = 32) -> Dict[str, float]:
    """Errors at dt and dt/2 against a dt/refinement reference; their ratio approaches 4."""
    kinetic = KineticHamiltonian.from_params(params)

    def evolve_to(step_size: float) -> np.ndarray:
        steps = int(round(duration / step_size))
        spec = GridSpec(grid.active_axes, grid.n, grid.L, step_size, steps)
        stepper = Stepper(minimal_coupling(kinetic, fields, spec), STRANG)
        state = init_gaussian(spec, packet, kinetic)
        for index in range(1, steps + 1):
            state = stepper.step(state, index)
        return state.psi

    reference = evolve_to(dt / refinement)
    coarse = grid.norm(evolve_to(dt) - reference)
    fine = grid.norm(evolve_to(dt / 2) - reference)
    ratio = coarse / fine if fine > 0 else float('inf')
    logger.debug(f"Strang errors {coarse:.3e} (dt) and {fine:.3e} (dt/2), ratio {ratio:.3f}")
    return {'error_dt': coarse, 'error_half_dt': fine, 'ratio': ratio}
