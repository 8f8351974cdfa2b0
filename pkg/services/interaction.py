"""
Interaction Hamiltonians and minimal coupling to an external vector potential.

The square-root and 16-component Coulomb-like forms are evaluated at a frozen
relative radius r: their matrix content is checked there, operator-ordering
terms from [p_{a+3}, 1/r] are not modelled.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from config.tolerances import R_MIN
from services.clifford_core import gamma8, gamma16
from services.generators import hamiltonian_matrices, linear_hamiltonian
from services.grid import GridSpec
from services.opcalc import DiffOp, MomentumPoint
from services.params import TwoBodyParams
from utils.errors import ConfigError, DomainError, GridError

logger = logging.getLogger(__name__)

GENERAL = 'general'
INVERSE_SQUARE = 'inverse-square'
POWER_LAW = 'power-law'
POTENTIAL_KINDS = (GENERAL, INVERSE_SQUARE, POWER_LAW)

CONSTANT = 'constant'
COSINE = 'cosine'
PULSE = 'pulse'
FIELD_KINDS = (CONSTANT, COSINE, PULSE)


@dataclass(frozen=True)
class PotentialSpec:
    """V(r) on r > r_min.

    ``inverse-square`` is V = e^4 / r^2 with e^2 the coupling; ``power-law`` is
    V = coefficient * r**exponent; ``general`` wraps an arbitrary callable.
    """
    kind: str
    e2: float = 0.0
    fn: Optional[Callable[[float], float]] = None
    coefficient: float = 0.0
    exponent: float = -1.0
    r_min: float = R_MIN

    def __post_init__(self):
        if self.kind not in POTENTIAL_KINDS:
            raise DomainError(f"Unknown potential kind {self.kind!r}; expected one of {POTENTIAL_KINDS}")
        if self.kind == GENERAL and self.fn is None:
            raise DomainError("A general potential needs a callable V(r)")

    @classmethod
    def zero(cls) -> 'PotentialSpec':
        return cls(POWER_LAW, coefficient=0.0, exponent=0.0)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'PotentialSpec':
        try:
            kind = config['kind']
            if kind == INVERSE_SQUARE:
                return cls(kind, e2=float(config['e2']), r_min=float(config.get('r_min', R_MIN)))
            if kind == POWER_LAW:
                return cls(kind, coefficient=float(config['coefficient']), exponent=float(config['exponent']),
                           r_min=float(config.get('r_min', R_MIN)))
        except (KeyError, TypeError, ValueError, DomainError) as e:
            raise ConfigError(f"Invalid potential section {config!r}: {e}")
        raise ConfigError(f"Potential kind {config.get('kind')!r} cannot be read from a config file")

    def value(self, r: float) -> float:
        if not r > self.r_min:
            raise DomainError(f"Radius r={r} is not above r_min={self.r_min}")
        if self.kind == INVERSE_SQUARE:
            return self.e2 ** 2 / r ** 2
        if self.kind == POWER_LAW:
            return self.coefficient * r ** self.exponent
        return float(self.fn(r))


def hamiltonian_V(params: TwoBodyParams, potential: PotentialSpec, r: float) -> DiffOp:
    """H = Gamma_0 Gamma_A p_A + Gamma_0 sqrt(m^2 + V(r)) at frozen r."""
    alphas, _ = hamiltonian_matrices(params)
    radicand = params.total_mass ** 2 + potential.value(r)
    if radicand < 0:
        raise DomainError(f"m^2 + V(r) = {radicand:.6g} is negative at r={r}")
    beta = math.sqrt(radicand) * np.asarray(gamma8()[0])
    return linear_hamiltonian(alphas, beta, f'H_V(r={r:g})', params)


def hamiltonian_coulomb16(params: TwoBodyParams, r: float, e2: Optional[float] = None,
                          r_min: float = R_MIN) -> DiffOp:
    """H = G0 G_A p_A + (e^2/r) G0 G7 + G0 m with the 16x16 set, mass term on G0^(16)."""
    if not r > 0:
        raise DomainError(f"Radius must be positive, got r={r}")
    if r < r_min:
        raise DomainError(f"Radius r={r} is below r_min={r_min}")
    coupling = params.e2 if e2 is None else e2
    g = gamma16()
    alphas, beta = hamiltonian_matrices(params, g)
    beta = beta + coupling / r * (g[0] @ g[7])
    return linear_hamiltonian(alphas, beta, f'H16(r={r:g})', params)


def frozen_spectrum(h: DiffOp, q: MomentumPoint) -> np.ndarray:
    value = h.evaluate(q, 0).zeroth.value
    return np.linalg.eigvalsh(value)


# minimal coupling on a grid

@dataclass(frozen=True)
class FieldSpec:
    """Vector potential A_A(t, x_A) for A = 1..6 and charge e.

    ``constant``: A_A = amplitude_A. ``cosine``: amplitude_A cos(k_A x_A + phase_A).
    ``pulse``: the cosine profile times sin^2(pi t / duration) on 0 <= t <= duration.
    """
    kind: str = CONSTANT
    amplitude: Tuple[float, ...] = (0.0,) * 6
    wavenumber: Tuple[float, ...] = (0.0,) * 6
    phase: Tuple[float, ...] = (0.0,) * 6
    charge: float = 1.0
    duration: float = 1.0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise DomainError(f"Unknown field kind {self.kind!r}; expected one of {FIELD_KINDS}")
        for name in ('amplitude', 'wavenumber', 'phase'):
            values = tuple(float(x) for x in getattr(self, name))
            if len(values) != 6 or not all(math.isfinite(x) for x in values):
                raise DomainError(f"Field {name} needs six finite entries, got {values}")
            object.__setattr__(self, name, values)
        if self.kind == PULSE and not self.duration > 0:
            raise DomainError(f"Pulse duration must be positive, got {self.duration}")

    @classmethod
    def none(cls) -> 'FieldSpec':
        return cls()

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'FieldSpec':
        try:
            return cls(
                kind=config.get('kind', CONSTANT),
                amplitude=tuple(config.get('amplitude', (0.0,) * 6)),
                wavenumber=tuple(config.get('wavenumber', (0.0,) * 6)),
                phase=tuple(config.get('phase', (0.0,) * 6)),
                charge=float(config.get('charge', 1.0)),
                duration=float(config.get('duration', 1.0)),
            )
        except (TypeError, ValueError, DomainError) as e:
            raise ConfigError(f"Invalid field section {config!r}: {e}")

    @property
    def is_zero(self) -> bool:
        return not any(self.amplitude)

    @property
    def is_uniform(self) -> bool:
        return self.kind == CONSTANT or not any(self.wavenumber)

    @property
    def is_static(self) -> bool:
        return self.kind != PULSE

    def envelope(self, t: float) -> float:
        if self.kind != PULSE:
            return 1.0
        if t < 0 or t > self.duration:
            return 0.0
        return math.sin(math.pi * t / self.duration) ** 2

    def uniform_value(self, t: float = 0.0) -> np.ndarray:
        """The six components of a position-independent potential."""
        if not self.is_uniform:
            raise GridError("Field varies in space; sample it on a grid instead")
        amplitude = np.array(self.amplitude)
        if self.kind == CONSTANT:
            return amplitude
        return amplitude * np.cos(np.array(self.phase)) * self.envelope(t)

    def sample(self, grid: GridSpec, t: float) -> np.ndarray:
        """A on the grid, shape (6,) + grid.shape."""
        for axis in range(1, 7):
            if axis not in grid.active_axes and self.amplitude[axis - 1] and self.wavenumber[axis - 1] \
                    and self.kind != CONSTANT:
                raise GridError(f"Field component A_{axis} varies along inactive axis {axis}")
        if self.kind == CONSTANT:
            return np.broadcast_to(np.array(self.amplitude)[(slice(None),) + (None,) * grid.ndim],
                                   (6,) + grid.shape).copy()
        x = grid.position_mesh()
        k = np.array(self.wavenumber)[(slice(None),) + (None,) * grid.ndim]
        phase = np.array(self.phase)[(slice(None),) + (None,) * grid.ndim]
        amplitude = np.array(self.amplitude)[(slice(None),) + (None,) * grid.ndim]
        values = amplitude * np.cos(k * x + phase) * self.envelope(t)
        if not np.all(np.isfinite(values)):
            raise GridError(f"Field is not finite on the grid at t={t}")
        return values

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'amplitude': list(self.amplitude), 'wavenumber': list(self.wavenumber),
                'phase': list(self.phase), 'charge': self.charge, 'duration': self.duration}


class KineticHamiltonian:
    """H(k) = sum_A alpha_A k_A + beta, diagonal in the grid's Fourier modes."""

    def __init__(self, alphas: np.ndarray, beta: np.ndarray, name: str = 'H'):
        self.alphas = np.asarray(alphas, dtype=complex)
        self.beta = np.asarray(beta, dtype=complex)
        self.name = name

    @classmethod
    def from_params(cls, params: TwoBodyParams) -> 'KineticHamiltonian':
        alphas, beta = hamiltonian_matrices(params)
        return cls(alphas, beta, 'H' if params.is_equal_mass else "H'")

    @property
    def dim(self) -> int:
        return self.beta.shape[0]

    def matrix(self, k: Sequence[float]) -> np.ndarray:
        return np.tensordot(np.asarray(k, dtype=float), self.alphas, axes=1) + self.beta

    def mode_matrices(self, grid: GridSpec, shift: Optional[np.ndarray] = None) -> np.ndarray:
        """H at every grid mode, shape grid.shape + (d, d); ``shift`` is subtracted from k."""
        k = grid.momentum_mesh()
        if shift is not None:
            k = k - np.asarray(shift)[(slice(None),) + (None,) * grid.ndim]
        return np.einsum('a...,aij->...ij', k, self.alphas) + self.beta

    def coupling_matrices(self, potential: np.ndarray, charge: float) -> np.ndarray:
        """-e sum_A alpha_A A_A pointwise, shape grid.shape + (d, d)."""
        return -charge * np.einsum('a...,aij->...ij', potential, self.alphas)

    def apply(self, psi: np.ndarray, grid: GridSpec, shift: Optional[np.ndarray] = None) -> np.ndarray:
        psi_hat = grid.fft(psi)
        return grid.ifft(np.einsum('...ij,...j->...i', self.mode_matrices(grid, shift), psi_hat))


@dataclass
class CoupledApplier:
    """psi -> H psi with p_A -> p_A - e A_A; derivatives act spectrally, A pointwise."""
    kinetic: KineticHamiltonian
    fields: FieldSpec
    grid: GridSpec
    _static: Dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    def potential_matrices(self, t: float) -> np.ndarray:
        if self.fields.is_static and 'potential' in self._static:
            return self._static['potential']
        matrices = self.kinetic.coupling_matrices(self.fields.sample(self.grid, t), self.fields.charge)
        if self.fields.is_static:
            self._static['potential'] = matrices
        return matrices

    def __call__(self, psi: np.ndarray, t: float = 0.0) -> np.ndarray:
        expected = self.grid.shape + (self.kinetic.dim,)
        if psi.shape != expected:
            raise GridError(f"Wavefunction shape {psi.shape} does not match grid {expected}")
        result = self.kinetic.apply(psi, self.grid)
        if self.fields.is_zero:
            return result
        return result + np.einsum('...ij,...j->...i', self.potential_matrices(t), psi)


def minimal_coupling(kinetic: KineticHamiltonian, fields: FieldSpec, grid: GridSpec) -> CoupledApplier:
    return CoupledApplier(kinetic, fields, grid)


def load_interaction_config(config: Dict[str, Any]) -> Tuple[PotentialSpec, FieldSpec]:
    """{"potential": {...}, "fields": {...}}; missing sections give V = 0 and A = 0."""
    if not isinstance(config, dict):
        raise ConfigError(f"Interaction config must be an object, got {type(config).__name__}")
    potential = PotentialSpec.from_config(config['potential']) if 'potential' in config else PotentialSpec.zero()
    fields = FieldSpec.from_config(config['fields']) if 'fields' in config else FieldSpec.none()
    return potential, fields
