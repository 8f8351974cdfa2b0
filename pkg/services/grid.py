"""
Periodic grids over a subset of the six spatial coordinates.

Wavefunctions are arrays of shape ``grid.shape + (components,)``; transforms
use the orthonormal FFT over the grid axes, so the discrete sum of |psi|^2 is
the same in both representations.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from utils.errors import GridError

logger = logging.getLogger(__name__)

MAX_SITES = 2 ** 22
MAX_ACTIVE_AXES = 3


def _is_power_of_two(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


@dataclass(frozen=True)
class GridSpec:
    """Active axes (1..6), points and box length per active axis, time step and step count.

    Site j on an axis of length L sits at x_j = -L/2 + j L / n.
    """
    active_axes: Tuple[int, ...]
    n: Tuple[int, ...]
    L: Tuple[float, ...]
    dt: float
    steps: int

    def __post_init__(self):
        axes = tuple(int(a) for a in self.active_axes)
        n = tuple(int(x) for x in self.n)
        lengths = tuple(float(x) for x in self.L)
        object.__setattr__(self, 'active_axes', axes)
        object.__setattr__(self, 'n', n)
        object.__setattr__(self, 'L', lengths)

        if not 1 <= len(axes) <= MAX_ACTIVE_AXES:
            raise GridError(f"Between 1 and {MAX_ACTIVE_AXES} active axes required, got {axes}")
        if len(set(axes)) != len(axes) or any(a not in range(1, 7) for a in axes):
            raise GridError(f"Active axes must be distinct values in 1..6, got {axes}")
        if len(n) != len(axes) or len(lengths) != len(axes):
            raise GridError("n and L need one entry per active axis")
        if not all(_is_power_of_two(x) for x in n):
            raise GridError(f"Points per axis must be powers of two, got {n}")
        if not all(x > 0 for x in lengths):
            raise GridError(f"Box lengths must be positive, got {lengths}")
        if int(np.prod(n)) > MAX_SITES:
            raise GridError(f"Grid of {int(np.prod(n))} sites exceeds the {MAX_SITES}-site cap")
        if not self.dt > 0 or self.steps < 0:
            raise GridError(f"Need dt > 0 and steps >= 0, got dt={self.dt}, steps={self.steps}")

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'GridSpec':
        try:
            return cls(
                active_axes=tuple(config['active_axes']),
                n=tuple(config['n']),
                L=tuple(config['L']),
                dt=float(config['dt']),
                steps=int(config['steps']),
            )
        except (KeyError, TypeError) as e:
            raise GridError(f"Incomplete grid specification {config!r}: {e}")

    def to_dict(self) -> Dict[str, Any]:
        return {'active_axes': list(self.active_axes), 'n': list(self.n), 'L': list(self.L),
                'dt': self.dt, 'steps': self.steps}

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.n

    @property
    def ndim(self) -> int:
        return len(self.n)

    @property
    def sites(self) -> int:
        return int(np.prod(self.n))

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(length / count for length, count in zip(self.L, self.n))

    @property
    def volume_element(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def fft_axes(self) -> Tuple[int, ...]:
        return tuple(range(self.ndim))

    def coordinates(self) -> List[np.ndarray]:
        return [-length / 2 + np.arange(count) * length / count for length, count in zip(self.L, self.n)]

    def wavenumbers(self) -> List[np.ndarray]:
        return [2 * np.pi * np.fft.fftfreq(count, length / count) for length, count in zip(self.L, self.n)]

    def _full_mesh(self, vectors: Sequence[np.ndarray]) -> np.ndarray:
        """(6,) + shape array; inactive axes are identically zero."""
        mesh = np.meshgrid(*vectors, indexing='ij')
        full = np.zeros((6,) + self.shape)
        for axis, values in zip(self.active_axes, mesh):
            full[axis - 1] = values
        return full

    def position_mesh(self) -> np.ndarray:
        return self._full_mesh(self.coordinates())

    def momentum_mesh(self) -> np.ndarray:
        return self._full_mesh(self.wavenumbers())

    def axis_index(self, axis: int) -> int:
        try:
            return self.active_axes.index(axis)
        except ValueError:
            raise GridError(f"Axis {axis} is not active on this grid {self.active_axes}")

    def max_wavenumber(self) -> float:
        return float(np.sqrt(sum(np.max(np.abs(k)) ** 2 for k in self.wavenumbers())))

    def contains(self, x: Sequence[float]) -> bool:
        """Whether a 6-vector position lies inside the box on every active axis."""
        return all(abs(x[axis - 1]) < length / 2 for axis, length in zip(self.active_axes, self.L))

    # transforms

    def fft(self, psi: np.ndarray) -> np.ndarray:
        return np.fft.fftn(psi, axes=self.fft_axes, norm='ortho')

    def ifft(self, psi_hat: np.ndarray) -> np.ndarray:
        return np.fft.ifftn(psi_hat, axes=self.fft_axes, norm='ortho')

    def norm(self, psi: np.ndarray) -> float:
        return float(np.sqrt(np.sum(np.abs(psi) ** 2) * self.volume_element))

    def inner(self, phi: np.ndarray, psi: np.ndarray) -> complex:
        return complex(np.sum(phi.conj() * psi) * self.volume_element)
