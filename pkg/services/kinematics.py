"""
Scalar two-body kinematics: invariant mass, total energy and the K -> K' map.
"""

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from utils.errors import DomainError

logger = logging.getLogger(__name__)

Vector = Union[float, Sequence[float], np.ndarray]


def _square(v: Vector) -> float:
    """|v|^2 for a 3-vector, or v itself when a squared norm is passed as a number."""
    if np.ndim(v) == 0:
        value = float(v)
        if value < 0:
            raise DomainError(f"Squared momentum must be non-negative, got {value}")
        return value
    v = np.asarray(v, dtype=float)
    if v.shape != (3,):
        raise DomainError(f"Expected a 3-vector, got shape {v.shape}")
    return float(v @ v)


def _check_masses(m1: float, m2: float) -> None:
    if not (m1 > 0 and m2 > 0) or not (math.isfinite(m1) and math.isfinite(m2)):
        raise DomainError(f"Masses must be positive and finite, got m1={m1}, m2={m2}")


def invariant_mass(k_sq: Vector, m1: float, m2: float) -> float:
    """M = sqrt(m1^2 + K^2) + sqrt(m2^2 + K^2).

    Vector arguments here and below may be given as a 3-vector or as the
    squared norm.
    """
    _check_masses(m1, m2)
    k2 = _square(k_sq)
    return math.sqrt(m1 * m1 + k2) + math.sqrt(m2 * m2 + k2)


def total_energy(p: Vector, k: Vector, m1: float, m2: float) -> float:
    """E = sqrt(P^2 + M^2)."""
    return math.hypot(math.sqrt(_square(p)), invariant_mass(k, m1, m2))


def kprime_sq(k: Vector, m1: float, m2: float) -> float:
    """K'^2 = -m1 m2 + m1 m2 (sqrt(m1^2 + K^2) + sqrt(m2^2 + K^2))^2 / (m1 + m2)^2.

    Evaluated without the cancellation near K = 0:
    (s1 + s2)^2 - (m1 + m2)^2 = (s1 + s2 - m1 - m2)(s1 + s2 + m1 + m2) and
    s_i - m_i = K^2 / (s_i + m_i).
    """
    _check_masses(m1, m2)
    k2 = _square(k)
    s1 = math.sqrt(m1 * m1 + k2)
    s2 = math.sqrt(m2 * m2 + k2)
    excess = k2 / (s1 + m1) + k2 / (s2 + m2)
    return m1 * m2 / (m1 + m2) ** 2 * excess * (s1 + s2 + m1 + m2)


def kprime_sq_direct(k: Vector, m1: float, m2: float) -> float:
    """The same map evaluated literally; loses relative accuracy as K -> 0."""
    _check_masses(m1, m2)
    k2 = _square(k)
    bracket = math.sqrt(m1 * m1 + k2) + math.sqrt(m2 * m2 + k2)
    return -m1 * m2 + m1 * m2 / (m1 + m2) ** 2 * bracket ** 2


def mass_from_kprime(kp_sq: float, m1: float, m2: float) -> float:
    """M = ((m1 + m2)/sqrt(m1 m2)) sqrt(m1 m2 + K'^2)."""
    _check_masses(m1, m2)
    if kp_sq < 0 or not math.isfinite(kp_sq):
        raise DomainError(f"K'^2 must be non-negative, got {kp_sq}")
    return (m1 + m2) / math.sqrt(m1 * m2) * math.sqrt(m1 * m2 + kp_sq)


def dispersion_unequal(p: Vector, kp_sq: float, m1: float, m2: float) -> float:
    """E^2 = P^2 + ((m1 + m2)^2 / (m1 m2)) K'^2 + (m1 + m2)^2."""
    _check_masses(m1, m2)
    if kp_sq < 0:
        raise DomainError(f"K'^2 must be non-negative, got {kp_sq}")
    return _square(p) + (m1 + m2) ** 2 / (m1 * m2) * kp_sq + (m1 + m2) ** 2


def dispersion_equal(p: Vector, k: Vector, m: float) -> float:
    """E^2 = P^2 + p_rel^2 + m^2 with p_rel = 2K and m the total mass."""
    if not m > 0:
        raise DomainError(f"Total mass must be positive, got {m}")
    return _square(p) + 4.0 * _square(k) + m * m


@dataclass(frozen=True)
class KinematicSample:
    m1: float
    m2: float
    P: tuple
    K: tuple
    M: float
    E: float
    kprime_sq: float
    E2_unequal: float

    @classmethod
    def build(cls, m1: float, m2: float, P: Vector, K: Vector) -> 'KinematicSample':
        kp = kprime_sq(K, m1, m2)
        return cls(
            m1=m1, m2=m2,
            P=tuple(np.atleast_1d(np.asarray(P, dtype=float))),
            K=tuple(np.atleast_1d(np.asarray(K, dtype=float))),
            M=invariant_mass(K, m1, m2),
            E=total_energy(P, K, m1, m2),
            kprime_sq=kp,
            E2_unequal=dispersion_unequal(P, kp, m1, m2),
        )

    @property
    def mass_round_trip_error(self) -> float:
        return abs(mass_from_kprime(self.kprime_sq, self.m1, self.m2) - self.M) / self.M

    @property
    def dispersion_error(self) -> float:
        return abs(self.E2_unequal - self.E ** 2) / self.E ** 2


def random_samples(count: int, seed: int, mass_range=(0.1, 10.0), momentum_range: float = 10.0):
    """Uniform masses and momenta for the round-trip checks."""
    rng = np.random.default_rng(seed)
    masses = rng.uniform(*mass_range, size=(count, 2))
    momenta = rng.uniform(-momentum_range, momentum_range, size=(count, 2, 3))
    return [KinematicSample.build(m1, m2, P, K) for (m1, m2), (P, K) in zip(masses, momenta)]


def parse_k_grid(spec: str) -> np.ndarray:
    """'a:b:n' -> n evenly spaced |K| values from a to b."""
    try:
        start, stop, count = spec.split(':')
        grid = np.linspace(float(start), float(stop), int(count))
    except ValueError:
        raise DomainError(f"K grid must look like a:b:n, got {spec!r}")
    if len(grid) == 0 or np.any(grid < 0):
        raise DomainError(f"K grid {spec!r} must be non-empty and non-negative")
    return grid


def mass_map(k_values: Iterable[float], m1: float, m2: float) -> pd.DataFrame:
    """Columns K2, Kprime2, M_eq1 (direct), M_eq15 (through K'), relerr over |K| values."""
    rows = []
    for k in k_values:
        k2 = float(k) ** 2
        kp = kprime_sq(k2, m1, m2)
        direct = invariant_mass(k2, m1, m2)
        via_kprime = mass_from_kprime(kp, m1, m2)
        rows.append({
            'K2': k2,
            'Kprime2': kp,
            'M_eq1': direct,
            'M_eq15': via_kprime,
            'relerr': abs(via_kprime - direct) / direct,
        })
    frame = pd.DataFrame(rows, columns=['K2', 'Kprime2', 'M_eq1', 'M_eq15', 'relerr'])
    logger.debug(f"Mass map over {len(frame)} K values, max relerr {frame['relerr'].max():.3e}")
    return frame
