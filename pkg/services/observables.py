"""
Position, projector and velocity observables of the free two-particle equation.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Sequence

import numpy as np
import pandas as pd

from services.clifford_core import gamma8, spin_tensors
from services.generators import (PRINTED, energy, foldy_U, gamma_dot, hamiltonian, hamiltonian_free,
                                 hamiltonian_matrices, internal_mass)
from services.jets import Jet, jet_sum
from services.opcalc import (DiffOp, MomentumPoint, commutator, conjugate, dagger_fn, momentum_jets, multiplication,
                             position)
from services.params import TwoBodyParams
from utils.errors import DomainError, IndexRangeError

logger = logging.getLogger(__name__)

CONJUGATED = 'conjugated'
POSITION_FORMS = (PRINTED, CONJUGATED)

PROJECTOR_ATOL = 1e-10


def _check_position_index(index: int) -> None:
    if index not in range(1, 7):
        raise IndexRangeError(f"Position index {index!r} outside 1..6")


def _total_correction(a: int, q: MomentumPoint, k: int) -> Jet:
    """Matrix part of X_a for a = 1..3."""
    g = gamma8()
    s1 = spin_tensors().S1
    p = momentum_jets(q, k)
    e, m_int = energy(q, k), internal_mass(q, k)
    m = q.params.total_mass
    eye = np.eye(8)

    spin = jet_sum([p[b] * np.asarray(s1[a - 1][b]) for b in range(3) if b != a - 1])
    spin = spin * (e * (e + m_int)).reciprocal('E (E + M)')

    relative = (m * eye + gamma_dot(q, k, (4, 5, 6))) * m_int.reciprocal('M')
    bracket = (0.5 * e.reciprocal('E')) * np.asarray(g[a]) \
        - (p[a - 1] * (2.0 * e * e * (e + m_int)).reciprocal('E^2 (E + M)')) * gamma_dot(q, k, (1, 2, 3))
    return spin + 1j * (bracket @ relative)


def _relative_correction(a: int, q: MomentumPoint, k: int) -> Jet:
    """Matrix part of X_{a+3} for a = 1..3."""
    g = gamma8()
    s2 = spin_tensors().S2
    p = momentum_jets(q, k)
    e, m_int = energy(q, k), internal_mass(q, k)
    m = q.params.total_mass
    eye = np.eye(8)
    p_rel = p[a + 2]

    spin = jet_sum([p[b + 3] * np.asarray(s2[a - 1][b]) for b in range(3) if b != a - 1])
    spin = spin * (m_int * (m_int + m)).reciprocal('M (M + m)')
    relative_dot = gamma_dot(q, k, (4, 5, 6))

    result = spin + (0.5j * m_int.reciprocal('M')) * np.asarray(g[a + 3])
    result = result - (1j * p_rel * (2.0 * m_int * m_int * (m_int + m)).reciprocal('M^2 (M + m)')) * relative_dot
    mixed = gamma_dot(q, k, (1, 2, 3)) @ (m * eye + relative_dot)
    result = result - (1j * p_rel * (2.0 * e * e * m_int * m_int).reciprocal('E^2 M^2')) * mixed
    return result


def position_X(index: int, params: TwoBodyParams, form: str = PRINTED) -> DiffOp:
    """Position operator X_A = x_A + (matrix function of p), A = 1..6.

    ``printed`` builds the closed forms; ``conjugated`` computes U^dagger x_A U
    through the operator calculus.
    """
    _check_position_index(index)
    params.require_equal_mass('position_X')
    x = position(index, 8)
    if form == CONJUGATED:
        return conjugate(dagger_fn(foldy_U(params)), x, f'X{index}').with_params(params).cached()
    if form != PRINTED:
        raise DomainError(f"Unknown position form {form!r}; expected one of {POSITION_FORMS}")
    if index <= 3:
        correction = multiplication(lambda q, k: _total_correction(index, q, k), 8, f'F{index}')
    else:
        correction = multiplication(lambda q, k: _relative_correction(index - 3, q, k), 8, f'F{index}')
    return (x + correction).named(f'X{index}').with_params(params).cached()


def positive_projector(h: DiffOp, q: MomentumPoint) -> np.ndarray:
    """P+ = (I + H(q)/E(q))/2 with E(q)^2 read from H(q)^2."""
    value = h.evaluate(q, 0).zeroth.value
    square = value @ value
    e2 = float(np.trace(square).real) / h.dim
    if not e2 > 0:
        raise DomainError(f"H(q)^2 has non-positive scale {e2} at p={q.p}")
    defect = float(np.max(np.abs(square - e2 * np.eye(h.dim))))
    if defect > PROJECTOR_ATOL * max(1.0, e2):
        raise DomainError(f"H(q)^2 is not proportional to the identity at p={q.p} (defect {defect:.3e})")
    return 0.5 * (np.eye(h.dim) + value / np.sqrt(e2))


def covariant_condition(params: TwoBodyParams, q: MomentumPoint) -> np.ndarray:
    """C = I - (Gamma_0 E - Gamma_A p_A)/m; annihilates the positive-energy columns."""
    alphas, beta = hamiltonian_matrices(params)
    g0 = np.asarray(gamma8()[0])
    e = float(energy(q, 0).value.real)
    gamma_p = g0 @ np.tensordot(np.array(q.p), alphas, axes=1)
    return np.eye(8) - (g0 * e - gamma_p) / params.total_mass


def velocity(a: int, params: TwoBodyParams, q: MomentumPoint, form: str = PRINTED) -> np.ndarray:
    """V_{a+3} = -i [X_{a+3}, H] at q, an 8x8 matrix."""
    if a not in (1, 2, 3):
        raise IndexRangeError(f"Velocity index {a!r} outside 1..3")
    bracket = commutator(position_X(a + 3, params, form), hamiltonian_free(params), q)
    leftover = max((float(np.max(np.abs(j.value))) for j in bracket.first.values()), default=0.0)
    if leftover > 1e-10:
        logger.warning(f"Velocity commutator keeps a derivative part {leftover:.3e} at p={q.p}")
    return -1j * bracket.zeroth.value


def energy_gradient(q: MomentumPoint) -> np.ndarray:
    """dE/dp_A for A = 1..6 from the energy jet."""
    return np.real(energy(q, 1).derivative_block(1))


@dataclass
class VelocitySpectrum:
    point: MomentumPoint
    component_eigenvalues: List[List[float]]
    square_eigenvalues: List[float]
    positive_expectations: List[float]
    imaginary_residue: float
    hermiticity_residual: float

    @property
    def max_square(self) -> float:
        return max(self.square_eigenvalues)


def _real_sorted(eigenvalues: np.ndarray) -> List[float]:
    return sorted(float(x) for x in np.real(eigenvalues))


def velocity_spectrum(params: TwoBodyParams, q: MomentumPoint, form: str = PRINTED) -> VelocitySpectrum:
    projector = positive_projector(hamiltonian(params), q)
    components = [velocity(a, params, q, form) for a in (1, 2, 3)]
    square = sum(v @ v for v in components)
    eigenvalues = [np.linalg.eigvals(v) for v in components] + [np.linalg.eigvals(square)]
    residue = max(float(np.max(np.abs(np.imag(ev)))) for ev in eigenvalues)
    hermiticity = max(float(np.max(np.abs(v - v.conj().T))) for v in components)
    expectations = [float(np.trace(projector @ v @ projector).real) / 4.0 for v in components]
    return VelocitySpectrum(
        point=q,
        component_eigenvalues=[_real_sorted(ev) for ev in eigenvalues[:3]],
        square_eigenvalues=_real_sorted(eigenvalues[3]),
        positive_expectations=expectations,
        imaginary_residue=residue,
        hermiticity_residual=hermiticity,
    )


@dataclass
class SubluminalEntry:
    point: int
    p: Sequence[float]
    max_eigenvalue: float

    @property
    def margin(self) -> float:
        return 1.0 - self.max_eigenvalue

    @property
    def passed(self) -> bool:
        return self.max_eigenvalue < 1.0


@dataclass
class SubluminalReport:
    entries: List[SubluminalEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def max_eigenvalue(self) -> float:
        return max(e.max_eigenvalue for e in self.entries)

    @property
    def margin(self) -> float:
        return 1.0 - self.max_eigenvalue

    def to_dict(self) -> Dict[str, object]:
        return {
            'passed': self.passed,
            'max_eigenvalue': self.max_eigenvalue,
            'margin': self.margin,
            'points': [{'point': e.point, 'p': list(e.p), 'max_eigenvalue': e.max_eigenvalue,
                        'margin': e.margin} for e in self.entries],
        }


def subluminal_check(params: TwoBodyParams, points: Sequence[MomentumPoint]) -> SubluminalReport:
    """Largest eigenvalue of V_4^2 + V_5^2 + V_6^2 at each point; passes iff all stay below 1."""
    report = SubluminalReport()
    for index, q in enumerate(points):
        spectrum = velocity_spectrum(params, q)
        report.entries.append(SubluminalEntry(index, q.p, spectrum.max_square))
    if not report.passed:
        logger.warning(f"Velocity bound violated: max eigenvalue {report.max_eigenvalue:.6g}")
    return report


def spectrum_frame(spectra: Sequence[VelocitySpectrum]) -> pd.DataFrame:
    """Columns p1..p6 and eig1..eig8 of V^2."""
    rows = []
    for spectrum in spectra:
        row = {f'p{i + 1}': x for i, x in enumerate(spectrum.point.p)}
        row.update({f'eig{i + 1}': x for i, x in enumerate(spectrum.square_eigenvalues)})
        rows.append(row)
    return pd.DataFrame(rows, columns=[f'p{i}' for i in range(1, 7)] + [f'eig{i}' for i in range(1, 9)])


def write_spectrum_csv(spectra: Sequence[VelocitySpectrum], path: str) -> None:
    spectrum_frame(spectra).to_csv(path, index=False)
    logger.info(f"Wrote velocity spectra for {len(spectra)} points to {path}")
