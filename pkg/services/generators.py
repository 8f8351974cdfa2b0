"""
Hamiltonians and Poincaré generators of the eight-component two-particle equation.

Conventions: in equal-mass mode ``params.m`` is the total mass and p_{a+3} = 2K_a;
in unequal-mass mode p_{a+3} is K'_a and enters with the factor
(m1 + m2)/sqrt(m1 m2). Generators are DiffOps in momentum representation with
x_A = +i d/dp_A.
"""

import itertools
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from services.clifford_core import GammaSet, gamma8, spin_tensors
from services.jets import Jet, jet_sum, lift
from services.opcalc import (DiffOp, MatrixFn, MomentumPoint, OpCoefficients, ResidualEntry, ResidualReport,
                             commutator_op, compose, conjugate, constant_matrix, grade_residuals, momentum,
                             momentum_jets, multiplication, position, scalar_multiplication)
from services.params import TwoBodyParams
from utils.errors import DomainError, IndexRangeError, TwoBodyError

logger = logging.getLogger(__name__)

RAW = 'raw'
CANONICAL = 'canonical'
SCALAR_MODEL = 'scalar-model'

UNITARY = 'unitary'
PRINTED = 'printed'
U_VARIANTS = (UNITARY, PRINTED)

GENERATOR_NAMES = ('P0', 'P1', 'P2', 'P3', 'J12', 'J13', 'J23', 'K1', 'K2', 'K3')
ROTATION_PAIRS = ((1, 2), (1, 3), (2, 3))


# scalar coefficient functions

def relative_coefficient(params: TwoBodyParams) -> float:
    """Factor multiplying p_{a+3} in the Hamiltonian: 1 (equal masses) or (m1+m2)/sqrt(m1 m2)."""
    return 1.0 if params.is_equal_mass else params.relative_scale


def _square_sum(jets: Sequence[Jet]) -> Jet:
    return jet_sum([x * x for x in jets])


@lru_cache(maxsize=8192)
def energy(q: MomentumPoint, order: int) -> Jet:
    """E = sqrt(P^2 + c^2 p_rel^2 + m^2), the positive square root of H^2."""
    p = momentum_jets(q, order)
    c = relative_coefficient(q.params)
    m = q.params.total_mass
    return (_square_sum(p[:3]) + (c * c) * _square_sum(p[3:]) + m * m).sqrt('E^2')


@lru_cache(maxsize=8192)
def internal_mass(q: MomentumPoint, order: int) -> Jet:
    """M = sqrt(m^2 + c^2 p_rel^2), the invariant mass of the pair."""
    p = momentum_jets(q, order)
    c = relative_coefficient(q.params)
    m = q.params.total_mass
    return ((c * c) * _square_sum(p[3:]) + m * m).sqrt('M^2')


def gamma_dot(q: MomentumPoint, order: int, axes: Sequence[int], g: Optional[GammaSet] = None) -> Jet:
    """sum_A Gamma_A p_A over the given 1-based momentum axes."""
    g = g or gamma8()
    p = momentum_jets(q, order)
    return jet_sum([p[axis - 1] * np.asarray(g[axis]) for axis in axes])


# Hamiltonians

def hamiltonian_matrices(params: TwoBodyParams, g: Optional[GammaSet] = None) -> Tuple[np.ndarray, np.ndarray]:
    """(alpha, beta) with H(p) = sum_A alpha_A p_A + beta; alpha has shape (6, d, d)."""
    g = g or gamma8()
    c = relative_coefficient(params)
    alphas = np.array([g[0] @ g[axis] * (1.0 if axis <= 3 else c) for axis in range(1, 7)])
    beta = params.total_mass * np.asarray(g[0])
    return alphas, beta


def linear_hamiltonian(alphas: np.ndarray, beta: np.ndarray, name: str = 'H',
                       params: Optional[TwoBodyParams] = None) -> DiffOp:
    alphas = np.asarray(alphas, dtype=complex)
    beta = np.asarray(beta, dtype=complex)

    def fn(q: MomentumPoint, k: int) -> Jet:
        p = momentum_jets(q, k)
        return lift(beta, k) + jet_sum([p[axis] * alphas[axis] for axis in range(len(alphas))])

    return multiplication(fn, beta.shape[0], name, params)


def hamiltonian_free(params: TwoBodyParams) -> DiffOp:
    """H = Gamma_0 Gamma_A p_A + Gamma_0 m for equal masses."""
    params.require_equal_mass('hamiltonian_free')
    alphas, beta = hamiltonian_matrices(params)
    return linear_hamiltonian(alphas, beta, 'H', params)


def hamiltonian_unequal(params: TwoBodyParams) -> DiffOp:
    """H' = Gamma_0 Gamma_a p_a + ((m1+m2)/sqrt(m1 m2)) Gamma_0 Gamma_{a+3} K'_a + (m1+m2) Gamma_0."""
    params.require_unequal_mass('hamiltonian_unequal')
    alphas, beta = hamiltonian_matrices(params)
    return linear_hamiltonian(alphas, beta, "H'", params)


def hamiltonian(params: TwoBodyParams) -> DiffOp:
    return hamiltonian_free(params) if params.is_equal_mass else hamiltonian_unequal(params)


def square_residual(h: DiffOp, q: MomentumPoint) -> float:
    """max-norm of H(q)^2 - E(q)^2 I."""
    value = h.evaluate(q, 0).zeroth.value
    e2 = energy(q, 0).value.real ** 2
    return float(np.max(np.abs(value @ value - e2 * np.eye(h.dim))))


# orbital and spin parts

def orbital(a: int, b: int, dim: int, relative: bool = False) -> DiffOp:
    """M_ab = x_a p_b - x_b p_a, or m_ab on the relative coordinates."""
    offset = 3 if relative else 0
    ia, ib = a + offset, b + offset
    op = compose(position(ia, dim), momentum(ib, dim)) - compose(position(ib, dim), momentum(ia, dim))
    return op.named(f"{'m' if relative else 'M'}{a}{b}")


def _check_rotation_index(a: int) -> None:
    if a not in (1, 2, 3):
        raise IndexRangeError(f"Generator index {a!r} outside 1..3")


@dataclass(frozen=True)
class GeneratorSet:
    """The ten Poincaré generators over one parameter set.

    ``J`` holds J_ab for a < b; use ``rotation(a, b)`` for the antisymmetric
    extension. ``K[a-1]`` is the boost J_0a.
    """
    kind: str
    params: TwoBodyParams
    dim: int
    P0: DiffOp
    P: Tuple[DiffOp, ...]
    J: Dict[Tuple[int, int], DiffOp]
    K: Tuple[DiffOp, ...]
    scalars: Dict[str, MatrixFn] = field(default_factory=dict)

    def rotation(self, a: int, b: int) -> DiffOp:
        _check_rotation_index(a)
        _check_rotation_index(b)
        if a == b:
            return constant_matrix(np.zeros((self.dim, self.dim)), f'J{a}{b}')
        if a < b:
            return self.J[(a, b)]
        return self.J[(b, a)].scaled(-1.0).named(f'J{a}{b}')

    @property
    def names(self) -> Tuple[str, ...]:
        return GENERATOR_NAMES

    def as_list(self) -> List[DiffOp]:
        return [self.P0, *self.P, *(self.J[pair] for pair in ROTATION_PAIRS), *self.K]

    def as_dict(self) -> Dict[str, DiffOp]:
        return dict(zip(GENERATOR_NAMES, self.as_list()))

    def __getitem__(self, name: str) -> DiffOp:
        try:
            return self.as_dict()[name]
        except KeyError:
            raise IndexRangeError(f"Unknown generator {name!r}")


def _boost(a: int, energy_op: DiffOp, spin_term: DiffOp, dim: int) -> DiffOp:
    """t p_a - (x_a P0 + P0 x_a)/2 - spin_term."""
    x = position(a, dim)
    time_term = scalar_multiplication(lambda q, k: q.t * momentum_jets(q, k)[a - 1], dim, f't p{a}')
    symmetrized = (compose(x, energy_op) + compose(energy_op, x)).scaled(0.5)
    return (time_term - symmetrized - spin_term).named(f'K{a}')


def _spin_orbit_term(a: int, prefactor: MatrixFn, spin: Optional[Sequence[Sequence[np.ndarray]]], dim: int) -> DiffOp:
    """prefactor(p) * sum_b (m_ab + spin_ab) p_b."""
    inner = []
    for b in (1, 2, 3):
        if b == a:
            continue
        rotation = orbital(a, b, dim, relative=True)
        if spin is not None:
            rotation = rotation + constant_matrix(spin[a - 1][b - 1], f'S{a}{b}')
        inner.append(compose(rotation, momentum(b, dim)))
    return compose(multiplication(prefactor, dim, 'F'), inner[0] + inner[1])


def _build_set(kind: str, params: TwoBodyParams, dim: int, p0: DiffOp,
               spin: Optional[Sequence[Sequence[np.ndarray]]], boost_spin: Optional[Sequence[Sequence[np.ndarray]]],
               prefactor: MatrixFn, scalars: Dict[str, MatrixFn]) -> GeneratorSet:
    momenta = tuple(momentum(a, dim).with_params(params).cached() for a in (1, 2, 3))
    rotations = {}
    for a, b in ROTATION_PAIRS:
        op = orbital(a, b, dim) + orbital(a, b, dim, relative=True)
        if spin is not None:
            op = op + constant_matrix(spin[a - 1][b - 1])
        rotations[(a, b)] = op.named(f'J{a}{b}').with_params(params).cached()
    boosts = tuple(
        _boost(a, p0, _spin_orbit_term(a, prefactor, boost_spin, dim), dim).with_params(params).cached()
        for a in (1, 2, 3)
    )
    generators = GeneratorSet(kind, params, dim, p0.named('P0').with_params(params).cached(), momenta, rotations,
                              boosts, scalars)
    logger.debug(f"Built {kind} generator set for {params}")
    return generators


@lru_cache(maxsize=16)
def generators_raw(params: TwoBodyParams) -> GeneratorSet:
    """P0 = H, P_a = p_a, J_ab = M_ab + m_ab + S_ab and the boosts as printed.

    The boost's spin-orbit term carries S^(2) only, with sqrt(H^2) realized
    as E(p) I.
    """
    params.require_equal_mass('generators_raw')
    tensors = spin_tensors()
    h = hamiltonian_free(params)
    eye = np.eye(8)

    def prefactor(q: MomentumPoint, k: int) -> Jet:
        e, m_int = energy(q, k), internal_mass(q, k)
        return h.evaluate(q, k).zeroth * (e * (e + m_int)).reciprocal('E (E + M)')

    scalars = {'E': lambda q, k: energy(q, k) * eye, 'M': lambda q, k: internal_mass(q, k) * eye}
    return _build_set(RAW, params, 8, h, tensors.S, tensors.S2, prefactor, scalars)


@lru_cache(maxsize=16)
def generators_canonical(params: TwoBodyParams) -> GeneratorSet:
    """P0 = Gamma_0 E and J_0a = t p_a - {x_a, P0}/2 - Gamma_0 (m_ab + S_ab) p_b / (E + M)."""
    params.require_equal_mass('generators_canonical')
    tensors = spin_tensors()
    g0 = np.asarray(gamma8()[0])
    eye = np.eye(8)
    p0 = multiplication(lambda q, k: energy(q, k) * g0, 8, 'P0c', params)

    def prefactor(q: MomentumPoint, k: int) -> Jet:
        return (energy(q, k) + internal_mass(q, k)).reciprocal('E + M') * g0

    scalars = {'E': lambda q, k: energy(q, k) * eye, 'M': lambda q, k: internal_mass(q, k) * eye}
    return _build_set(CANONICAL, params, 8, p0, tensors.S, tensors.S, prefactor, scalars)


@lru_cache(maxsize=16)
def scalar_model(params: TwoBodyParams) -> GeneratorSet:
    """Matrix-free generators {E, p_a, M_ab + m_ab, t p_a - {x_a, E}/2 - m_ab p_b/(E+M)}.

    Used only to measure the bracket table.
    """
    params.require_equal_mass('scalar_model')
    one = np.eye(1)
    p0 = scalar_multiplication(energy, 1, 'E', params)

    def prefactor(q: MomentumPoint, k: int) -> Jet:
        return (energy(q, k) + internal_mass(q, k)).reciprocal('E + M') * one

    return _build_set(SCALAR_MODEL, params, 1, p0, None, None, prefactor, {})


# the unitary transformation

def _require_params(q: MomentumPoint, params: TwoBodyParams, what: str) -> None:
    if q.params != params:
        raise DomainError(f"{what}: point parameters {q.params} differ from {params}")


def foldy_U_total(params: TwoBodyParams) -> MatrixFn:
    """(E + M + Gamma_c p_c) / sqrt(2E(E + M)); maps Gamma_0 Gamma_c p_c + Gamma_0 M to Gamma_0 E."""
    params.require_equal_mass('foldy_U_total')
    eye = np.eye(8)

    def fn(q: MomentumPoint, k: int) -> Jet:
        _require_params(q, params, 'foldy_U_total')
        e, m_int = energy(q, k), internal_mass(q, k)
        numerator = (e + m_int) * eye + gamma_dot(q, k, (1, 2, 3))
        return (2.0 * e * (e + m_int)).power(-0.5, '2E(E + M)') * numerator

    return fn


def foldy_U_relative(params: TwoBodyParams) -> MatrixFn:
    """(M + m + Gamma_{c+3} p_{c+3}) / sqrt(2M(M + m)); maps the relative part to Gamma_0 M."""
    params.require_equal_mass('foldy_U_relative')
    eye = np.eye(8)
    m = params.total_mass

    def fn(q: MomentumPoint, k: int) -> Jet:
        _require_params(q, params, 'foldy_U_relative')
        m_int = internal_mass(q, k)
        numerator = (m_int + m) * eye + gamma_dot(q, k, (4, 5, 6))
        return (2.0 * m_int * (m_int + m)).power(-0.5, '2M(M + m)') * numerator

    return fn


def foldy_U(params: TwoBodyParams, variant: str = UNITARY) -> MatrixFn:
    """U(p) = (E + M + Gamma_c p_c)(M + m + Gamma_{c+3} p_{c+3}) / denominator.

    ``unitary`` normalizes by 2 sqrt(M E (E + M)(M + m)). ``printed`` keeps
    2 sqrt(M E (E + m)(M + m)), for which U U^dagger = (E + M)/(E + m) I.
    """
    params.require_equal_mass('foldy_U')
    if variant == UNITARY:
        total, relative = foldy_U_total(params), foldy_U_relative(params)
        return lambda q, k: total(q, k) @ relative(q, k)
    if variant != PRINTED:
        raise DomainError(f"Unknown transformation variant {variant!r}; expected one of {U_VARIANTS}")
    eye = np.eye(8)
    m = params.total_mass

    def printed(q: MomentumPoint, k: int) -> Jet:
        _require_params(q, params, 'foldy_U')
        e, m_int = energy(q, k), internal_mass(q, k)
        left = (e + m_int) * eye + gamma_dot(q, k, (1, 2, 3))
        right = (m_int + m) * eye + gamma_dot(q, k, (4, 5, 6))
        denominator = m_int * e * (e + m) * (m_int + m)
        return (left @ right) * (0.5 * denominator.power(-0.5, 'M E (E + m)(M + m)'))

    return printed


def unitarity_defect(ufn: MatrixFn, q: MomentumPoint) -> float:
    u = ufn(q, 0).value
    return float(np.max(np.abs(u @ u.conj().T - np.eye(u.shape[0]))))


# bracket table and closure

@dataclass
class StructureTable:
    """[G_i, G_j] = sum_k f[i, j, k] G_k over GENERATOR_NAMES, measured on the scalar model."""
    names: Tuple[str, ...]
    constants: np.ndarray
    fit_residual: float

    def expected(self, i: int, j: int) -> List[Tuple[int, complex]]:
        return [(k, complex(f)) for k, f in enumerate(self.constants[i, j]) if f != 0]

    def expected_op(self, generators: GeneratorSet, i: int, j: int) -> DiffOp:
        ops = generators.as_list()
        terms = [ops[k].scaled(f) for k, f in self.expected(i, j)]
        if not terms:
            return constant_matrix(np.zeros((generators.dim, generators.dim)), '0')
        total = terms[0]
        for term in terms[1:]:
            total = total + term
        return total

    def to_dict(self) -> Dict[str, Dict[str, List[float]]]:
        table = {}
        for i, j in itertools.combinations(range(len(self.names)), 2):
            rhs = {self.names[k]: [f.real, f.imag] for k, f in self.expected(i, j)}
            table[f'[{self.names[i]}, {self.names[j]}]'] = rhs
        return table


def _flattened(coefficients: OpCoefficients) -> np.ndarray:
    return np.concatenate([j.value.ravel() for grade in coefficients.graded() for j in grade])


def measure_structure_constants(params: TwoBodyParams, points: Sequence[MomentumPoint]) -> StructureTable:
    """Fit every bracket of the scalar model against the ten scalar generators.

    The fit is a least-squares problem over all coefficients at all points;
    the constants are then rounded to the nearest Gaussian integer.
    """
    model = scalar_model(params)
    ops = model.as_list()
    basis = np.stack([np.concatenate([_flattened(op.evaluate(q, 0)) for q in points]) for op in ops], axis=1)
    n = len(ops)
    constants = np.zeros((n, n, n), dtype=complex)
    worst = 0.0
    for i, j in itertools.combinations(range(n), 2):
        bracket = commutator_op(ops[i], ops[j])
        target = np.concatenate([_flattened(bracket.evaluate(q, 0)) for q in points])
        fit, *_ = np.linalg.lstsq(basis, target, rcond=None)
        worst = max(worst, float(np.max(np.abs(basis @ fit - target), initial=0.0)))
        rounded = np.round(fit.real) + 1j * np.round(fit.imag)
        worst = max(worst, float(np.max(np.abs(basis @ rounded - target), initial=0.0)))
        constants[i, j] = rounded
        constants[j, i] = -rounded
    logger.info(f"Measured bracket table on {len(points)} points, fit residual {worst:.3e}")
    return StructureTable(GENERATOR_NAMES, constants, worst)


def closure_report(generators: GeneratorSet, table: StructureTable, points: Sequence[MomentumPoint],
                   tol: float, second_order_tol: float,
                   pairs: Optional[Sequence[Tuple[int, int]]] = None) -> ResidualReport:
    """Residuals of [G_i, G_j] - sum_k f_ijk G_k per point and per derivative order."""
    ops = generators.as_list()
    pairs = pairs if pairs is not None else list(itertools.combinations(range(len(ops)), 2))
    report = ResidualReport()
    for i, j in pairs:
        relation = f'[{GENERATOR_NAMES[i]}, {GENERATOR_NAMES[j]}]'
        bracket = commutator_op(ops[i], ops[j])
        expected = table.expected_op(generators, i, j)
        for index, q in enumerate(points):
            residuals = grade_residuals(bracket.evaluate(q, 0) - expected.evaluate(q, 0))
            for grade, residual in residuals.items():
                report.entries.append(
                    ResidualEntry(relation, index, grade, residual, second_order_tol if grade == 2 else tol)
                )
    logger.debug(f"{generators.kind} closure over {len(pairs)} pairs: max residual {report.max_residual:.3e}")
    return report


def jacobi_report(generators: GeneratorSet, triples: Sequence[Tuple[str, str, str]],
                  points: Sequence[MomentumPoint], tol: float) -> ResidualReport:
    """Cyclic sum [[A, B], C] + [[B, C], A] + [[C, A], B] with reduced inner brackets."""
    report = ResidualReport()
    for names in triples:
        a, b, c = (generators[name] for name in names)
        cyclic = (commutator_op(commutator_op(a, b, reduce=True), c)
                  + commutator_op(commutator_op(b, c, reduce=True), a)
                  + commutator_op(commutator_op(c, a, reduce=True), b))
        relation = 'jacobi(' + ', '.join(names) + ')'
        for index, q in enumerate(points):
            for grade, residual in grade_residuals(cyclic.evaluate(q, 0)).items():
                report.entries.append(ResidualEntry(relation, index, grade, residual, tol))
    return report


def equivalence_check(raw: GeneratorSet, canonical: GeneratorSet, ufn: MatrixFn,
                      points: Sequence[MomentumPoint], tol: float) -> ResidualReport:
    """Residuals of U G_raw U^dagger - G_canonical for all ten generators.

    Evaluation failures (a non-unitary U, a singular coefficient) become
    entries with an infinite residual.
    """
    report = ResidualReport()
    canonical_ops = canonical.as_dict()
    for name, op in raw.as_dict().items():
        relation = f'U {name} U+ == {name}c'
        transformed = conjugate(ufn, op)
        target = canonical_ops[name]
        for index, q in enumerate(points):
            try:
                residuals = grade_residuals(transformed.evaluate(q, 0) - target.evaluate(q, 0))
            except TwoBodyError as e:
                logger.warning(f"{relation} not evaluable at point {index}: {e}")
                residuals = {grade: float('inf') for grade in range(3)}
            for grade, residual in residuals.items():
                report.entries.append(ResidualEntry(relation, index, grade, residual, tol))
    return report
