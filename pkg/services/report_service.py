"""
Verification suites and the versioned machine-readable report.

Each suite measures a battery of relations and returns report entries; a
mismatch never raises, it becomes an entry with ``pass: false``. Entries of
kind ``finding`` document known discrepancies in the printed formulas and do
not affect the exit code.
"""

import itertools
import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from config.tolerances import STRANG_RATIO_WINDOW, TOLERANCES, tolerance_for
from services.clifford_core import (LEVI_CIVITA, commutator as matrix_commutator, gamma8, gamma16, max_norm,
                                    spin_s, spin_tau, spin_tensors, structure_constants)
from services.evolution import (EXACT, POSITIVE_ENERGY, EvolveConfig, PacketSpec, at_rest, build_stepper,
                                diagnose, evolve, init_gaussian, run, strang_convergence)
from services.generators import (GENERATOR_NAMES, PRINTED, closure_report, energy, equivalence_check, foldy_U,
                                 foldy_U_relative, gamma_dot, generators_canonical, generators_raw,
                                 hamiltonian_free, hamiltonian_unequal, internal_mass, jacobi_report,
                                 measure_structure_constants, square_residual, unitarity_defect)
from services.grid import GridSpec
from services.interaction import (CONSTANT, COSINE, INVERSE_SQUARE, FieldSpec, KineticHamiltonian, PotentialSpec,
                                  frozen_spectrum, hamiltonian_V, hamiltonian_coulomb16, load_interaction_config,
                                  minimal_coupling)
from services.kinematics import invariant_mass, kprime_sq, random_samples
from services.observables import (CONJUGATED, covariant_condition, energy_gradient, position_X, positive_projector,
                                  velocity_spectrum)
from services.opcalc import (MomentumPoint, ResidualEntry, commutator_op, constant_matrix, grade_residuals, momentum,
                             op_equal_at, sample_points)
from services.params import TwoBodyParams
from utils.display import entries_frame
from utils.errors import ConfigError, TwoBodyError
from utils.validators import (FINDING, ReportEntry, central_difference, check_residual, check_window,
                              entries_from_residuals, findings_when_failing, relative_error)

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
ARTIFACT_VERSION = '1.0.0'

ALL = 'all'
SUITES = ('clifford', 'poincare', 'positions', 'velocity', 'kinematics', 'interaction', 'evolve')

EXIT_PASS = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2

K_INDICES = (7, 8, 9)
JACOBI_TRIPLES = (('K1', 'K2', 'K3'), ('P0', 'K1', 'K2'), ('J12', 'K1', 'P2'), ('J12', 'J23', 'K3'))

DEFAULT_EVOLVE = {
    'grid': {'active_axes': [4], 'n': [256], 'L': [128.0], 'dt': 0.04, 'steps': 1000},
    'packet': {'center_x': [0, 0, 0, -30.0, 0, 0], 'center_p': [0, 0, 0, 2.0, 0, 0], 'width': 8.0},
    'snapshots': 20,
}

DEFAULT_STRANG = {
    'grid': {'active_axes': [1], 'n': [128], 'L': [20.0]},
    'packet': {'center_x': [0] * 6, 'center_p': [1.0, 0, 0, 0, 0, 0], 'width': 1.0},
    'field': {'kind': COSINE, 'amplitude': [0.5, 0, 0, 0, 0, 0],
              'wavenumber': [2 * math.pi / 20.0, 0, 0, 0, 0, 0]},
    'duration': 1.0,
    'dt': 0.02,
}

SUITE_NOTES = {
    'poincare': ["U is normalised by 2 sqrt(M E (E+M)(M+m)); the (E+m) denominator is reported as a finding",
                 "raw-boost brackets and equivalence entries become findings when they miss the tolerance"],
    'positions': ["printed position operators are compared with U+ x U as findings"],
    'interaction': ["the 16x16 Hamiltonian puts the mass term on Gamma_0^(16)"],
}


@dataclass
class SuiteContext:
    """Everything a suite needs: sampling, tolerances and the physical parameters.

    ``params`` is the equal-mass set (total mass m) and ``unequal`` the m1/m2
    set; the suites use whichever their relations are defined for.
    """
    seed: int
    points: int
    tolerance: Optional[float]
    params: TwoBodyParams
    unequal: TwoBodyParams
    interaction: Dict[str, Any] = field(default_factory=dict)
    evolve: Dict[str, Any] = field(default_factory=dict)

    @classmethod
    def from_config(cls, config: Dict[str, Any]) -> 'SuiteContext':
        section = config.get('params', {})
        try:
            e2 = float(section.get('e2', 0.0))
            params = TwoBodyParams.equal_mass(section.get('m', 1.0), e2)
            unequal = TwoBodyParams.unequal_mass(section.get('m1', 1.0), section.get('m2', 2.0), e2)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Invalid params section {section!r}: {e}")
        points = int(config.get('points', 50))
        if points < 1:
            raise ConfigError(f"Need at least one sample point, got {points}")
        return cls(int(config['seed']), points, config.get('tolerance'), params, unequal,
                   config.get('interaction', {}), config.get('evolve', {}))

    def tol(self, check_id: str) -> float:
        return tolerance_for(check_id, self.tolerance)

    def sample(self, params: Optional[TwoBodyParams] = None, count: Optional[int] = None,
               salt: int = 0) -> List[MomentumPoint]:
        return sample_points(params or self.params, self.points if count is None else count, self.seed + salt)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng(self.seed + salt)

    def echo(self) -> Dict[str, Any]:
        return {
            'seed': hex(self.seed),
            'points': self.points,
            'tolerance_override': self.tolerance,
            'params': self.params.to_dict(),
            'unequal_params': self.unequal.to_dict(),
            'tolerances': {key: self.tol(key) for key in sorted(TOLERANCES)},
            'strang_window': list(STRANG_RATIO_WINDOW),
            'interaction': self.interaction,
            'evolve': self.evolve,
        }


# clifford

def clifford_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'clifford'
    entries = []
    for name, g in (('gamma8', gamma8()), ('gamma16', gamma16())):
        residuals = g.anticommutator_residuals()
        worst = max(residuals, key=residuals.get)
        entries.append(check_residual(suite, f'{name}.anticommutator', residuals[worst],
                                      ctx.tol(f'clifford.anticommutator{g.dim}'),
                                      pairs=len(residuals), worst_pair=list(worst)))
        entries.append(check_residual(suite, f'{name}.hermiticity', max(g.hermiticity_residuals()),
                                      ctx.tol('clifford.hermiticity')))

    s_tau = max(max_norm(matrix_commutator(spin_s(a), spin_tau(b)))
                for a, b in itertools.product((1, 2, 3), repeat=2))
    entries.append(check_residual(suite, 's_tau.commute', s_tau, ctx.tol('clifford.s_tau_commute')))

    for family, fn in (('s', spin_s), ('tau', spin_tau)):
        measured = structure_constants([fn(a) for a in (1, 2, 3)])
        plus = float(np.max(np.abs(measured - 1j * LEVI_CIVITA)))
        minus = float(np.max(np.abs(measured + 1j * LEVI_CIVITA)))
        convention = '+i eps' if plus <= minus else '-i eps'
        entries.append(check_residual(suite, f'{family}.structure_constants', plus,
                                      ctx.tol('clifford.structure_constants'), kind=FINDING,
                                      convention=convention, deviation_from_opposite=minus))

    tensors = spin_tensors()
    expected = np.array([0.0] * 2 + [2.0] * 6)
    spectrum = np.sort(tensors.casimir_spectrum('S'))
    entries.append(check_residual(suite, 'spin.casimir_spectrum', float(np.max(np.abs(spectrum - expected))),
                                  ctx.tol('clifford.casimir_spectrum'),
                                  spectrum=[round(float(x), 12) for x in spectrum]))
    for family in ('S1', 'S2'):
        residual = max_norm(tensors.casimir(family) - 0.75 * np.eye(8))
        entries.append(check_residual(suite, f'spin.casimir_{family}', residual, ctx.tol('clifford.particle_casimir')))

    mixed = max(max_norm(matrix_commutator(tensors.S1[a][b], tensors.S2[c][d]))
                for a, b, c, d in itertools.product(range(3), repeat=4))
    entries.append(check_residual(suite, 'spin.families_commute', mixed, ctx.tol('clifford.spin_families_commute')))
    return entries


# poincare

def _t_independence(generators, table, points: Sequence[MomentumPoint]) -> float:
    """Largest change of any closure residual between the sampled t and t = 0."""
    ops = generators.as_list()
    worst = 0.0
    pairs = [(i, j) for i, j in itertools.combinations(range(len(ops)), 2) if i in K_INDICES or j in K_INDICES]
    for i, j in pairs:
        bracket = commutator_op(ops[i], ops[j])
        expected = table.expected_op(generators, i, j)
        for q in points:
            at_t = grade_residuals(bracket.evaluate(q, 0) - expected.evaluate(q, 0))
            q0 = q.with_time(0.0)
            at_0 = grade_residuals(bracket.evaluate(q0, 0) - expected.evaluate(q0, 0))
            worst = max(worst, max(abs(at_t[g] - at_0[g]) for g in at_t))
    return worst


def poincare_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'poincare'
    params = ctx.params
    points = ctx.sample()
    few = points[:min(len(points), 20)]
    entries = []

    table = measure_structure_constants(params, ctx.sample(count=5, salt=11))
    entries.append(check_residual(suite, 'structure_constants.fit', table.fit_residual,
                                  ctx.tol('poincare.structure_fit'), table=table.to_dict()))

    canonical = generators_canonical(params)
    report = closure_report(canonical, table, points, ctx.tol('poincare.closure'),
                            ctx.tol('poincare.closure_second_order'))
    entries += entries_from_residuals(suite, 'canonical.closure', report.entries)
    entries.append(check_residual(suite, 'canonical.t_independence', _t_independence(canonical, table, points[:10]),
                                  ctx.tol('poincare.t_independence')))

    for names in JACOBI_TRIPLES:
        try:
            jacobi = jacobi_report(canonical, [names], points[:5], ctx.tol('poincare.jacobi')).entries
        except TwoBodyError as e:
            logger.warning(f"Jacobi identity for {names} not evaluable: {e}")
            jacobi = [ResidualEntry('jacobi(' + ', '.join(names) + ')', 0, 0, float('inf'),
                                    ctx.tol('poincare.jacobi'))]
        entries += entries_from_residuals(suite, 'canonical.', jacobi)

    raw = generators_raw(params)
    raw_report = closure_report(raw, table, few, ctx.tol('poincare.closure'),
                                ctx.tol('poincare.closure_second_order'))
    for relation in sorted({e.relation for e in raw_report.entries}):
        subset = [e for e in raw_report.entries if e.relation == relation]
        collapsed = entries_from_residuals(suite, 'raw.closure', subset)
        entries += findings_when_failing(collapsed) if 'K' in relation else collapsed

    h = hamiltonian_free(params)
    g0 = np.asarray(gamma8()[0])
    hermiticity = 0.0
    for q in few:
        value = h.evaluate(q, 0).zeroth.value
        hermiticity = max(hermiticity, max_norm(value - value.conj().T))
    entries.append(check_residual(suite, 'hamiltonian.hermiticity', hermiticity, ctx.tol('poincare.hermiticity')))

    ufn = foldy_U(params)
    foldy_points = ctx.sample(count=max(ctx.points, 100), salt=1)
    entries.append(check_residual(suite, 'foldy.unitarity', max(unitarity_defect(ufn, q) for q in foldy_points),
                                  ctx.tol('poincare.foldy_unitarity'), points=len(foldy_points)))
    origin = MomentumPoint((0.0,) * 6, params)
    entries.append(check_residual(suite, 'foldy.identity_at_rest', max_norm(ufn(origin, 0).value - np.eye(8)),
                                  ctx.tol('poincare.foldy_identity')))

    diagonal, relative = 0.0, 0.0
    urel_fn = foldy_U_relative(params)
    for q in foldy_points:
        u = ufn(q, 0).value
        hq = h.evaluate(q, 0).zeroth.value
        e = float(energy(q, 0).value.real)
        diagonal = max(diagonal, max_norm(u @ hq @ u.conj().T - e * g0))
        urel = urel_fn(q, 0).value
        target = g0 @ gamma_dot(q, 0, (1, 2, 3)).value + float(internal_mass(q, 0).value.real) * g0
        relative = max(relative, max_norm(urel @ hq @ urel.conj().T - target))
    entries.append(check_residual(suite, 'foldy.diagonalises', diagonal, ctx.tol('poincare.foldy_diagonalises')))
    entries.append(check_residual(suite, 'foldy.relative_stage', relative, ctx.tol('poincare.foldy_relative_stage')))

    printed = foldy_U(params, PRINTED)
    defect, predicted = 0.0, 0.0
    for q in foldy_points:
        defect = max(defect, unitarity_defect(printed, q))
        e, m_int = float(energy(q, 0).value.real), float(internal_mass(q, 0).value.real)
        predicted = max(predicted, abs((e + m_int) / (e + params.total_mass) - 1.0))
    entries.append(check_residual(suite, 'foldy.printed_unitarity', defect, ctx.tol('poincare.printed_unitarity'),
                                  kind=FINDING, predicted_defect=predicted))

    equivalence = equivalence_check(raw, canonical, ufn, few, ctx.tol('poincare.equivalence'))
    for name in GENERATOR_NAMES:
        subset = [e for e in equivalence.entries if e.relation.startswith(f'U {name} ')]
        collapsed = entries_from_residuals(suite, 'equivalence.', subset)
        entries += findings_when_failing(collapsed) if name.startswith('K') else collapsed

    h_unequal = hamiltonian_unequal(ctx.unequal)
    unequal_points = ctx.sample(params=ctx.unequal, salt=2)
    entries.append(check_residual(suite, 'unequal.square', max(square_residual(h_unequal, q) for q in unequal_points),
                                  ctx.tol('poincare.unequal_square'), m1=ctx.unequal.m1, m2=ctx.unequal.m2))
    return entries


# positions

def positions_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'positions'
    params = ctx.params
    points = ctx.sample(salt=3)
    few = points[:min(len(points), 20)]
    tol = ctx.tol('positions.canonical_pair')
    X = {index: position_X(index, params) for index in range(1, 7)}
    entries = []

    pair_entries: List[ResidualEntry] = []
    for a, b in itertools.product(range(1, 7), repeat=2):
        expected = constant_matrix((1j if a == b else 0.0) * np.eye(8), 'i delta')
        bracket = commutator_op(X[a], momentum(b, 8))
        pair_entries += op_equal_at(bracket, expected, points, tol, f'[X{a}, p{b}]').entries
    entries += entries_from_residuals(suite, 'canonical_pair', pair_entries)

    zero = constant_matrix(np.zeros((8, 8)), '0')
    commuting: List[ResidualEntry] = []
    for a, b in itertools.combinations(range(1, 7), 2):
        commuting += op_equal_at(commutator_op(X[a], X[b]), zero, points, tol, f'[X{a}, X{b}]').entries
    entries += entries_from_residuals(suite, 'commuting', commuting)

    for index in range(1, 7):
        try:
            dual = op_equal_at(X[index], position_X(index, params, CONJUGATED), few,
                               ctx.tol('positions.dual_construction'), f'X{index}').entries
        except TwoBodyError as e:
            logger.warning(f"Dual construction of X{index} not evaluable: {e}")
            dual = [ResidualEntry(f'X{index}', 0, 0, float('inf'), ctx.tol('positions.dual_construction'))]
        entries += entries_from_residuals(suite, 'dual_construction.', dual, kind=FINDING)

    h = hamiltonian_free(params)
    idempotent, trace, covariant = 0.0, 0.0, 0.0
    for q in points:
        projector = positive_projector(h, q)
        idempotent = max(idempotent, max_norm(projector @ projector - projector))
        trace = max(trace, abs(np.trace(projector).real - 4.0))
        covariant = max(covariant, max_norm(covariant_condition(params, q) @ projector))
    entries.append(check_residual(suite, 'projector.idempotent', idempotent, ctx.tol('positions.projector')))
    entries.append(check_residual(suite, 'projector.trace', trace, ctx.tol('positions.projector')))
    entries.append(check_residual(suite, 'projector.covariant_condition', covariant,
                                  ctx.tol('positions.covariant_condition')))
    return entries


# velocity

def extreme_points(params: TwoBodyParams, scale: float = 100.0) -> List[MomentumPoint]:
    """Relative momenta of magnitude scale * m along an axis, a diagonal and mixed with total momentum."""
    big = scale * params.total_mass
    diagonal = big / math.sqrt(3.0)
    momenta = [
        (0.0, 0.0, 0.0, big, 0.0, 0.0),
        (0.0, 0.0, 0.0, 0.0, 0.0, -big),
        (0.0, 0.0, 0.0, diagonal, diagonal, diagonal),
        (3.0, 0.0, 0.0, 0.0, big, 0.0),
    ]
    return [MomentumPoint(p, params) for p in momenta]


def velocity_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'velocity'
    params = ctx.params
    points = ctx.sample(salt=4) + extreme_points(params)
    spectra = [velocity_spectrum(params, q) for q in points]
    m = params.total_mass
    entries = []

    def scalar_energy(p: np.ndarray) -> float:
        return math.sqrt(float(p @ p) + m * m)

    worst = max(spectra, key=lambda s: s.max_square)
    entries.append(check_residual(suite, 'subluminal', worst.max_square, ctx.tol('velocity.subluminal'), strict=True,
                                  margin=1.0 - worst.max_square, worst_p=list(worst.point.p), points=len(points)))

    group, cross = 0.0, 0.0
    for spectrum in spectra:
        gradient = energy_gradient(spectrum.point)
        group = max(group, max(abs(spectrum.positive_expectations[a] - gradient[a + 3]) for a in range(3)))

        for index in range(6):
            fd = central_difference(scalar_energy, spectrum.point.p, index)
            cross = max(cross, relative_error(float(gradient[index]), float(fd)) if abs(fd) > 1e-3
                        else abs(float(gradient[index]) - float(fd)))
    entries.append(check_residual(suite, 'group_velocity', group, ctx.tol('velocity.group_velocity')))
    entries.append(check_residual(suite, 'gradient_cross_check', cross, ctx.tol('velocity.gradient_cross_check')))
    entries.append(check_residual(suite, 'hermiticity', max(s.hermiticity_residual for s in spectra),
                                  ctx.tol('velocity.hermiticity')))
    entries.append(check_residual(suite, 'eigenvalue_imaginary_residue', max(s.imaginary_residue for s in spectra),
                                  ctx.tol('velocity.eigen_residue')))
    return entries


# kinematics

def kinematics_suite(ctx: SuiteContext, count: int = 1000) -> List[ReportEntry]:
    suite = 'kinematics'
    samples = random_samples(count, ctx.seed)
    entries = [
        check_residual(suite, 'mass_round_trip', max(s.mass_round_trip_error for s in samples),
                       ctx.tol('kinematics.round_trip'), samples=count),
        check_residual(suite, 'dispersion', max(s.dispersion_error for s in samples),
                       ctx.tol('kinematics.dispersion'), samples=count),
    ]

    rng = ctx.rng(5)
    equal, symmetry, negative, decrease = 0.0, 0.0, 0.0, 0.0
    for m1, m2, k in zip(rng.uniform(0.1, 10.0, count), rng.uniform(0.1, 10.0, count), rng.uniform(0.0, 10.0, count)):
        k2 = float(k * k)
        equal = max(equal, relative_error(kprime_sq(k2, m1, m1), k2))
        forward, backward = kprime_sq(k2, m1, m2), kprime_sq(k2, m2, m1)
        symmetry = max(symmetry, relative_error(forward, backward))
        negative = max(negative, -forward)
    for m1, m2 in zip(rng.uniform(0.1, 10.0, 20), rng.uniform(0.1, 10.0, 20)):
        values = np.array([kprime_sq(k * k, m1, m2) for k in np.linspace(0.0, 10.0, 200)])
        decrease = max(decrease, float(-np.min(np.diff(values))))
        mass = np.array([invariant_mass(k * k, m1, m2) for k in np.linspace(0.0, 10.0, 200)])
        decrease = max(decrease, float(-np.min(np.diff(mass))))
    entries += [
        check_residual(suite, 'equal_mass_reduction', equal, ctx.tol('kinematics.equal_mass'), samples=count),
        check_residual(suite, 'mass_symmetry', symmetry, ctx.tol('kinematics.symmetry'), samples=count),
        check_residual(suite, 'kprime_nonnegative', max(0.0, negative), ctx.tol('kinematics.nonnegative')),
        check_residual(suite, 'monotonic', max(0.0, decrease), ctx.tol('kinematics.monotonic')),
    ]
    return entries


# interaction

def _gauge_shift_residual(params: TwoBodyParams, amplitude: float = 0.3, mode: int = 2) -> float:
    """A constant A_1 acts on a plane wave e^{ikx} u exactly as H(k - eA) u."""
    grid = GridSpec((1,), (16,), (2 * math.pi,), 0.1, 1)
    fields = FieldSpec(CONSTANT, amplitude=(amplitude, 0, 0, 0, 0, 0), charge=1.0)
    kinetic = KineticHamiltonian.from_params(params)
    applier = minimal_coupling(kinetic, fields, grid)
    x = grid.coordinates()[0]
    k = float(grid.wavenumbers()[0][mode])
    shifted = kinetic.matrix((k - fields.charge * amplitude, 0, 0, 0, 0, 0))
    worst = 0.0
    for column in range(kinetic.dim):
        spinor = np.eye(kinetic.dim)[column]
        wave = np.exp(1j * k * x)[:, None] * spinor
        expected = np.exp(1j * k * x)[:, None] * (shifted @ spinor)
        worst = max(worst, float(np.max(np.abs(applier(wave) - expected))))
    return worst


def _linearity_residual(params: TwoBodyParams, rng: np.random.Generator) -> float:
    grid = GridSpec((1,), (32,), (10.0,), 0.1, 1)
    fields = FieldSpec(COSINE, amplitude=(0.4, 0, 0, 0, 0, 0), wavenumber=(2 * math.pi / 10.0, 0, 0, 0, 0, 0))
    applier = minimal_coupling(KineticHamiltonian.from_params(params), fields, grid)
    shape = grid.shape + (8,)
    psi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    phi = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    alpha = complex(rng.normal(), rng.normal())
    return float(np.max(np.abs(applier(alpha * psi + phi) - alpha * applier(psi) - applier(phi))))


def interaction_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'interaction'
    params = ctx.params
    configured, _ = load_interaction_config({k: v for k, v in ctx.interaction.items() if k != 'r'})
    use_configured = 'potential' in ctx.interaction
    points = ctx.sample(salt=6)
    rng = ctx.rng(6)
    radii = rng.uniform(0.5, 5.0, len(points))
    couplings = rng.uniform(0.0, 1.0, len(points))
    m = params.total_mass
    square_v, square16, spectrum16 = 0.0, 0.0, 0.0

    for q, r, e2 in zip(points, radii, couplings):
        p2 = float(np.dot(q.p, q.p))
        potential = configured if use_configured else PotentialSpec(INVERSE_SQUARE, e2=float(e2))
        value = hamiltonian_V(params, potential, float(r)).evaluate(q, 0).zeroth.value
        expected = (p2 + m * m + potential.value(float(r))) * np.eye(8)
        square_v = max(square_v, max_norm(value @ value - expected))

        h16 = hamiltonian_coulomb16(params, float(r), float(e2))
        value = h16.evaluate(q, 0).zeroth.value
        scale = p2 + float(e2) ** 2 / float(r) ** 2 + m * m
        square16 = max(square16, max_norm(value @ value - scale * np.eye(16)))
        expected_spectrum = np.array([-math.sqrt(scale)] * 8 + [math.sqrt(scale)] * 8)
        spectrum16 = max(spectrum16, float(np.max(np.abs(frozen_spectrum(h16, q) - expected_spectrum))))

    free = op_equal_at(hamiltonian_V(params, PotentialSpec.zero(), 1.0), hamiltonian_free(params), points,
                       ctx.tol('interaction.free_reduction'), 'H_V(V=0) == H').max_residual
    return [
        check_residual(suite, 'square_V', square_v, ctx.tol('interaction.square_V'),
                       potential=configured.kind if use_configured else INVERSE_SQUARE),
        check_residual(suite, 'square_coulomb16', square16, ctx.tol('interaction.square_coulomb16')),
        check_residual(suite, 'spectrum_coulomb16', spectrum16, ctx.tol('interaction.spectrum_coulomb16')),
        check_residual(suite, 'free_reduction', free, ctx.tol('interaction.free_reduction')),
        check_residual(suite, 'gauge_shift', _gauge_shift_residual(params), ctx.tol('interaction.gauge_shift')),
        check_residual(suite, 'linearity', _linearity_residual(params, ctx.rng(7)), ctx.tol('interaction.linearity')),
    ]


# evolve

def evolve_suite(ctx: SuiteContext) -> List[ReportEntry]:
    suite = 'evolve'
    section = ctx.evolve if 'grid' in ctx.evolve else DEFAULT_EVOLVE
    config = EvolveConfig.from_config(section, ctx.params)
    stepper = build_stepper(config)
    state = init_gaussian(config.grid, config.packet, stepper.kinetic, stepper.shift)
    round_trip = float(np.max(np.abs(config.grid.ifft(config.grid.fft(state.psi)) - state.psi)))
    result = run(state, stepper, config.params, snapshots=config.snapshots)
    diagnostics = diagnose(result.snapshots, config.params, config.packet, config.grid.active_axes,
                           stepper.shift)

    entries = [
        check_residual(suite, 'norm_drift', diagnostics.max_norm_drift, ctx.tol('evolve.norm_drift'),
                       steps=config.grid.steps),
        check_residual(suite, 'energy_drift', diagnostics.max_energy_drift, ctx.tol('evolve.energy_drift')),
        check_residual(suite, 'positive_fraction', 1.0 - diagnostics.min_positive_fraction,
                       ctx.tol('evolve.positive_fraction')),
        check_residual(suite, 'fourier_round_trip', round_trip, ctx.tol('evolve.fourier_round_trip')),
        check_residual(suite, 'aliasing', result.aliasing_number, ctx.tol('evolve.aliasing'), kind=FINDING),
    ]
    if result.method == EXACT:
        entries.append(check_residual(suite, 'unitarity', result.unitarity_residual, ctx.tol('evolve.unitarity')))
    for axis in config.grid.active_axes:
        entries.append(check_residual(suite, f'group_velocity.x{axis}', diagnostics.velocity_error(axis),
                                      ctx.tol('evolve.group_velocity'),
                                      fitted=diagnostics.fitted_velocity[axis - 1],
                                      predicted=diagnostics.predicted_velocity[axis - 1]))
        if config.packet.component_mode == POSITIVE_ENERGY:
            entries.append(check_residual(suite, f'subluminal.x{axis}', abs(diagnostics.fitted_velocity[axis - 1]),
                                          ctx.tol('evolve.subluminal'), strict=True))

    rest = at_rest(config)
    rest_result, rest_diagnostics = evolve(rest)
    entries.append(check_residual(suite, 'centroid_stationary', rest_diagnostics.max_centroid_drift,
                                  ctx.tol('evolve.centroid_stationary'), steps=rest.grid.steps,
                                  snapshots=len(rest_result.snapshots)))

    strang = dict(DEFAULT_STRANG, **ctx.evolve.get('strang', {}))
    grid_section = dict(strang['grid'], dt=strang['dt'], steps=1)
    convergence = strang_convergence(ctx.params, FieldSpec.from_config(strang['field']),
                                     GridSpec.from_config(grid_section), PacketSpec.from_config(strang['packet']),
                                     float(strang['duration']), float(strang['dt']))
    entries.append(check_window(suite, 'strang_convergence', convergence['ratio'], STRANG_RATIO_WINDOW,
                                error_dt=convergence['error_dt'], error_half_dt=convergence['error_half_dt']))
    return entries


SUITE_RUNNERS: Dict[str, Callable[[SuiteContext], List[ReportEntry]]] = {
    'clifford': clifford_suite,
    'poincare': poincare_suite,
    'positions': positions_suite,
    'velocity': velocity_suite,
    'kinematics': kinematics_suite,
    'interaction': interaction_suite,
    'evolve': evolve_suite,
}


# report

@dataclass
class Report:
    suite: str
    config: Dict[str, Any]
    entries: List[ReportEntry]
    notes: List[str] = field(default_factory=list)
    timestamp: str = ''

    @property
    def summary(self) -> Dict[str, Any]:
        checks = [e for e in self.entries if e.kind != FINDING]
        failed = sum(1 for e in checks if not e.passed)
        return {
            'passed': len(checks) - failed,
            'failed': failed,
            'findings': len(self.entries) - len(checks),
            'overall_pass': failed == 0,
        }

    @property
    def overall_pass(self) -> bool:
        return self.summary['overall_pass']

    @property
    def exit_code(self) -> int:
        return EXIT_PASS if self.overall_pass else EXIT_FAILURE

    def suites(self) -> List[str]:
        return sorted({e.suite for e in self.entries})

    def to_dict(self, include_timestamp: bool = True) -> Dict[str, Any]:
        payload = {
            'schema': SCHEMA_VERSION,
            'artifact_version': ARTIFACT_VERSION,
            'suite': self.suite,
            'config': self.config,
            'entries': [e.to_dict() for e in self.entries],
            'summary': self.summary,
            'notes': self.notes,
        }
        if include_timestamp:
            payload['timestamp'] = self.timestamp
        return payload

    def to_json(self, include_timestamp: bool = True) -> str:
        return json.dumps(_plain(self.to_dict(include_timestamp)), sort_keys=True, indent=2)


def _plain(value: Any) -> Any:
    """Convert numpy scalars and tuples so json.dumps sees only builtin types."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def run_suite(name: str, config: Dict[str, Any]) -> Report:
    """Run one suite (or ``all``) and return its sorted report."""
    if name != ALL and name not in SUITE_RUNNERS:
        raise ConfigError(f"Unknown suite {name!r}; expected one of {SUITES + (ALL,)}")
    ctx = SuiteContext.from_config(config)
    names = SUITES if name == ALL else (name,)
    entries: List[ReportEntry] = []
    notes: List[str] = []
    for suite in names:
        logger.info(f"Running {suite} suite (seed {ctx.seed:#x}, {ctx.points} points)")
        suite_entries = SUITE_RUNNERS[suite](ctx)
        failures = sum(1 for e in suite_entries if e.kind != FINDING and not e.passed)
        logger.info(f"Finished {suite} suite: {len(suite_entries)} entries, {failures} failed")
        for entry in suite_entries:
            if entry.kind == FINDING and not entry.passed:
                logger.warning(f"Finding {entry.suite}: {entry.check} residual {entry.residual:.3e}")
        entries.extend(suite_entries)
        notes.extend(SUITE_NOTES.get(suite, []))
    entries.sort(key=lambda e: (e.suite, e.check))
    timestamp = datetime.now(timezone.utc).isoformat(timespec='seconds')
    return Report(name, ctx.echo(), entries, notes, timestamp)


def write_report_json(report: Report, path: str) -> None:
    with open(path, 'w') as f:
        f.write(report.to_json())
        f.write('\n')
    logger.info(f"Wrote report to {path}")


def write_suite_csvs(report: Report, directory: str) -> List[str]:
    """One entry table per suite, named <suite>_entries.csv."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for suite in report.suites():
        path = os.path.join(directory, f'{suite}_entries.csv')
        entries_frame([e for e in report.entries if e.suite == suite]).to_csv(path, index=False)
        paths.append(path)
    logger.info(f"Wrote {len(paths)} entry tables to {directory}")
    return paths
