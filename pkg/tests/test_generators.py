import itertools
import math

import numpy as np
import pytest
from pytest import raises

from services.clifford_core import gamma8, max_norm
from services.generators import (GENERATOR_NAMES, PRINTED, closure_report, energy, equivalence_check, foldy_U,
                                 generators_canonical, generators_raw, hamiltonian, hamiltonian_free,
                                 hamiltonian_unequal, internal_mass, jacobi_report, measure_structure_constants,
                                 relative_coefficient, square_residual, unitarity_defect)
from services.opcalc import deterministic_points, op_equal_at, sample_points
from utils.errors import DomainError, IndexRangeError

JACOBI_SAMPLE = [('J12', 'K1', 'P2'), ('P0', 'K1', 'K2')]


@pytest.fixture(scope='module')
def table():
    from services.params import TwoBodyParams
    params = TwoBodyParams.equal_mass(1.0)
    return measure_structure_constants(params, sample_points(params, 5, 0x5EED + 11))


def test_hamiltonian_squares_to_energy(points, unequal_params):
    assert max(square_residual(hamiltonian(q.params), q) for q in points) <= 1e-12
    unequal_points = sample_points(unequal_params, 6, 2)
    assert max(square_residual(hamiltonian_unequal(unequal_params), q) for q in unequal_points) <= 1e-12


def test_mass_modes_are_enforced(params, unequal_params):
    with raises(DomainError):
        hamiltonian_free(unequal_params)
    with raises(DomainError):
        hamiltonian_unequal(params)
    with raises(DomainError):
        generators_raw(unequal_params)


def test_relative_coefficient(params, unequal_params):
    assert relative_coefficient(params) == 1.0
    assert relative_coefficient(unequal_params) == pytest.approx(3 / math.sqrt(2))


def test_foldy_transformation(params, points):
    ufn = foldy_U(params)
    g0 = np.asarray(gamma8()[0])
    h = hamiltonian_free(params)
    for q in points:
        assert unitarity_defect(ufn, q) <= 1e-12
        u = ufn(q, 0).value
        e = float(energy(q, 0).value.real)
        assert max_norm(u @ h.evaluate(q, 0).zeroth.value @ u.conj().T - e * g0) <= 1e-10
    assert max_norm(ufn(points[0], 0).value - np.eye(8)) <= 1e-14


def test_printed_normalisation_defect(params, points):
    printed = foldy_U(params, PRINTED)
    for q in points:
        u = printed(q, 0).value
        e, m_int = float(energy(q, 0).value.real), float(internal_mass(q, 0).value.real)
        ratio = (e + m_int) / (e + params.total_mass)
        assert max_norm(u @ u.conj().T - ratio * np.eye(8)) <= 1e-12


def test_unknown_variant(params):
    with raises(DomainError):
        foldy_U(params, 'halfway')


def test_structure_table(table):
    assert table.fit_residual <= 1e-9
    names = list(GENERATOR_NAMES)
    j12, p1, p2 = names.index('J12'), names.index('P1'), names.index('P2')
    assert table.constants[j12, p1, p2] == 1j
    assert np.all(table.constants[p1, p2] == 0)
    for i, j in itertools.combinations(range(10), 2):
        assert np.all(table.constants[i, j] == -table.constants[j, i])
    assert '[P1, J12]' in table.to_dict()


def test_canonical_closure_on_selected_pairs(params, table):
    names = list(GENERATOR_NAMES)
    pairs = [(names.index('J12'), names.index('P1')), (names.index('P0'), names.index('K1')),
             (names.index('K1'), names.index('P1'))]
    report = closure_report(generators_canonical(params), table, deterministic_points(params), 1e-9, 1e-10, pairs)
    assert report.passed, report.max_by_order()


def test_rotation_extension(params):
    generators = generators_canonical(params)
    report = op_equal_at(generators.rotation(2, 1), generators.J[(1, 2)].scaled(-1.0),
                         deterministic_points(params), 1e-15)
    assert report.passed
    with raises(IndexRangeError):
        generators['K4']
    with raises(IndexRangeError):
        generators.rotation(0, 1)


@pytest.mark.slow
def test_canonical_closure_all_pairs(params, table):
    points = sample_points(params, 4, 0x5EED)
    report = closure_report(generators_canonical(params), table, points, 1e-9, 1e-10)
    assert len({e.relation for e in report.entries}) == 45
    assert report.passed, report.max_by_order()


@pytest.mark.slow
def test_jacobi_identity(params):
    report = jacobi_report(generators_canonical(params), JACOBI_SAMPLE, deterministic_points(params)[:3], 1e-9)
    assert report.passed


@pytest.mark.slow
def test_equivalence_outside_boosts(params):
    points = sample_points(params, 2, 3)
    report = equivalence_check(generators_raw(params), generators_canonical(params), foldy_U(params), points, 1e-9)
    gating = [e for e in report.entries if 'K' not in e.relation]
    assert gating
    assert all(e.passed for e in gating)
