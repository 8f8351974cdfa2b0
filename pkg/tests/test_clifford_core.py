import itertools
import json

import numpy as np
import pytest
from pytest import raises

from services.clifford_core import (LEVI_CIVITA, commutator, dump_matrix_set, gamma8, gamma16, matrices_close,
                                    matrix_from_json, max_norm, pauli, spin_s, spin_tau, spin_tensors,
                                    structure_constants, write_matrix_set)
from utils.errors import IndexRangeError


@pytest.mark.parametrize('g', [gamma8(), gamma16()], ids=['gamma8', 'gamma16'])
def test_clifford_relations(g):
    residuals = g.anticommutator_residuals()
    assert len(residuals) == len(g) * (len(g) + 1) // 2
    assert max(residuals.values()) <= 1e-12
    assert max(g.hermiticity_residuals()) <= 1e-15


def test_set_sizes():
    assert (gamma8().dim, len(gamma8())) == (8, 7)
    assert (gamma16().dim, len(gamma16())) == (16, 8)
    assert gamma16().metric == (1, -1, -1, -1, -1, -1, -1, -1)


def test_gamma0_squares_to_identity():
    g0 = gamma8()[0]
    assert matrices_close(g0 @ g0, np.eye(8))


def test_s_and_tau_commute():
    for a, b in itertools.product((1, 2, 3), repeat=2):
        assert max_norm(commutator(spin_s(a), spin_tau(b))) <= 1e-15


@pytest.mark.parametrize('fn', [spin_s, spin_tau, pauli])
@pytest.mark.parametrize('index', [0, 4, -1, 1.0])
def test_index_out_of_range(fn, index):
    with raises(IndexRangeError):
        fn(index)


def test_constant_matrices_are_read_only():
    with raises(ValueError):
        spin_s(1)[0, 0] = 5.0


def test_structure_constants_of_pauli_halves():
    measured = structure_constants([0.5 * pauli(a) for a in (1, 2, 3)])
    assert np.max(np.abs(measured - 1j * LEVI_CIVITA)) <= 1e-12


def test_spin_casimirs():
    tensors = spin_tensors()
    for family in ('S1', 'S2'):
        assert matrices_close(tensors.casimir(family), 0.75 * np.eye(8))
    spectrum = np.sort(tensors.casimir_spectrum('S'))
    assert np.allclose(spectrum, [0, 0, 2, 2, 2, 2, 2, 2], atol=1e-10)


def test_spin_tensor_antisymmetry_and_relative_names():
    tensors = spin_tensors()
    for a, b in itertools.product(range(3), repeat=2):
        assert matrices_close(tensors.S[a][b], -tensors.S[b][a])
    assert tensors.S2_relative(4, 5) is tensors.S2[0][1]
    with raises(IndexRangeError):
        tensors.S2_relative(3, 5)


def test_families_commute():
    tensors = spin_tensors()
    worst = max(max_norm(commutator(tensors.S1[a][b], tensors.S2[c][d]))
                for a, b, c, d in itertools.product(range(3), repeat=4))
    assert worst <= 1e-13


def test_write_matrix_set(tmp_path):
    path = tmp_path / 'gamma8.json'
    write_matrix_set('gamma8', str(path))
    payload = json.loads(path.read_text())
    assert payload['dim'] == 8
    assert sorted(payload['matrices']) == [f'Gamma_{mu}' for mu in range(7)]
    assert matrices_close(matrix_from_json(payload['matrices']['Gamma_4']), gamma8()[4], atol=0.0)


def test_spin_dump_lists_every_family():
    names = dump_matrix_set('spin')['matrices']
    assert {'S1_12', 'S2_23', 'S_13', 's_1', 'tau_3'} <= set(names)


def test_unknown_matrix_set():
    with raises(IndexRangeError):
        dump_matrix_set('gamma32')
