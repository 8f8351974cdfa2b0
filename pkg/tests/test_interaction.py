import math

import numpy as np
import pytest
from pytest import raises

from services.clifford_core import max_norm
from services.grid import GridSpec
from services.interaction import (CONSTANT, COSINE, GENERAL, INVERSE_SQUARE, POWER_LAW, PULSE, FieldSpec,
                                  KineticHamiltonian, PotentialSpec, frozen_spectrum, hamiltonian_V,
                                  hamiltonian_coulomb16, load_interaction_config, minimal_coupling)
from services.opcalc import MomentumPoint
from services.params import TwoBodyParams
from utils.errors import ConfigError, DomainError, GridError


@pytest.fixture
def q(params):
    return MomentumPoint((0.4, -0.2, 1.0, 0.3, 0.9, -1.5), params)


def test_square_root_hamiltonian(params, q):
    potential = PotentialSpec(INVERSE_SQUARE, e2=0.7)
    value = hamiltonian_V(params, potential, 1.5).evaluate(q, 0).zeroth.value
    scale = float(np.dot(q.p, q.p)) + 1.0 + 0.49 / 2.25
    assert max_norm(value @ value - scale * np.eye(8)) <= 1e-12


def test_coulomb16_spectrum(q):
    params = TwoBodyParams.equal_mass(1.0, e2=0.5)
    q = MomentumPoint(q.p, params)
    h = hamiltonian_coulomb16(params, 2.0)
    assert h.dim == 16
    scale = float(np.dot(q.p, q.p)) + 0.25 / 4.0 + 1.0
    eigenvalues = frozen_spectrum(h, q)
    expected = [-math.sqrt(scale)] * 8 + [math.sqrt(scale)] * 8
    assert np.max(np.abs(eigenvalues - expected)) <= 1e-10


def test_zero_potential_is_free(params, q):
    from services.generators import hamiltonian_free
    free = hamiltonian_free(params).evaluate(q, 0).zeroth.value
    assert max_norm(hamiltonian_V(params, PotentialSpec.zero(), 1.0).evaluate(q, 0).zeroth.value - free) <= 1e-13


@pytest.mark.parametrize('r', [0.0, 1e-4, -1.0])
def test_radius_below_cutoff(params, r):
    with raises(DomainError):
        hamiltonian_V(params, PotentialSpec(INVERSE_SQUARE, e2=1.0), r)
    with raises(DomainError):
        hamiltonian_coulomb16(params, r)


def test_negative_radicand(params):
    with raises(DomainError):
        hamiltonian_V(params, PotentialSpec(POWER_LAW, coefficient=-10.0, exponent=0.0), 1.0)


def test_potential_specs():
    assert PotentialSpec(GENERAL, fn=lambda r: 2.0 * r).value(3.0) == 6.0
    assert PotentialSpec.from_config({'kind': POWER_LAW, 'coefficient': 2, 'exponent': -1}).value(4.0) == 0.5
    with raises(DomainError):
        PotentialSpec('yukawa')
    with raises(DomainError):
        PotentialSpec(GENERAL)
    for section in ({'kind': GENERAL}, {'kind': INVERSE_SQUARE}, {}):
        with raises(ConfigError):
            PotentialSpec.from_config(section)


def test_field_envelope_and_validation():
    pulse = FieldSpec(PULSE, amplitude=(1, 0, 0, 0, 0, 0), duration=2.0)
    assert pulse.envelope(1.0) == pytest.approx(1.0)
    assert pulse.envelope(-0.1) == 0.0
    assert pulse.envelope(2.5) == 0.0
    assert not pulse.is_static
    with raises(DomainError):
        FieldSpec(CONSTANT, amplitude=(1.0, 2.0))
    with raises(DomainError):
        FieldSpec(PULSE, duration=0.0)
    with raises(DomainError):
        FieldSpec('laser')


def test_uniform_cosine_value():
    field = FieldSpec(COSINE, amplitude=(2.0, 0, 0, 0, 0, 0), phase=(math.pi / 3, 0, 0, 0, 0, 0))
    assert field.is_uniform
    assert field.uniform_value()[0] == pytest.approx(1.0)


def test_field_must_vary_along_active_axes():
    grid = GridSpec((1,), (16,), (1.0,), 0.1, 1)
    field = FieldSpec(COSINE, amplitude=(0, 1, 0, 0, 0, 0), wavenumber=(0, 1, 0, 0, 0, 0))
    with raises(GridError):
        field.sample(grid, 0.0)


def test_kinetic_matrix_squares_to_energy(params):
    kinetic = KineticHamiltonian.from_params(params)
    k = np.array([0.5, 0, 0, 1.5, 0, -0.2])
    h = kinetic.matrix(k)
    assert max_norm(h @ h - (k @ k + 1.0) * np.eye(8)) <= 1e-13


def test_constant_potential_shifts_plane_waves(params):
    grid = GridSpec((1,), (16,), (2 * math.pi,), 0.1, 1)
    amplitude = 0.3
    kinetic = KineticHamiltonian.from_params(params)
    applier = minimal_coupling(kinetic, FieldSpec(CONSTANT, amplitude=(amplitude, 0, 0, 0, 0, 0)), grid)
    x = grid.coordinates()[0]
    k = grid.wavenumbers()[0][3]
    spinor = np.arange(1, 9, dtype=complex)
    wave = np.exp(1j * k * x)[:, None] * spinor
    expected = np.exp(1j * k * x)[:, None] * (kinetic.matrix((k - amplitude, 0, 0, 0, 0, 0)) @ spinor)
    assert np.max(np.abs(applier(wave) - expected)) <= 1e-10


def test_applier_checks_shape(params):
    grid = GridSpec((1,), (16,), (1.0,), 0.1, 1)
    applier = minimal_coupling(KineticHamiltonian.from_params(params), FieldSpec.none(), grid)
    with raises(GridError):
        applier(np.zeros((16, 4)))
    psi = np.ones((16, 8), dtype=complex)
    assert np.array_equal(applier(psi), applier.kinetic.apply(psi, grid))


def test_load_interaction_config():
    potential, fields = load_interaction_config({})
    assert potential.value(1.0) == 0.0
    assert fields.is_zero
    potential, fields = load_interaction_config({'potential': {'kind': INVERSE_SQUARE, 'e2': 0.5},
                                                 'fields': {'kind': COSINE, 'amplitude': [0.1, 0, 0, 0, 0, 0]}})
    assert potential.value(0.5) == pytest.approx(1.0)
    assert fields.kind == COSINE
    with raises(ConfigError):
        load_interaction_config([])
