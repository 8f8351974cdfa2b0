import math

import numpy as np
import pytest
from pytest import raises

from config.tolerances import STRANG_RATIO_WINDOW
from services.evolution import (EXACT, RAW_SPINOR, STRANG, EvolveConfig, PacketSpec, Stepper, at_rest,
                                build_stepper, diagnose, evolve, init_gaussian, positive_fraction,
                                predicted_group_velocity, run, snapshot_frame, strang_convergence,
                                write_snapshot_csv)
from services.grid import GridSpec
from services.interaction import CONSTANT, COSINE, FieldSpec, KineticHamiltonian, minimal_coupling
from services.report_service import DEFAULT_EVOLVE, DEFAULT_STRANG
from utils.errors import ConfigError, DomainError, GridError

SHORT_RUN = {
    'grid': {'active_axes': [4], 'n': [64], 'L': [64.0], 'dt': 0.05, 'steps': 20},
    'packet': {'center_x': [0] * 6, 'center_p': [0, 0, 0, 1.0, 0, 0], 'width': 4.0},
    'snapshots': 5,
}


@pytest.fixture
def config(params):
    return EvolveConfig.from_config(SHORT_RUN, params)


@pytest.fixture
def kinetic(params):
    return KineticHamiltonian.from_params(params)


def test_stepper_selection(config, kinetic):
    grid = config.grid
    assert build_stepper(config).method == EXACT
    cosine = FieldSpec(COSINE, amplitude=(0, 0, 0, 0.2, 0, 0), wavenumber=(0, 0, 0, 0.5, 0, 0))
    assert Stepper(minimal_coupling(kinetic, cosine, grid)).method == STRANG
    with raises(GridError):
        Stepper(minimal_coupling(kinetic, cosine, grid), EXACT)
    with raises(ConfigError):
        Stepper(minimal_coupling(kinetic, FieldSpec.none(), grid), 'euler')


def test_packet_is_normalised_positive_energy(config, kinetic):
    state = init_gaussian(config.grid, config.packet, kinetic)
    assert config.grid.norm(state.psi) == pytest.approx(1.0, abs=1e-14)
    assert positive_fraction(state, kinetic) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize('packet', [
    {'center_x': [0] * 6, 'center_p': [0] * 6, 'width': 0.5},
    {'center_x': [0, 0, 0, 40.0, 0, 0], 'center_p': [0] * 6, 'width': 4.0},
    {'center_x': [0] * 6, 'center_p': [1.0, 0, 0, 0, 0, 0], 'width': 4.0},
    {'center_x': [0] * 6, 'center_p': [0] * 6, 'width': 4.0, 'spinor': [1, 0, 0, 0]},
])
def test_invalid_packets(config, kinetic, packet):
    with raises(GridError):
        init_gaussian(config.grid, PacketSpec.from_config(packet), kinetic)


def test_exact_run_conserves_norm_and_energy(config):
    result, diagnostics = evolve(config)
    assert result.method == EXACT
    assert result.unitarity_residual <= 1e-12
    assert result.aliasing_number < math.pi
    assert diagnostics.max_norm_drift <= 1e-10
    assert diagnostics.max_energy_drift <= 1e-10
    assert diagnostics.min_positive_fraction == pytest.approx(1.0, abs=1e-10)
    assert len(result.snapshots) == 6
    assert result.snapshots[-1].t == pytest.approx(1.0)
    displacement = result.snapshots[-1].centroid[3] - result.snapshots[0].centroid[3]
    assert displacement == pytest.approx(1 / math.sqrt(2), rel=0.05)
    assert diagnostics.fitted_velocity[3] == pytest.approx(1 / math.sqrt(2), rel=0.05)


def test_predicted_velocity_uses_kinetic_momentum(config):
    shift = np.array([0, 0, 0, 1.5, 0, 0])
    free = predicted_group_velocity(config.params, config.packet)
    shifted = predicted_group_velocity(config.params, config.packet, shift)
    assert free[3] == pytest.approx(1 / math.sqrt(2))
    assert shifted[3] == pytest.approx(-0.5 / math.sqrt(1.25))
    assert np.all(shifted[[0, 1, 2, 4, 5]] == 0.0)


@pytest.mark.parametrize('center_p4, field_a4', [(1.0, 0.0), (0.0, 1.5), (1.0, -0.5)])
def test_group_velocity_under_constant_field(params, center_p4, field_a4):
    section = dict(SHORT_RUN, method=EXACT,
                   packet=dict(SHORT_RUN['packet'], center_p=[0, 0, 0, center_p4, 0, 0]),
                   field={'kind': CONSTANT, 'amplitude': [0, 0, 0, field_a4, 0, 0]})
    result, diagnostics = evolve(EvolveConfig.from_config(section, params))
    kinetic_p = center_p4 - field_a4
    expected = kinetic_p / math.sqrt(kinetic_p ** 2 + 1)
    assert result.method == EXACT
    assert diagnostics.predicted_velocity[3] == pytest.approx(expected)
    assert diagnostics.fitted_velocity[3] == pytest.approx(expected, rel=0.05)
    assert diagnostics.velocity_error(4) <= 0.05
    assert diagnostics.max_norm_drift <= 1e-10
    assert diagnostics.min_positive_fraction == pytest.approx(1.0, abs=1e-10)


def test_zero_momentum_packet_stays_put(config):
    rest = at_rest(config)
    assert rest.packet.center_p == (0.0,) * 6
    assert rest.fields.is_zero
    result, diagnostics = evolve(rest)
    assert len(result.snapshots) == 6
    assert diagnostics.predicted_velocity == (0.0,) * 6
    assert diagnostics.max_centroid_drift < 1e-6


def test_raw_spinor_packet_runs(params):
    section = dict(SHORT_RUN, packet=dict(SHORT_RUN['packet'], component_mode=RAW_SPINOR))
    result, diagnostics = evolve(EvolveConfig.from_config(section, params))
    assert diagnostics.max_norm_drift <= 1e-10
    assert diagnostics.min_positive_fraction < 1.0


def test_wrap_around_is_refused(config):
    stepper = build_stepper(config)
    state = init_gaussian(config.grid, config.packet, stepper.kinetic)
    with raises(GridError):
        run(state, stepper, config.params, steps=2000)


def test_diagnostics_need_two_snapshots(config):
    result, _ = evolve(config)
    with raises(DomainError):
        diagnose(result.snapshots[:1], config.params, config.packet)


def test_snapshot_csv(config, tmp_path):
    result, _ = evolve(config)
    frame = snapshot_frame(result.snapshots)
    assert list(frame.columns[:4]) == ['t', 'norm', 'energy', 'pos_fraction']
    assert len(frame) == len(result.snapshots)
    path = tmp_path / 'snapshots.csv'
    write_snapshot_csv(result.snapshots, str(path))
    assert path.read_text().startswith('t,norm,energy,pos_fraction,centroid_x1')


@pytest.mark.parametrize('section', [{}, {'grid': SHORT_RUN['grid']},
                                     dict(SHORT_RUN, grid=dict(SHORT_RUN['grid'], n=[60]))])
def test_invalid_evolve_config(params, section):
    with raises(ConfigError):
        EvolveConfig.from_config(section, params)


@pytest.mark.slow
def test_group_velocity_matches_energy_gradient(params):
    result, diagnostics = evolve(EvolveConfig.from_config(DEFAULT_EVOLVE, params))
    assert diagnostics.predicted_velocity[3] == pytest.approx(2 / math.sqrt(5))
    assert diagnostics.velocity_error(4) <= 1e-3
    assert diagnostics.max_norm_drift <= 1e-10


@pytest.mark.slow
def test_strang_splitting_is_second_order(params):
    grid = GridSpec.from_config(dict(DEFAULT_STRANG['grid'], dt=DEFAULT_STRANG['dt'], steps=1))
    convergence = strang_convergence(params, FieldSpec.from_config(DEFAULT_STRANG['field']), grid,
                                     PacketSpec.from_config(DEFAULT_STRANG['packet']),
                                     DEFAULT_STRANG['duration'], DEFAULT_STRANG['dt'])
    low, high = STRANG_RATIO_WINDOW
    assert low <= convergence['ratio'] <= high
    assert convergence['error_half_dt'] < convergence['error_dt']
