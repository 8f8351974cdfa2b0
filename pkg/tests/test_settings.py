import json

import pytest
from pytest import raises

from config.settings import load_json_file, load_suite_config, parse_seed
from config.tolerances import DEFAULT_POINTS, DEFAULT_SEED, TOLERANCES, tolerance_for
from services.params import TwoBodyParams
from utils.errors import ConfigError, DomainError


@pytest.mark.parametrize('value,expected', [(7, 7), ('42', 42), ('0x5EED', 0x5EED), ('0X10', 16)])
def test_parse_seed(value, expected):
    assert parse_seed(value) == expected


def test_parse_seed_rejects_garbage():
    with raises(ConfigError):
        parse_seed('seed')


def test_defaults():
    config = load_suite_config()
    assert config['seed'] == DEFAULT_SEED
    assert config['points'] == DEFAULT_POINTS
    assert config['tolerance'] is None
    assert config['params'] == config['interaction'] == config['evolve'] == {}


def test_file_values(tmp_path):
    path = tmp_path / 'suite.json'
    path.write_text(json.dumps({'seed': '0x10', 'points': 3, 'params': {'m': 2.0}}))
    config = load_suite_config(str(path))
    assert (config['seed'], config['points'], config['params']) == (16, 3, {'m': 2.0})


def test_environment_overrides_file(tmp_path, monkeypatch):
    path = tmp_path / 'suite.json'
    path.write_text(json.dumps({'seed': 3, 'points': 3}))
    monkeypatch.setenv('TWOBODY_SEED', '0x7')
    monkeypatch.setenv('TWOBODY_POINTS', '9')
    monkeypatch.setenv('TWOBODY_TOL', '1e-3')
    config = load_suite_config(str(path))
    assert (config['seed'], config['points'], config['tolerance']) == (7, 9, 1e-3)


@pytest.mark.parametrize('content', ['{"seed": 1, "colour": "red"}', '[1, 2]', '{not json'])
def test_bad_config_files(tmp_path, content):
    path = tmp_path / 'suite.json'
    path.write_text(content)
    with raises(ConfigError):
        load_suite_config(str(path))


def test_missing_file(tmp_path):
    with raises(ConfigError):
        load_json_file(str(tmp_path / 'absent.json'))


def test_tolerance_override():
    assert tolerance_for('poincare.closure') == TOLERANCES['poincare.closure']
    assert tolerance_for('poincare.closure', 1e-3) == 1e-3
    with raises(KeyError):
        tolerance_for('poincare.unknown')


def test_params_from_config():
    equal = TwoBodyParams.from_config({'m': 4.0})
    assert (equal.m1, equal.m2, equal.total_mass) == (2.0, 2.0, 4.0)
    unequal = TwoBodyParams.from_config({'m1': 1.0, 'm2': 3.0, 'e2': 0.2})
    assert not unequal.is_equal_mass
    assert unequal.total_mass == 4.0
    assert unequal.relative_scale == pytest.approx(4.0 / 3.0 ** 0.5)
    for section in ({'m': 1.0, 'm1': 0.5}, {'m1': 1.0}, {'m': -1.0}):
        with raises(ConfigError):
            TwoBodyParams.from_config(section)
    with raises(DomainError):
        TwoBodyParams.equal_mass(0.0)
