import json

import pandas as pd
import pytest

import TwoBodyApp
from TwoBodyApp import main

SHORT_RUN = {
    'grid': {'active_axes': [4], 'n': [64], 'L': [64.0], 'dt': 0.05, 'steps': 20},
    'packet': {'center_x': [0] * 6, 'center_p': [0, 0, 0, 1.0, 0, 0], 'width': 4.0},
}


def _read(path):
    return json.loads(path.read_text())


def test_gen_matrices(tmp_path):
    out = tmp_path / 'gamma16.json'
    assert main(['gen-matrices', '--set', 'gamma16', '--out', str(out)]) == 0
    assert _read(out)['dim'] == 16


def test_run_suite_writes_report(tmp_path, capsys):
    out = tmp_path / 'report.json'
    code = main(['run-suite', '--suite', 'clifford', '--points', '2', '--json', str(out),
                 '--csv-dir', str(tmp_path / 'csv'), '--quiet'])
    assert code == 0
    report = _read(out)
    assert (report['schema'], report['suite'], report['summary']['overall_pass']) == (1, 'clifford', True)
    assert (tmp_path / 'csv' / 'clifford_entries.csv').exists()
    assert '[PASS] suite=clifford' in capsys.readouterr().out


def test_failing_suite_exits_with_one(tmp_path):
    out = tmp_path / 'report.json'
    assert main(['run-suite', '--suite', 'kinematics', '--tol', '1e-30', '--json', str(out), '--quiet']) == 1
    assert _read(out)['summary']['overall_pass'] is False


@pytest.mark.parametrize('argv', [
    ['run-suite', '--suite', 'gravity'],
    ['run-suite', '--config', '/nonexistent/suite.json'],
    ['run-suite', '--seed', 'plenty'],
    ['mass-map', '--m1', '1', '--m2', '2', '--k-grid', '0:1'],
    [],
])
def test_configuration_errors_exit_with_two(argv):
    assert main(argv) == 2


def test_mass_map_csv(tmp_path):
    out = tmp_path / 'map.csv'
    assert main(['mass-map', '--m1', '1', '--m2', '2', '--k-grid', '0:1:3', '--csv', str(out)]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == ['K2', 'Kprime2', 'M_eq1', 'M_eq15', 'relerr']
    assert frame['Kprime2'].iloc[-1] == pytest.approx(0.9610122934081687)


def test_spectrum(tmp_path):
    config = tmp_path / 'spectrum.json'
    config.write_text(json.dumps({'params': {'m': 1.0, 'e2': 0.5}}))
    out = tmp_path / 'spectrum_out.json'
    assert main(['spectrum', '--config', str(config), '--r', '2.0', '--p', '0.1,0,0,0.5,0,0', '--coulomb16',
                 '--json', str(out)]) == 0
    result = _read(out)
    assert result['dim'] == 16
    assert result['residual'] <= 1e-10


def test_spectrum_rejects_short_momentum():
    assert main(['spectrum', '--r', '1.0', '--p', '1,2,3']) == 2


def test_evolve(tmp_path):
    config = tmp_path / 'evolve.json'
    config.write_text(json.dumps({'params': {'m': 1.0}, 'evolve': SHORT_RUN}))
    out = tmp_path / 'evolve_out.json'
    prefix = str(tmp_path / 'run_')
    assert main(['evolve', '--config', str(config), '--json', str(out), '--csv-prefix', prefix]) == 0
    result = _read(out)
    assert result['method'] == 'exact'
    assert result['max_norm_drift'] <= 1e-10
    assert (tmp_path / 'run_snapshots.csv').exists()


def test_velocity(tmp_path):
    out = tmp_path / 'velocity.json'
    assert main(['velocity', '--points', '1', '--json', str(out), '--csv', str(tmp_path / 'v.csv')]) == 0
    result = _read(out)
    assert result['passed'] and result['max_eigenvalue'] < 1.0


def test_archive_and_history(tmp_path, capsys):
    url = f"sqlite:///{tmp_path / 'runs.db'}"
    assert main(['run-suite', '--suite', 'clifford', '--points', '1', '--archive', url, '--quiet']) == 0
    capsys.readouterr()
    assert main(['history', '--archive', url]) == 0
    assert 'clifford' in capsys.readouterr().out
    assert main(['history', '--archive', url, '--run', '1']) == 0
    assert json.loads(capsys.readouterr().out)['suite'] == 'clifford'
    assert main(['history', '--archive', url, '--run', '42']) == 2


def test_history_needs_an_archive(monkeypatch):
    monkeypatch.setattr(TwoBodyApp, 'ARCHIVE_URL', None)
    assert main(['history']) == 2
