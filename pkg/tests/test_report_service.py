import json
import math

import pytest
from pytest import raises

from services.opcalc import ResidualEntry
from services.report_service import (ALL, SCHEMA_VERSION, SUITES, Report, SuiteContext, run_suite,
                                     write_report_json, write_suite_csvs)
from utils.display import display_report_summary, format_entries_table
from utils.errors import ConfigError
from utils.validators import (CHECK, FINDING, ReportEntry, central_difference, check_residual, check_window,
                              entries_from_residuals, find_issues, findings_when_failing, relative_error)

SMALL = {'seed': 0x5EED, 'points': 2}


def _entry(check, passed, kind=CHECK):
    return ReportEntry('demo', check, 0.0 if passed else 1.0, 0.5, passed, kind)


def test_check_residual():
    assert check_residual('s', 'c', 1e-12, 1e-12).passed
    assert not check_residual('s', 'c', 1e-12, 1e-12, strict=True).passed
    assert not check_residual('s', 'c', float('nan'), 1.0).passed
    entry = check_residual('s', 'c', 0.1, 1.0, kind=FINDING, note='x')
    assert entry.to_dict() == {'suite': 's', 'check': 'c', 'kind': FINDING, 'residual': 0.1, 'tolerance': 1.0,
                               'pass': True, 'inputs': {'note': 'x'}}


def test_check_window():
    inside = check_window('evolve', 'ratio', 4.01, (3.5, 4.5))
    assert inside.passed and inside.residual == 0.0
    outside = check_window('evolve', 'ratio', 2.5, (3.5, 4.5))
    assert not outside.passed
    assert outside.residual == pytest.approx(1.0)
    assert outside.inputs['window'] == [3.5, 4.5]


def test_entries_from_residuals_keeps_worst_point():
    raw = [ResidualEntry('[A, B]', 0, 0, 1e-14, 1e-9), ResidualEntry('[A, B]', 1, 0, 3e-10, 1e-9),
           ResidualEntry('[A, B]', 1, 1, 2e-9, 1e-9), ResidualEntry('[A, C]', 0, 0, float('nan'), 1e-9)]
    entries = entries_from_residuals('poincare', 'closure', raw)
    assert [e.check for e in entries] == ['closure[A, B].order0', 'closure[A, B].order1', 'closure[A, C].order0']
    assert entries[0].passed and entries[0].inputs == {'points': 2, 'worst_point': 1}
    assert not entries[1].passed
    assert entries[2].residual == math.inf and not entries[2].passed


def test_findings_when_failing_only_demotes_failures():
    entries = findings_when_failing([_entry('clean', True), _entry('off', False)])
    assert [(e.check, e.kind) for e in entries] == [('clean', CHECK), ('off', FINDING)]
    assert find_issues(entries) == []


def test_find_issues_ignores_findings():
    issues = find_issues([_entry('good', True), _entry('bad', False), _entry('known', False, FINDING)])
    assert len(issues) == 1
    assert 'bad' in issues[0]


def test_numeric_helpers():
    assert central_difference(lambda x: x[0] ** 2 + x[1], [3.0, 1.0], 0) == pytest.approx(6.0)
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(0.2, 0.0) == 0.2


def test_findings_never_fail_a_report():
    report = Report('demo', {}, [_entry('a', True), _entry('b', False, FINDING)])
    assert report.summary == {'passed': 1, 'failed': 0, 'findings': 1, 'overall_pass': True}
    assert report.exit_code == 0
    failing = Report('demo', {}, [_entry('a', False)])
    assert failing.exit_code == 1


def test_report_json_layout():
    report = Report('demo', {'seed': '0x1'}, [_entry('a', True)], ['note'], '2026-01-01T00:00:00+00:00')
    payload = json.loads(report.to_json())
    assert payload['schema'] == SCHEMA_VERSION
    assert payload['artifact_version'] == '1.0.0'
    assert payload['timestamp'] == '2026-01-01T00:00:00+00:00'
    assert 'timestamp' not in report.to_dict(include_timestamp=False)
    assert list(payload) == sorted(payload)


def test_clifford_suite_passes_and_is_deterministic():
    first = run_suite('clifford', dict(SMALL))
    second = run_suite('clifford', dict(SMALL))
    assert first.overall_pass, find_issues(first.entries)
    assert first.summary['findings'] == 2
    assert first.to_json(include_timestamp=False) == second.to_json(include_timestamp=False)
    keys = [(e.suite, e.check) for e in first.entries]
    assert keys == sorted(keys)


@pytest.mark.parametrize('suite', ['kinematics', 'interaction', 'velocity'])
def test_fast_suites_pass(suite):
    report = run_suite(suite, dict(SMALL))
    assert report.overall_pass, find_issues(report.entries)
    assert report.suites() == [suite]


@pytest.mark.slow
@pytest.mark.parametrize('suite', ['poincare', 'positions', 'evolve'])
def test_slow_suites_pass(suite):
    report = run_suite(suite, dict(SMALL))
    assert report.overall_pass, find_issues(report.entries)


@pytest.mark.slow
def test_all_suites():
    report = run_suite(ALL, dict(SMALL))
    assert report.suites() == sorted(SUITES)
    assert report.overall_pass, find_issues(report.entries)


def test_tiny_tolerance_fails_kinematics():
    report = run_suite('kinematics', dict(SMALL, tolerance=1e-30))
    assert not report.overall_pass
    assert report.config['tolerance_override'] == 1e-30


def test_suite_configuration_errors():
    with raises(ConfigError):
        run_suite('gravity', dict(SMALL))
    with raises(ConfigError):
        SuiteContext.from_config(dict(SMALL, points=0))
    with raises(ConfigError):
        SuiteContext.from_config(dict(SMALL, params={'m': 'heavy'}))


def test_context_sampling_is_salted():
    ctx = SuiteContext.from_config(dict(SMALL))
    assert ctx.sample() == ctx.sample()
    assert ctx.sample(salt=1) != ctx.sample()
    assert ctx.tol('poincare.closure') == 1e-9
    assert ctx.echo()['seed'] == '0x5eed'


def test_report_files(tmp_path, capsys):
    report = run_suite('clifford', dict(SMALL))
    path = tmp_path / 'report.json'
    write_report_json(report, str(path))
    assert json.loads(path.read_text())['suite'] == 'clifford'
    paths = write_suite_csvs(report, str(tmp_path / 'csv'))
    assert [p.rsplit('/', 1)[-1] for p in paths] == ['clifford_entries.csv']
    display_report_summary(report.to_dict(), report.entries)
    out = capsys.readouterr().out
    assert '[PASS] suite=clifford' in out
    assert 'gamma8.anticommutator' in out


def test_findings_print_in_lower_case():
    table = format_entries_table([_entry('a', True), _entry('b', False, FINDING)])
    assert 'PASS' in table and 'fail' in table and 'FAIL' not in table


@pytest.mark.slow
def test_raw_boost_findings_are_only_misses():
    report = run_suite('poincare', dict(SMALL))
    raw = [e for e in report.entries if e.check.startswith(('raw.closure', 'equivalence.'))]
    assert raw
    assert all(not e.passed for e in raw if e.kind == FINDING)
    assert any(e.kind == CHECK and 'K' in e.check for e in raw)


@pytest.mark.slow
def test_evolve_suite_reports_stationary_centroid():
    report = run_suite('evolve', dict(SMALL))
    entry = next(e for e in report.entries if e.check == 'centroid_stationary')
    assert entry.kind == CHECK
    assert entry.passed
    assert entry.tolerance == 1e-6
