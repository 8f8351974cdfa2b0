import argparse
import json
import logging
import sys
from typing import Any, Dict, List, Optional

import numpy as np

from config.settings import ARCHIVE_URL, CSV_DIR, LOG_LEVEL, load_json_file, load_suite_config, parse_seed
from config.tolerances import DEFAULT_POINTS, DEFAULT_SEED, tolerance_for
from services.clifford_core import write_matrix_set
from services.evolution import EvolveConfig, evolve, write_snapshot_csv
from services.generators import (GENERATOR_NAMES, closure_report, equivalence_check, foldy_U, generators_canonical,
                                 generators_raw, measure_structure_constants)
from services.interaction import frozen_spectrum, hamiltonian_V, hamiltonian_coulomb16, load_interaction_config
from services.kinematics import mass_map, parse_k_grid
from services.observables import subluminal_check, velocity_spectrum, write_spectrum_csv
from services.opcalc import MomentumPoint, sample_points
from services.params import TwoBodyParams
from services.report_service import (ALL, EXIT_CONFIG, EXIT_FAILURE, EXIT_PASS, SUITES, extreme_points, run_suite,
                                     write_report_json, write_suite_csvs)
from utils.display import display_frame, display_history, display_report_summary
from utils.errors import ConfigError, DomainError, TwoBodyError

logger = logging.getLogger(__name__)


def configure_logging(quiet: bool = False) -> None:
    level = logging.WARNING if quiet else getattr(logging, str(LOG_LEVEL).upper(), logging.INFO)
    logging.basicConfig(level=level, format='%(asctime)s %(name)s %(levelname)s %(message)s', force=True)


def _write_json(payload: Dict[str, Any], path: Optional[str]) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if path:
        with open(path, 'w') as f:
            f.write(text + '\n')
        logger.info(f"Wrote {path}")
    else:
        print(text)


def _parse_momentum(text: str) -> tuple:
    try:
        values = tuple(float(x) for x in text.split(','))
    except ValueError:
        raise ConfigError(f"Momentum must be six comma-separated numbers, got {text!r}")
    if len(values) != 6:
        raise ConfigError(f"Momentum needs six components, got {len(values)}")
    return values


# commands

def cmd_gen_matrices(args) -> int:
    write_matrix_set(args.set, args.out)
    return EXIT_PASS


def cmd_check_poincare(args) -> int:
    params = TwoBodyParams.equal_mass(args.m)
    points = sample_points(params, args.points, args.seed)
    tol = tolerance_for('poincare.closure', args.tol)
    second = tolerance_for('poincare.closure_second_order', args.tol)
    table = measure_structure_constants(params, sample_points(params, 5, args.seed + 11))
    canonical = generators_canonical(params)
    if args.mode == 'canonical':
        report = closure_report(canonical, table, points, tol, second)
    elif args.mode == 'raw':
        report = closure_report(generators_raw(params), table, points, tol, second)
    else:
        report = equivalence_check(generators_raw(params), canonical, foldy_U(params),
                                   points, tolerance_for('poincare.equivalence', args.tol))
    # boosts of the raw set are reported, not asserted
    gating = [e for e in report.entries if args.mode == 'canonical' or 'K' not in e.relation]
    passed = all(e.passed for e in gating)
    _write_json({
        'mode': args.mode,
        'seed': hex(args.seed),
        'points': len(points),
        'generators': list(GENERATOR_NAMES),
        'structure_constants': table.to_dict(),
        'entries': report.to_dicts(),
        'max_by_order': {str(k): v for k, v in report.max_by_order().items()},
        'pass': passed,
    }, args.json)
    print(f"[{'PASS' if passed else 'FAIL'}] {args.mode}: max residual {report.max_residual:.3e}")
    return EXIT_PASS if passed else EXIT_FAILURE


def cmd_velocity(args) -> int:
    params = TwoBodyParams.equal_mass(args.m)
    points = sample_points(params, args.points, args.seed) + extreme_points(params)
    report = subluminal_check(params, points)
    if args.csv:
        write_spectrum_csv([velocity_spectrum(params, q) for q in points], args.csv)
    _write_json(report.to_dict(), args.json)
    print(f"[{'PASS' if report.passed else 'FAIL'}] max eigenvalue of V^2 {report.max_eigenvalue:.12f}, "
          f"margin {report.margin:.3e}")
    return EXIT_PASS if report.passed else EXIT_FAILURE


def cmd_mass_map(args) -> int:
    try:
        grid = parse_k_grid(args.k_grid)
    except DomainError as e:
        raise ConfigError(str(e))
    frame = mass_map(grid, args.m1, args.m2)
    if args.csv:
        frame.to_csv(args.csv, index=False)
        logger.info(f"Wrote mass map with {len(frame)} rows to {args.csv}")
    else:
        display_frame(frame)
    return EXIT_PASS


def cmd_spectrum(args) -> int:
    config = load_json_file(args.config) if args.config else {}
    params = TwoBodyParams.from_config(config.get('params', {}))
    potential, _ = load_interaction_config({k: v for k, v in config.items() if k in ('potential', 'fields')})
    q = MomentumPoint(_parse_momentum(args.p), params)
    if args.coulomb16:
        h = hamiltonian_coulomb16(params, args.r)
        scale = float(np.dot(q.p, q.p)) + params.e2 ** 2 / args.r ** 2 + params.total_mass ** 2
    else:
        h = hamiltonian_V(params, potential, args.r)
        scale = float(np.dot(q.p, q.p)) + params.total_mass ** 2 + potential.value(args.r)
    eigenvalues = frozen_spectrum(h, q)
    expected = np.sqrt(scale)
    _write_json({
        'r': args.r,
        'p': list(q.p),
        'dim': h.dim,
        'eigenvalues': [float(x) for x in eigenvalues],
        'expected_magnitude': float(expected),
        'residual': float(np.max(np.abs(np.abs(eigenvalues) - expected))),
    }, args.json)
    return EXIT_PASS


def cmd_evolve(args) -> int:
    config = load_json_file(args.config)
    section = config.get('evolve', config)
    params = TwoBodyParams.from_config(config.get('params', {}))
    evolve_config = EvolveConfig.from_config(section, params)
    if args.snapshots:
        evolve_config.snapshots = args.snapshots
    result, diagnostics = evolve(evolve_config)
    if args.csv_prefix:
        write_snapshot_csv(result.snapshots, f'{args.csv_prefix}snapshots.csv')
    summary = dict(diagnostics.to_dict(), method=result.method, aliasing_number=result.aliasing_number,
                   unitarity_residual=result.unitarity_residual)
    _write_json(summary, args.json)
    return EXIT_PASS


def cmd_run_suite(args) -> int:
    config = load_suite_config(args.config)
    if args.seed is not None:
        config['seed'] = args.seed
    if args.points is not None:
        config['points'] = args.points
    if args.tol is not None:
        config['tolerance'] = args.tol
    report = run_suite(args.suite, config)
    display_report_summary(report.to_dict(), report.entries, quiet=args.quiet)
    if args.json:
        write_report_json(report, args.json)
    csv_dir = args.csv_dir or CSV_DIR
    if csv_dir:
        write_suite_csvs(report, csv_dir)
    archive = args.archive or ARCHIVE_URL
    if archive:
        try:
            from services.archive_service import ArchiveService
            ArchiveService(db_url=archive).save_report(report)
        except Exception as e:
            logger.error(f"Could not archive report: {str(e)}")
    return report.exit_code


def cmd_history(args) -> int:
    from services.archive_service import ArchiveService
    url = args.archive or ARCHIVE_URL
    if not url:
        raise ConfigError("No archive configured; pass --archive or set TWOBODY_ARCHIVE_URL")
    service = ArchiveService(db_url=url)
    if args.run is not None:
        run = service.get_run(args.run)
        if run is None:
            raise ConfigError(f"No archived run with id {args.run}")
        print(json.dumps(run['report'], sort_keys=True, indent=2))
    else:
        display_history(service.get_recent_runs(args.limit))
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='twobody', description='Two-particle wave equation toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    p = sub.add_parser('gen-matrices', help='dump a constant matrix set as JSON')
    p.add_argument('--set', choices=['gamma8', 'gamma16', 'spin'], required=True)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_gen_matrices)

    p = sub.add_parser('check-poincare', help='closure or equivalence of the generator sets')
    p.add_argument('--mode', choices=['raw', 'canonical', 'equivalence'], default='canonical')
    p.add_argument('--m', type=float, default=1.0, help='total mass')
    p.add_argument('--points', type=int, default=DEFAULT_POINTS)
    p.add_argument('--seed', type=parse_seed, default=DEFAULT_SEED)
    p.add_argument('--tol', type=float)
    p.add_argument('--json')
    p.set_defaults(func=cmd_check_poincare)

    p = sub.add_parser('velocity', help='relative velocity spectra and the subluminal bound')
    p.add_argument('--m', type=float, default=1.0, help='total mass')
    p.add_argument('--points', type=int, default=DEFAULT_POINTS)
    p.add_argument('--seed', type=parse_seed, default=DEFAULT_SEED)
    p.add_argument('--json')
    p.add_argument('--csv', help='spectrum dump, columns p1..p6, eig1..eig8')
    p.set_defaults(func=cmd_velocity)

    p = sub.add_parser('mass-map', help="invariant mass through K and K'")
    p.add_argument('--m1', type=float, required=True)
    p.add_argument('--m2', type=float, required=True)
    p.add_argument('--k-grid', required=True, help='a:b:n')
    p.add_argument('--csv')
    p.set_defaults(func=cmd_mass_map)

    p = sub.add_parser('spectrum', help='frozen-radius spectrum of the interaction Hamiltonian')
    p.add_argument('--config')
    p.add_argument('--r', type=float, required=True)
    p.add_argument('--p', default='0,0,0,0,0,0', help='p1,...,p6')
    p.add_argument('--coulomb16', action='store_true', help='use the 16x16 Hamiltonian with e2 from params')
    p.add_argument('--json')
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser('evolve', help='spectral time evolution of a wave packet')
    p.add_argument('--config', required=True)
    p.add_argument('--snapshots', type=int)
    p.add_argument('--csv-prefix')
    p.add_argument('--json')
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser('run-suite', help='run a verification suite and write the report')
    p.add_argument('--suite', choices=SUITES + (ALL,), default=ALL)
    p.add_argument('--config')
    p.add_argument('--seed', type=parse_seed)
    p.add_argument('--tol', type=float)
    p.add_argument('--points', type=int)
    p.add_argument('--json')
    p.add_argument('--csv-dir')
    p.add_argument('--archive', help='SQLAlchemy URL of the report archive')
    p.add_argument('--quiet', action='store_true', help='only warnings and the summary line')
    p.set_defaults(func=cmd_run_suite)

    p = sub.add_parser('history', help='list archived suite runs')
    p.add_argument('--archive')
    p.add_argument('--limit', type=int, default=10)
    p.add_argument('--run', type=int, help='print the full report of one run')
    p.set_defaults(func=cmd_history)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(getattr(args, 'quiet', False))
    try:
        return args.func(args)
    except ConfigError as e:
        logger.error(f"Configuration error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except TwoBodyError as e:
        logger.error(f"{type(e).__name__}: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAILURE
    except OSError as e:
        logger.error(f"File error: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == '__main__':
    sys.exit(main())
