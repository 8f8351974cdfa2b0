import logging
import sys
from typing import Any, Dict, List, Optional, Sequence, TextIO

import pandas as pd

from utils.validators import CHECK, ReportEntry, find_issues

logger = logging.getLogger(__name__)

TABLE_COLUMNS = ['suite', 'check', 'kind', 'residual', 'tolerance', 'pass']


def entries_frame(entries: Sequence[ReportEntry]) -> pd.DataFrame:
    """One row per entry, in report order."""
    rows = [{key: e.to_dict()[key] for key in TABLE_COLUMNS} for e in entries]
    return pd.DataFrame(rows, columns=TABLE_COLUMNS)


def format_entries_table(entries: Sequence[ReportEntry]) -> str:
    if not entries:
        return "(no entries)"
    frame = entries_frame(entries)
    frame['pass'] = frame['pass'].map({True: 'PASS', False: 'FAIL'})
    frame.loc[frame['kind'] != CHECK, 'pass'] = frame.loc[frame['kind'] != CHECK, 'pass'].str.lower()
    return frame.to_string(index=False, float_format=lambda x: f'{x:.3e}')


def display_report_summary(report: Dict[str, Any], entries: Sequence[ReportEntry],
                           stream: Optional[TextIO] = None, quiet: bool = False) -> None:
    """Print the entry table (unless quiet) and the pass/fail summary."""
    stream = stream or sys.stdout
    summary = report['summary']
    if not quiet:
        print(format_entries_table(entries), file=stream)
        print(file=stream)
    status = 'PASS' if summary['overall_pass'] else 'FAIL'
    print(f"[{status}] suite={report['suite']} passed={summary['passed']} failed={summary['failed']} "
          f"findings={summary['findings']}", file=stream)
    for issue in find_issues(entries):
        print(f"  - {issue}", file=stream)


def display_history(runs: List[Dict[str, Any]], stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stdout
    if not runs:
        print("No archived runs.", file=stream)
        return
    frame = pd.DataFrame(runs, columns=['id', 'created_at', 'suite', 'seed', 'passed', 'failed', 'findings',
                                        'overall_pass'])
    print(frame.to_string(index=False), file=stream)


def display_frame(frame: pd.DataFrame, stream: Optional[TextIO] = None) -> None:
    stream = stream or sys.stdout
    print(frame.to_string(index=False), file=stream)
