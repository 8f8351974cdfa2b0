from database.connection import DatabaseManager
from database.models import ReportRun, ReportEntryRecord
from sqlalchemy import desc
import json
import logging
from typing import Dict, Any, List, Optional

from services.report_service import ARTIFACT_VERSION, SCHEMA_VERSION, Report

logger = logging.getLogger(__name__)


class ArchiveService:
    """Stores suite reports in a SQL database and reads them back as dicts."""

    def __init__(self, db_manager: Optional[DatabaseManager] = None, db_url: Optional[str] = None):
        self.db_manager = db_manager or DatabaseManager(db_url)
        self.db_manager.init_db()

    def save_report(self, report: Report) -> int:
        summary = report.summary
        with self.db_manager.session_scope() as session:
            run = ReportRun(
                suite=report.suite,
                schema_version=SCHEMA_VERSION,
                artifact_version=ARTIFACT_VERSION,
                seed=report.config.get('seed'),
                passed=summary['passed'],
                failed=summary['failed'],
                findings=summary['findings'],
                overall_pass=summary['overall_pass'],
                report_json=report.to_json(),
            )
            for entry in report.entries:
                run.entries.append(ReportEntryRecord(
                    suite=entry.suite,
                    check_id=entry.check,
                    kind=entry.kind,
                    residual=entry.residual,
                    tolerance=entry.tolerance,
                    passed=entry.passed,
                ))
            session.add(run)
            session.flush()
            run_id = run.id
        logger.info(f"Archived {report.suite} report as run {run_id}")
        return run_id

    def get_recent_runs(self, limit: int = 10) -> List[Dict[str, Any]]:
        with self.db_manager.session_scope() as session:
            runs = session.query(ReportRun).order_by(desc(ReportRun.id)).limit(limit).all()
            # Return dictionaries instead of the SQLAlchemy objects
            return [self._run_summary(run) for run in runs]

    def get_run(self, run_id: int) -> Optional[Dict[str, Any]]:
        """Summary of one run plus its parsed report and entry rows"""
        with self.db_manager.session_scope() as session:
            run = session.query(ReportRun).filter_by(id=run_id).first()
            if run is None:
                return None
            result = self._run_summary(run)
            result['report'] = json.loads(run.report_json) if run.report_json else None
            result['entries'] = [
                {
                    'suite': e.suite,
                    'check': e.check_id,
                    'kind': e.kind,
                    'residual': e.residual,
                    'tolerance': e.tolerance,
                    'pass': e.passed,
                }
                for e in run.entries
            ]
            return result

    def get_failing_checks(self, run_id: int) -> List[str]:
        with self.db_manager.session_scope() as session:
            records = session.query(ReportEntryRecord).filter_by(run_id=run_id, passed=False, kind='check').all()
            return sorted(f"{r.suite}: {r.check_id}" for r in records)

    @staticmethod
    def _run_summary(run: ReportRun) -> Dict[str, Any]:
        return {
            'id': run.id,
            'created_at': run.created_at.isoformat(timespec='seconds') if run.created_at else None,
            'suite': run.suite,
            'seed': run.seed,
            'passed': run.passed,
            'failed': run.failed,
            'findings': run.findings,
            'overall_pass': run.overall_pass,
        }
