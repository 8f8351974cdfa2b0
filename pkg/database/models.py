from sqlalchemy import Column, Integer, String, Float, DateTime, Text, ForeignKey, Boolean
from sqlalchemy.orm import declarative_base, relationship
from datetime import datetime, timezone

Base = declarative_base()


def _utcnow():
    return datetime.now(timezone.utc)


class ReportRun(Base):
    __tablename__ = 'report_runs'

    id = Column(Integer, primary_key=True)
    suite = Column(String, nullable=False)
    schema_version = Column(Integer, nullable=False)
    artifact_version = Column(String)
    seed = Column(String)
    passed = Column(Integer, default=0)
    failed = Column(Integer, default=0)
    findings = Column(Integer, default=0)
    overall_pass = Column(Boolean, default=False)
    created_at = Column(DateTime, default=_utcnow)
    report_json = Column(Text)

    entries = relationship("ReportEntryRecord", back_populates="run", cascade="all, delete-orphan",
                           order_by="ReportEntryRecord.id")


class ReportEntryRecord(Base):
    __tablename__ = 'report_entries'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('report_runs.id'), nullable=False)
    suite = Column(String)
    check_id = Column(String)
    kind = Column(String)
    residual = Column(Float)
    tolerance = Column(Float)
    passed = Column(Boolean)

    run = relationship("ReportRun", back_populates="entries")
