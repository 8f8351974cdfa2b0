"""
Engine and session handling for the report archive.

Any SQLAlchemy URL works; an in-memory SQLite URL shares one connection so
the archive survives between sessions of the same process.
"""
from sqlalchemy import create_engine
from sqlalchemy.engine import make_url
from sqlalchemy.exc import ArgumentError
from sqlalchemy.orm import sessionmaker, scoped_session
from sqlalchemy.pool import StaticPool
from contextlib import contextmanager
import logging
from typing import Optional

from config.settings import ARCHIVE_URL
from utils.errors import ConfigError

logger = logging.getLogger(__name__)

DEFAULT_ARCHIVE_URL = "sqlite:///twobody_reports.db"


def _engine_options(url) -> dict:
    if url.get_backend_name() == 'sqlite' and url.database in (None, '', ':memory:'):
        return {'poolclass': StaticPool, 'connect_args': {'check_same_thread': False}}
    return {}


class DatabaseManager:
    def __init__(self, db_url: Optional[str] = None):
        try:
            url = make_url(db_url or ARCHIVE_URL or DEFAULT_ARCHIVE_URL)
            self.engine = create_engine(url, **_engine_options(url))
        except ArgumentError as e:
            logger.error(f"Invalid archive URL {db_url!r}: {str(e)}")
            raise ConfigError(f"Invalid archive URL {db_url!r}: {e}")
        self.db_url = url.render_as_string(hide_password=True)
        self.SessionFactory = sessionmaker(bind=self.engine)
        self.Session = scoped_session(self.SessionFactory)
        logger.debug(f"Archive engine on {self.db_url}")

    @contextmanager
    def session_scope(self):
        """Commit on success; roll back, log and re-raise on any error."""
        session = self.Session()
        try:
            yield session
            session.commit()
        except Exception as e:
            session.rollback()
            logger.error(f"Archive error on {self.db_url}: {str(e)}")
            raise
        finally:
            session.close()

    def init_db(self):
        from database.models import Base
        Base.metadata.create_all(self.engine)

    def dispose(self):
        self.Session.remove()
        self.engine.dispose()
