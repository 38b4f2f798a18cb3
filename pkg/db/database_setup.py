import logging
from typing import Iterator, Optional

from sqlalchemy import create_engine, event
from sqlalchemy.engine import Engine
from sqlalchemy.orm import Session, sessionmaker

from config.settings import Settings
from .models import Base

engine: Optional[Engine] = None


def _enable_sqlite_wal(dbapi_connection, connection_record) -> None:
    cursor = dbapi_connection.cursor()
    cursor.execute("PRAGMA journal_mode=WAL")
    cursor.close()


def init_db_connection(settings: Settings) -> sessionmaker:
    """
    Создает движок SQLite для реестра кэшированных спектров.

    Args:
        settings: Настройки процесса (CACHE_DIR, DATABASE_URL)

    Returns:
        Фабрика синхронных сессий
    """
    global engine

    if engine is None or str(engine.url) != settings.DATABASE_URL:
        settings.cache_path.mkdir(parents=True, exist_ok=True)
        logging.info(f"Creating SQLAlchemy engine with URL: {settings.DATABASE_URL}")
        engine = create_engine(
            settings.DATABASE_URL,
            echo=False,
            # сессии открываются в потоках пула развертки
            connect_args={"check_same_thread": False},
        )
        event.listen(engine, "connect", _enable_sqlite_wal)

    session_factory = sessionmaker(
        bind=engine,
        class_=Session,
        expire_on_commit=False,
        autoflush=False,
    )
    logging.debug("SQLAlchemy Engine and SessionFactory configured for SQLite.")
    return session_factory


def get_session(session_factory: sessionmaker) -> Iterator[Session]:
    if session_factory is None:
        raise RuntimeError("SessionFactory is not provided or initialized.")

    session = session_factory()
    try:
        yield session
    finally:
        session.close()


def init_db() -> None:
    if engine is None:
        raise RuntimeError("engine is not initialized. Call init_db_connection first.")

    Base.metadata.create_all(engine)
    logging.info("Spectrum cache database initialized/checked successfully.")


def dispose_engine() -> None:
    global engine
    if engine is not None:
        engine.dispose()
        engine = None
