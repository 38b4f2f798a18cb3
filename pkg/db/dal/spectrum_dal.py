import logging
from typing import Any, Dict, List, Optional

from sqlalchemy import select, delete
from sqlalchemy.exc import IntegrityError
from sqlalchemy.orm import Session

from ..models import CachedSpectrum


def get_cached_spectrum(session: Session, key: str) -> Optional[CachedSpectrum]:
    stmt = select(CachedSpectrum).where(CachedSpectrum.key == key)
    return session.execute(stmt).scalar_one_or_none()


def create_cached_spectrum(session: Session, data: Dict[str, Any]) -> CachedSpectrum:
    """
    Регистрирует спектр, массивы которого уже записаны на диск.

    Повторная регистрация того же ключа (гонка двух процессов) не является
    ошибкой: возвращается существующая запись.
    """
    record = CachedSpectrum(**data)
    session.add(record)
    try:
        session.commit()
    except IntegrityError:
        session.rollback()
        existing = get_cached_spectrum(session, data["key"])
        if existing is None:
            raise
        logging.info(f"Cached spectrum {data['key'][:12]} registered concurrently, reusing it")
        return existing
    logging.info(f"Cached spectrum registered key={record.key[:12]}, model={record.model}, dim={record.dim}")
    return record


def list_cached_spectra(session: Session, model: Optional[str] = None) -> List[CachedSpectrum]:
    stmt = select(CachedSpectrum).order_by(CachedSpectrum.created_at)
    if model:
        stmt = stmt.where(CachedSpectrum.model == model)
    return list(session.execute(stmt).scalars().all())


def delete_cached_spectrum(session: Session, key: str) -> bool:
    result = session.execute(delete(CachedSpectrum).where(CachedSpectrum.key == key))
    session.commit()
    return result.rowcount > 0
