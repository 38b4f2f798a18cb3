from sqlalchemy import Column, Integer, String, DateTime, Text
from sqlalchemy.orm import DeclarativeBase
from sqlalchemy.sql import func


class Base(DeclarativeBase):
    pass


class CachedSpectrum(Base):
    __tablename__ = "cached_spectra"

    key = Column(String(64), primary_key=True)
    model = Column(String, nullable=False, index=True)
    label = Column(String, nullable=False)
    params_json = Column(Text, nullable=False)
    dim = Column(Integer, nullable=False)
    evals_path = Column(String, nullable=False)
    evecs_path = Column(String, nullable=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    def __repr__(self) -> str:
        return f"<CachedSpectrum(key={self.key[:12]}, model={self.model}, dim={self.dim})>"
