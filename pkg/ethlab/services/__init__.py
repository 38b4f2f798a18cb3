from .experiment_service import ExperimentService
from .spectrum_service import SpectrumService

__all__ = ["ExperimentService", "SpectrumService"]
