from . import spectrum_dal

__all__ = ("spectrum_dal",)
