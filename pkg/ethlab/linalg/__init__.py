from ethlab.linalg.eigen import EigenbasisObservable, Spectrum, eigh, to_eigenbasis
from ethlab.linalg.fitting import (
    BrodyFit,
    DecayFit,
    MixtureFit,
    fit_brody,
    fit_exponential_decay,
    fit_gaussian_mixture,
)

__all__ = [
    "Spectrum",
    "EigenbasisObservable",
    "eigh",
    "to_eigenbasis",
    "MixtureFit",
    "DecayFit",
    "BrodyFit",
    "fit_gaussian_mixture",
    "fit_exponential_decay",
    "fit_brody",
]
