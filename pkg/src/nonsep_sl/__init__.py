"""Forward and inverse spectral problem for -y'' + q y = lam^2 y on [0, pi] with
non-separated boundary conditions that contain the spectral parameter:

    y'(0) + (alpha lam + beta) y(0) + omega y(pi) = 0,
    y'(pi) + gamma y(pi) - omega y(0) = 0.
"""
from .admissibility import AdmissibilityReport, check_all
from .domain import (AsymptoticFit, AuxSpectra, BoundaryParams, CharFn, CharKind, Potential, SignSequence,
                     SpectralData, TwoSidedSpectrum, read_json, write_json)
from .errors import SpectralError
from .forward import ForwardResult, forward
from .functions import recover_functions
from .parameters import recover_parameters
from .pipeline import InversionResult, invert, roundtrip
from .potential import recover_potential, refine_q

__all__ = [
    "AdmissibilityReport", "AsymptoticFit", "AuxSpectra", "BoundaryParams", "CharFn", "CharKind",
    "ForwardResult", "InversionResult", "Potential", "SignSequence", "SpectralData", "SpectralError",
    "TwoSidedSpectrum", "check_all", "forward", "invert", "read_json", "recover_functions",
    "recover_parameters", "recover_potential", "refine_q", "roundtrip", "write_json",
]
__version__ = "0.1.0"
