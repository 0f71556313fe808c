"""Orlicz and Lorentz norms on finite probability spaces, plus a harness that
checks Khinchin / Marcinkiewicz-Zygmund type inequalities numerically."""

__version__ = "0.1.0"

from orlicz_lab.young import YoungFunction, SaturationError, UnboundedConjugateError
from orlicz_lab.measure import SimpleFunction, StepRearrangement, make_simple
from orlicz_lab.norms import LorentzIndex, NormValue

__all__ = [
    "__version__",
    "YoungFunction",
    "SaturationError",
    "UnboundedConjugateError",
    "SimpleFunction",
    "StepRearrangement",
    "make_simple",
    "LorentzIndex",
    "NormValue",
]
