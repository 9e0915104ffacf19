"""STFT phase retrieval on products of cyclic groups and integer lines."""

from .groups import Cyclic, GroupSpec, IntegerLine, Torus, parse_group
from .harmonic import Signal, fourier, inverse_fourier
from .retrieval import RetrievalProblem, RetrievalReport, end_to_end

__all__ = ["Cyclic", "IntegerLine", "Torus", "GroupSpec", "parse_group", "Signal", "fourier",
           "inverse_fourier", "RetrievalProblem", "RetrievalReport", "end_to_end"]
__version__ = "0.1.0"
