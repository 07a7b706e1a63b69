"""Elliptic theta machinery, Belavin R-matrix, factorized difference
L-operators, and the resulting commuting Macdonald-Ruijsenaars-type
difference family, with a residual-driven verification CLI (`verify`)."""

from .context import ModularContext, default_context
from .theta import ThetaValue, Residual

__all__ = ["ModularContext", "default_context", "ThetaValue", "Residual"]
__version__ = "0.1.0"
