"""Heat semigroups, Weyl fractional derivatives and Littlewood-Paley functionals."""

from .errors import ConfigError, ConvergenceError, TruncationError
from .fields import SampledField
from .frac import FractionalOrder
from .kernels import SemigroupId
from .lpfun import GFunctionSpec
from .banach import NormedSpace

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "FractionalOrder",
    "GFunctionSpec",
    "NormedSpace",
    "SampledField",
    "SemigroupId",
    "TruncationError",
]
