"""Advanced-retarded differential equations solved through waveguide lattices.

A chip of coupled waveguides with fiber feedback settles into a stationary
state; concatenating the waveguide amplitudes segment by segment gives the
solution of a mixed-type functional differential equation.
"""

from .errors import (
    ArlatError,
    DomainError,
    InvalidInputError,
    InvalidModelError,
    NumericalOverflowError,
    OracleResonanceError,
    ResonanceError,
    UnsupportedConversionError,
)
from .kernels import BACKEND
from .model import *  # noqa: F401,F403
from .model import __all__ as _model_all
from .oracle import fd_solve, max_gap
from .problem import ARProblem, ARTerm, SegmentCoefficient, coupling_relations_hold, from_chip
from .profiles import *  # noqa: F401,F403
from .profiles import __all__ as _profiles_all
from .propagator import *  # noqa: F401,F403
from .propagator import __all__ as _propagator_all
from .steady import *  # noqa: F401,F403
from .steady import __all__ as _steady_all
from .transient import *  # noqa: F401,F403
from .transient import __all__ as _transient_all

__version__ = "0.1.0"

__all__ = [
    "ArlatError",
    "DomainError",
    "InvalidInputError",
    "InvalidModelError",
    "NumericalOverflowError",
    "OracleResonanceError",
    "ResonanceError",
    "UnsupportedConversionError",
    "BACKEND",
    "fd_solve",
    "max_gap",
    "ARProblem",
    "ARTerm",
    "SegmentCoefficient",
    "coupling_relations_hold",
    "from_chip",
    *_model_all,
    *_profiles_all,
    *_propagator_all,
    *_steady_all,
    *_transient_all,
]
