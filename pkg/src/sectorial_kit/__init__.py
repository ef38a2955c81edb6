"""Linear relations in C^n, sectorial forms and the relation T*(I + iB)T."""

from .errors import (
    DimensionError,
    NotFiniteError,
    NotHermitianError,
    NotPSDError,
    NotSectorialError,
    VerificationError,
)
from .forms import *  # noqa: F401,F403
from .harness import *  # noqa: F401,F403
from .instance import *  # noqa: F401,F403
from .relation import *  # noqa: F401,F403
from .subspace import *  # noqa: F401,F403
from .sums import *  # noqa: F401,F403
from .tbt import *  # noqa: F401,F403

__version__ = "0.1.0"
