"""dsprec: dual space preconditioned gradient descent for overparameterized linear models.

Runs the preconditioned iteration, computes the min-norm interpolating
reference solutions it is compared against, and checks the identities and
convergence bounds the iteration satisfies.
"""

from .cli import main
from .config import VERSION

__version__ = VERSION

__all__ = ["main", "VERSION"]
