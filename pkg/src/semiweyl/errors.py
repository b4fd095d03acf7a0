"""Error taxonomy shared by all modules.

Exit codes used by the command line tool:
  2  configuration / domain errors (bad keys, out-of-range parameters)
  3  numerical errors (solver failure, degenerate fit input)
  4  resolution / containment errors (grid or mode cutoff too small)
"""


class SemiweylError(Exception):
    exit_code = 3


class DomainError(SemiweylError):
    """Argument outside the mathematical domain of an operation."""
    exit_code = 2


class CapabilityError(SemiweylError):
    """Request exceeds what the object was built to provide (e.g. derivative order)."""
    exit_code = 2


class ConfigError(SemiweylError):
    """Malformed or contradictory configuration."""
    exit_code = 2


class FitError(SemiweylError):
    """Not enough usable points for a least-squares fit."""
    exit_code = 3


class NumericalError(SemiweylError):
    """A solver failed or produced unusable output."""
    exit_code = 3


class ResolutionError(SemiweylError):
    """A grid cannot resolve the requested oscillation or window."""
    exit_code = 4


class TruncationError(SemiweylError):
    """A basis or box cutoff is too small to contain the object."""
    exit_code = 4
