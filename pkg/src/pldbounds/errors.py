"""Exception hierarchy shared across the package.

Two failure families matter to callers (and to the CLI exit codes):

- ``RequestError``: the caller asked for something malformed or unsupported
  (bad parameters, incompatible grids, missing preconditions).
- ``NumericalValidityError``: the inputs were well formed but a numerical
  validity gate failed (non-convex curve values, negative probability mass
  beyond tolerance, mass-conservation breakage).
"""


class PLDBoundsError(Exception):
    """Base class for all package-specific errors."""


class RequestError(PLDBoundsError, ValueError):
    """Malformed or unsupported request (CLI exit code 2)."""


class NumericalValidityError(PLDBoundsError, ArithmeticError):
    """A numerical validity gate failed (CLI exit code 3)."""
