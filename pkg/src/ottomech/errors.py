"""Exception hierarchy.

The CLI maps these onto distinct exit codes (see ``ottomech.cli``), so new
error conditions should raise one of the classes below rather than bare
built-ins.
"""


class OttomechError(Exception):
    """Base class for all package errors."""


class ConfigurationError(OttomechError, ValueError):
    """Invalid parameters, dimensions or configuration-file contents."""


class ShapeError(OttomechError, ValueError):
    """Operator/state dimension mismatch."""


class StabilityError(OttomechError, ValueError):
    """Parameter set with an imaginary normal-mode frequency."""


class DomainError(OttomechError, ValueError):
    """Argument outside the domain of a schedule or lookup."""


class IntegratorError(OttomechError, RuntimeError):
    """Numerical failure during stochastic integration (norm collapse,
    excessive jump probability); usually cured by a smaller time step."""
