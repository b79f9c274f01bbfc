"""Modebeam error hierarchy.

Every failure the library raises deliberately derives from ModebeamError and
carries the process exit code the command line front end reports for it.
"""


class ModebeamError(Exception):
    """Base class for all modebeam failures."""

    exit_code = 1
    kind = "error"

    def to_record(self) -> dict:
        """Machine-readable error record written next to run outputs."""
        return {
            "error": self.kind,
            "type": type(self).__name__,
            "message": str(self),
            "exit_code": self.exit_code,
        }


class ConfigError(ModebeamError, ValueError):
    """Invalid user input: scenario files, flags, layouts, excitations."""

    exit_code = 2
    kind = "config"


class GeometryError(ConfigError):
    """Bend or layout geometry outside its valid range."""

    kind = "geometry"


class InfeasibleError(ModebeamError):
    """A steering request cannot be met with the allowed ports."""

    exit_code = 3
    kind = "infeasible"


class NumericError(ModebeamError):
    """Numerical failure inside a kernel."""

    exit_code = 4
    kind = "numeric"


class DomainError(NumericError):
    """Special-function argument or order out of the supported range."""


class BracketError(NumericError):
    """Root search interval without a sign change."""


class ResonanceError(NumericError):
    """Characteristic equation could not be solved."""


class DegenerateError(NumericError):
    """Zero-power field or a featureless pattern cut."""


class OpenBeamError(NumericError):
    """No half-power crossing around the main beam."""


class InsufficientSpanError(NumericError):
    """Cut does not cover the full circle."""
