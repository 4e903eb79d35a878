"""Exception hierarchy with stable, machine-readable error names.

Every error raised by the library carries a ``name`` attribute (for example
``"gain-overflow"``). The CLI prints that name on standard error and maps the
error's ``kind`` to an exit code.
"""

from __future__ import annotations


class SfwmError(Exception):
    """Base class. ``kind`` is ``"usage"`` or ``"numerical"``."""

    name = "sfwm-error"
    kind = "numerical"

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.name)
        self.context = context

    def __str__(self) -> str:
        return f"{self.name}: {self.args[0]}"


class InvalidArgument(SfwmError, ValueError):
    name = "invalid-argument"
    kind = "usage"


class ConfigNotFound(SfwmError, FileNotFoundError):
    name = "config-not-found"
    kind = "usage"


class ConfigError(SfwmError, ValueError):
    name = "config-error"
    kind = "usage"


class DegenerateInput(SfwmError, ValueError):
    name = "degenerate-input"


class InternalConsistencyError(SfwmError, RuntimeError):
    name = "internal-consistency"


class PoleEncountered(SfwmError, ArithmeticError):
    name = "pole-encountered"


class GainOverflow(SfwmError, OverflowError):
    name = "gain-overflow"


class ReorganizationSingular(SfwmError, ArithmeticError):
    name = "reorganization-singular"


class GridTooNarrow(SfwmError, ValueError):
    name = "grid-too-narrow"


class GridTooShort(SfwmError, ValueError):
    name = "grid-too-short"


class UndefinedCorrelation(SfwmError, ArithmeticError):
    name = "undefined-correlation"


class UndefinedPairingRatio(SfwmError, ArithmeticError):
    name = "undefined-pairing-ratio"


class UndefinedBandwidth(SfwmError, ArithmeticError):
    name = "undefined-bandwidth"


class CalibrationUnreachable(SfwmError, ValueError):
    name = "calibration-unreachable"
