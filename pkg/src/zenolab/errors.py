"""Exception hierarchy.

Input problems (bad shapes, operators that fail their symmetry checks,
malformed configs) derive from :class:`ValidationError`.  Post-condition
failures detected after a computation derive from
:class:`InvariantViolation`.  The CLI maps the former to exit code 2 and the
latter to exit code 3.
"""


class ZenoLabError(Exception):
    """Base class for every error raised by the package."""


class ValidationError(ZenoLabError, ValueError):
    """Input rejected before any numerical work."""


class InvariantViolation(ZenoLabError, ArithmeticError):
    """A numerical result broke one of its guaranteed invariants."""

    def __init__(self, invariant, detail=""):
        self.invariant = invariant
        msg = invariant if not detail else f"{invariant}: {detail}"
        super().__init__(msg)


class DimensionMismatch(ValidationError):
    pass


class NonHermitianInput(ValidationError):
    pass


class NonUnitaryInput(ValidationError):
    pass


class NotAProjector(ValidationError):
    pass


class NegativeSpectrum(ValidationError):
    pass


class RankDeficient(ValidationError):
    pass


class InvalidState(ValidationError):
    pass


class InvalidPartition(ValidationError):
    pass


class VanishingSurvival(ValidationError, ArithmeticError):
    pass


class WindowTooNarrow(ValidationError):
    pass


class InvalidBracket(ValidationError):
    pass


class WindowTooSmall(ValidationError):
    pass


class NonCommensurateTime(ValidationError):
    pass


class NonLatticeTime(ValidationError):
    pass


class ResonantPulseArea(ValidationError):
    pass


class ConfigError(ValidationError):
    pass
