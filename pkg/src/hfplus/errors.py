"""Exception types shared across the package."""


class CFKError(Exception):
    """Base class for errors raised by this package."""


class ParseError(CFKError):
    """Malformed textual complex description."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class InvalidComplexError(CFKError):
    """A knot complex failed validation.

    Carries the full list of violations so callers can report all of
    them, not just the first.
    """

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class GradingError(CFKError):
    """Maslov gradings are inconsistent or cannot be determined."""


class FlipMissingError(CFKError):
    """An operation needed the filtration-exchange involution but the
    complex does not carry one."""


class NotStabilizedError(CFKError):
    """A truncated computation did not stabilize at the given depth."""


class TorsionInTowerError(CFKError):
    """Torsion appeared inside the stable tower region of a homology
    group; the truncation depth is too small or the input is invalid."""
