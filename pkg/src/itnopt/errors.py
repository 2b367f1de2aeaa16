"""Exception types shared across the package."""


class ItnOptError(Exception):
    """Base class for all package-specific errors."""


class InvariantViolation(ItnOptError):
    """A domain invariant was violated; the message names the constraint."""


class NonpositivePopulation(ItnOptError):
    """Force-of-infection evaluation with total host population <= 0."""


class NegativeState(ItnOptError):
    """A state component fell below the admissible negativity threshold."""


class NonFinite(ItnOptError):
    """An integration produced NaN or infinity."""


class DegenerateDirection(ItnOptError):
    """A gradient-check direction has zero norm after bound masking."""


class ParseError(ItnOptError):
    """Malformed configuration input; the message reports the location."""


class UnknownKey(ItnOptError):
    """A configuration key that is not part of the scenario schema."""


class MissingArtifact(ItnOptError):
    """A required input artifact is absent or empty."""
