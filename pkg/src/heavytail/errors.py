"""Exception hierarchy shared by every module."""


class HeavyTailError(Exception):
    """Base class for all library errors."""


class ValidationError(HeavyTailError, ValueError):
    """Input violates a documented precondition."""


class CapacityError(HeavyTailError):
    """Exact enumeration would exceed the hard size cap."""


class UnsupportedModelError(HeavyTailError):
    """Asymptotic constants are not available for this parameter choice."""


class InfiniteTauError(HeavyTailError):
    """The pre-image is not bounded away from lower-order hyperplanes."""
