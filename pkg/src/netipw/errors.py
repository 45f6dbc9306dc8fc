"""Exception types shared across the package."""


class NetipwError(Exception):
    """Base class for package errors."""


class InputError(NetipwError):
    """Malformed or out-of-contract input (CLI exit code 1)."""


class CapacityError(NetipwError):
    """Instance too large for an exact or enumerative routine (CLI exit code 2)."""


class NumericError(NetipwError):
    """Numerical failure such as solver non-convergence (CLI exit code 2)."""


class OverlapError(InputError):
    """A unit's propensity is 0 or 1 for a contrasted exposure value."""


class UnsupportedExposureError(InputError):
    """No closed-form propensity for this exposure and Monte Carlo was not requested."""
