"""Exception types shared across the package.

Every error raised deliberately by this package derives from FraxelError,
so callers can catch one type at the boundary and still tell failure
modes apart when they need to.
"""


class FraxelError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(FraxelError):
    """An argument value is outside its documented domain."""


class FormatError(FraxelError):
    """A file or byte stream does not match the expected format."""


class AlignmentError(FraxelError):
    """Two feature sets disagree on sample identity or ordering."""


class PairingError(FraxelError):
    """Records that must pair up (e.g. two faces of one sample) do not."""


class DegenerateInputError(FraxelError):
    """The input is valid but carries no usable signal (e.g. constant image
    where contrast is required)."""


class ResourceError(FraxelError):
    """A computation would exceed a configured resource budget."""


class ConfigError(FraxelError):
    """A configuration file or CLI option set is invalid as a whole."""
