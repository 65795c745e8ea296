"""
Exceptions raised by trcbound
"""


class TrcError(Exception):
    """trcbound error"""


class InputError(TrcError):
    """
    Bad input (file, arguments, alphabet sizes). The CLI maps it to exit code 1
    """


class ChannelFileError(InputError):
    """malformed or invalid channel file"""


class DimensionError(InputError, ValueError):
    """arrays with incompatible shapes"""


class DomainError(InputError, ValueError):
    """argument outside the domain of a function"""


class AlphabetTooLargeError(InputError):
    """alphabet exceeds the cap of a brute-force grid"""


class GridTooLargeError(InputError):
    """grid enumeration exceeds the configured point budget"""


class EnumerationCapError(InputError):
    """exact simulation would enumerate too many sequences"""


class UnsupportedOperationError(InputError):
    """operation is only defined for a narrower class of decoders"""


class InvariantViolation(TrcError):
    """
    A numerical invariant failed (e.g. dual above sphere packing).
    The CLI maps it to exit code 2
    """
