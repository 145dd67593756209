"""Exception hierarchy. Each family maps onto one CLI exit status."""


class AmbientisError(Exception):
    exit_code = 1


class InputError(AmbientisError):
    """Missing or unreadable input file, unknown plug-in, bad configuration."""

    exit_code = 2


class DataFormatError(AmbientisError):
    """Malformed record inside an otherwise readable input."""

    exit_code = 3


class StatsError(AmbientisError):
    exit_code = 4


class InsufficientDataError(StatsError):
    pass


class DegenerateSampleError(StatsError):
    pass
