"""
Exceptions raised by the FPDA kernels and the fabric model
"""


class FpdaError(Exception):
    """Base class for every error raised on purpose by this package"""


class LengthMismatch(FpdaError, ValueError):
    pass


class HorizonTooSmall(FpdaError, ValueError):
    pass


class OddLength(FpdaError, ValueError):
    pass


class TooShort(FpdaError, ValueError):
    pass


class BadLength(FpdaError, ValueError):
    pass


class UnsupportedSize(FpdaError, ValueError):
    pass


class ShapeMismatch(FpdaError, ValueError):
    pass


class ArityMismatch(FpdaError, ValueError):
    pass


class PoolExhausted(FpdaError, RuntimeError):
    """Raised by :func:`FPDA.fabric.configure` when a CM type runs out

    Args:
        kind (str): the Common Module type, e.g. "adder"
        needed (int): how many the netlist asks for
        available (int): how many are free in the pool
    """

    def __init__(self, kind: str, needed: int, available: int) -> None:
        self.kind = kind
        self.needed = needed
        self.available = available
        super().__init__(f"PoolExhausted: need {needed} {kind}, only {available} available")


class AlreadyConfigured(FpdaError, RuntimeError):
    pass


class NotConfigured(FpdaError, RuntimeError):
    pass


class SampleFileError(FpdaError, ValueError):
    """A sample, coefficient or block file could not be parsed

    Args:
        path (str): the offending file
        line (int): 1-based line number, 0 when the whole file is at fault
        reason (str): what went wrong
    """

    def __init__(self, path: str, line: int, reason: str) -> None:
        self.path = str(path)
        self.line = line
        self.reason = reason
        where = f"{self.path}:{line}" if line else self.path
        super().__init__(f"{where}: {reason}")
