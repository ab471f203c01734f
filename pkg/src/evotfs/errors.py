"""Exception hierarchy shared by every evotfs module."""


class EvoTfsError(Exception):
    """Base class; the CLI maps any subclass to exit code 1."""


class FormatError(EvoTfsError):
    def __init__(self, row: int, message: str = "ragged row"):
        self.row = row
        super().__init__(f"row {row}: {message}")


class ParseError(EvoTfsError):
    def __init__(self, row: int, col: int, token: str = ""):
        self.row = row
        self.col = col
        super().__init__(f"row {row}, col {col}: cannot parse {token!r} as a finite number")


class EmptyDataset(EvoTfsError):
    pass


class DegenerateScale(EvoTfsError):
    pass


class NotImbalanceable(EvoTfsError):
    pass


class UnknownClass(EvoTfsError):
    pass


class WindowTooLong(EvoTfsError):
    pass


class InvalidWindow(EvoTfsError):
    pass


class SeriesTooShort(EvoTfsError):
    pass


class EmptyPopulation(EvoTfsError):
    pass


class EmptySeries(EvoTfsError):
    pass


class LengthMismatch(EvoTfsError):
    pass


class InvalidSigma(EvoTfsError):
    pass


class EmptyPlan(EvoTfsError):
    pass


class KTooLarge(EvoTfsError):
    pass


class ConfigError(EvoTfsError):
    pass


class TreeTypeError(EvoTfsError):
    """A tree violates the strongly-typed grammar."""
