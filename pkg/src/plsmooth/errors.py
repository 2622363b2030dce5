"""Exception types raised across the package."""


class IoError(OSError):
    """A file could not be opened, read or written."""


class FormatError(ValueError):
    """A file was readable but its contents are not a valid image of the requested kind."""


class DimensionMismatch(ValueError):
    pass


class DegenerateRange(ValueError):
    pass


class NonPositiveLuminance(ValueError):
    pass


class CgDidNotConverge(RuntimeError):
    def __init__(self, iterations, residual):
        super().__init__(
            f"conjugate gradient stopped after {iterations} iterations "
            f"with relative residual {residual:.3e}"
        )
        self.iterations = iterations
        self.residual = residual
