"""Exception hierarchy shared by all modules."""


class DPSynthError(Exception):
    """Base class for every error raised by this package."""


class InvalidScopeError(DPSynthError, ValueError):
    pass


class InvalidParameterError(DPSynthError, ValueError):
    pass


class DenseGuardError(DPSynthError, ValueError):
    """A dense table over too many attributes was requested."""


class EmptyDatasetError(DPSynthError, ValueError):
    pass


class StructureError(DPSynthError, ValueError):
    """Bayesian-network structure failed validation."""

    def __init__(self, message: str, node: int | None = None):
        super().__init__(message)
        self.node = node


class DegreeViolation(StructureError):
    pass


class TopologyViolation(StructureError):
    pass


class ParseError(DPSynthError, ValueError):
    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class InfeasiblePackingError(DPSynthError, ValueError):
    pass
