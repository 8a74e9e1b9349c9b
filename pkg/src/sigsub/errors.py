"""Exception hierarchy.

Errors fall in two families so the CLI can map them onto exit codes:
``DataError`` (malformed graphs, datasets, files; exit 3) and
``HyperParameterError`` (budgets that cannot be honoured; exit 4).
"""


class SigsubError(Exception):
    """Base class for every error raised by this package."""


class DataError(SigsubError, ValueError):
    pass


class HyperParameterError(SigsubError, ValueError):
    pass


# graph validation -----------------------------------------------------------

class GraphError(DataError):
    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class NotSquare(GraphError):
    pass


class NotBinary(GraphError):
    pass


class NotSymmetric(GraphError):
    pass


class NonzeroDiagonal(GraphError):
    pass


class DimensionMismatch(DataError):
    pass


class EdgeOutOfRange(DataError):
    pass


class VTooSmall(DataError):
    pass


class EmptyClass(DataError):
    pass


class EmptyDataset(DataError):
    pass


class EmptyInput(DataError):
    pass


class TooFewSamples(DataError):
    pass


class DegenerateFold(DataError):
    pass


class LengthMismatch(DataError):
    pass


class GridMismatch(DataError):
    pass


class EmptyTruth(DataError):
    pass


class DivisionDegenerate(DataError):
    pass


class MissingNuisance(DataError):
    pass


class FileFormatError(DataError):
    """An input file is missing or does not parse."""


# hyper-parameters -----------------------------------------------------------

class SOutOfRange(HyperParameterError):
    pass


class MOutOfRange(HyperParameterError):
    pass


class Infeasible(HyperParameterError):
    pass


class KOutOfRange(HyperParameterError):
    pass


class InfeasibleSpec(HyperParameterError):
    pass
