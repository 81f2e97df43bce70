"""Exception types shared across the toolkit."""


class SpcrfError(Exception):
    """Base class for all toolkit errors."""


class GraphFormatError(SpcrfError):
    """A graph/table/model file violates its format contract.

    ``line`` is the 1-based line number of the offending line, when known.
    """

    def __init__(self, message, line=None):
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)
        self.line = line


class MalformedHeader(GraphFormatError):
    pass


class DanglingEdgeEndpoint(GraphFormatError):
    pass


class DuplicateEdge(GraphFormatError):
    pass


class DimensionMismatch(GraphFormatError):
    pass


class NonPositiveBoundaryLength(GraphFormatError):
    pass


class ImageTooSmall(SpcrfError):
    pass


class SingleClassCorpus(SpcrfError):
    pass


class MissingGroundTruth(SpcrfError):
    pass


class MissingTable(SpcrfError):
    pass


class StateSpaceTooLarge(SpcrfError):
    pass


class LengthMismatch(SpcrfError):
    pass


class InconsistentCorpus(SpcrfError):
    pass


class EmptyMatrix(SpcrfError):
    pass
