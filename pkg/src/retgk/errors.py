"""Exception hierarchy.

Errors split into two families so the CLI can map them to exit codes:
``DataError`` (bad input files or graphs) and ``NumericError`` (a numerical
routine failed or produced an out-of-contract value).
"""


class RetgkError(Exception):
    """Base class for all library errors."""


class DataError(RetgkError, ValueError):
    pass


class NumericError(RetgkError, ArithmeticError):
    pass


class ZeroDegreeNode(DataError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"node {node} has zero degree; add self-loops first")


class InvalidGraph(DataError):
    pass


class InvalidPermutation(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class MissingAttribute(DataError):
    pass


class UnknownSymbol(DataError):
    def __init__(self, symbol):
        self.symbol = symbol
        super().__init__(f"symbol {symbol!r} is not in the alphabet")


class MissingFile(DataError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"required file not found: {path}")


class MalformedLine(DataError):
    def __init__(self, path, lineno, text=""):
        self.path = path
        self.lineno = lineno
        msg = f"{path}:{lineno}: malformed line"
        if text:
            msg += f" ({text})"
        super().__init__(msg)


class InconsistentIndicator(DataError):
    pass


class RaggedAttributes(DataError):
    pass


class FoldTooSmall(DataError):
    pass


class EigenFailure(NumericError):
    pass


class NegativeRadicand(NumericError):
    pass


class DegenerateDistances(NumericError):
    pass


class NotConverged(NumericError):
    pass


class EmbeddingTooLarge(NumericError):
    pass
