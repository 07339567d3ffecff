"""Exception hierarchy.

Every error carries an ``exit_code`` so the command-line front end can map
failures onto its taxonomy: 1 usage/parse, 2 shape, 3 numerical degeneracy.
"""


class GrassmannError(Exception):
    exit_code = 1


class InvalidIndexError(GrassmannError, ValueError):
    exit_code = 1


class DimensionError(GrassmannError, ValueError):
    exit_code = 2


class SizeError(GrassmannError, ValueError):
    """A dense oracle would exceed its memory guard."""

    exit_code = 2


class ParseError(GrassmannError, ValueError):
    exit_code = 1


class NumericalError(GrassmannError, ArithmeticError):
    exit_code = 3


class NotElementaryError(NumericalError):
    pass


class PartitionError(NumericalError):
    pass


class RankDeficiencyError(NumericalError):
    pass


class DegenerateSpectrumError(NumericalError):
    pass


class InvalidSubspaceError(NumericalError):
    pass
