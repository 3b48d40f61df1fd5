"""Exception hierarchy shared by every analysis module."""


class ClusterStatsError(Exception):
    """Base class for analysis errors (CLI exit code 1)."""


class DomainError(ClusterStatsError, ValueError):
    """An argument lies outside the domain of a function."""


class DegenerateTableError(ClusterStatsError, ValueError):
    """A contingency table has a zero row or column margin."""


class RankDeficientError(ClusterStatsError, ValueError):
    """A design matrix column is aliased with earlier columns."""

    def __init__(self, column):
        super().__init__(f"design matrix is rank deficient: column {column!r} is aliased")
        self.column = column


class FitError(ClusterStatsError):
    """A model could not be fitted."""


class ParseError(ClusterStatsError, ValueError):
    """Malformed input file. ``line`` is 1-based, counting the header."""

    def __init__(self, message, line=None):
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")
        self.line = line
