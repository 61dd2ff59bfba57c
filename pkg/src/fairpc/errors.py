"""Exception hierarchy.

Input problems (bad shapes, non-unit vectors, malformed CSV) derive from
``InputError``; numerical failures derive from ``SolverError``. The CLI maps
the two families onto distinct exit codes.
"""


class FairPCError(Exception):
    pass


class InputError(FairPCError, ValueError):
    pass


class DimensionMismatchError(InputError):
    def __init__(self, message, group=None):
        super().__init__(message)
        self.group = group


class NotUnitVectorError(InputError):
    def __init__(self, norm):
        super().__init__(f"expected a unit vector, got norm {norm!r}")
        self.norm = norm


class IngestError(InputError):
    """CSV ingestion failure; ``row`` is 1-based over data rows (header excluded)."""

    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class SolverError(FairPCError, RuntimeError):
    pass


class EigenConvergenceError(SolverError):
    """Power iteration ran out of iterations; carries the best iterate seen."""

    def __init__(self, message, value, vector, residual, iterations):
        super().__init__(message)
        self.value = value
        self.vector = vector
        self.residual = residual
        self.iterations = iterations
