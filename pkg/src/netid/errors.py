"""Exception types raised by netid.

Each carries a short machine-readable ``code`` used by the command line
front-end when reporting failures.
"""


class NetidError(Exception):
    code = "netid-error"


class InvalidInputError(NetidError, ValueError):
    code = "invalid-input"


class GramianUndefinedError(NetidError):
    """The augmented Lyapunov equation has no solution."""

    code = "gramian-undefined"

    def __init__(self, message, eigenvalue_pairs=()):
        super().__init__(message)
        self.eigenvalue_pairs = list(eigenvalue_pairs)


class EnumerationTooLargeError(NetidError):
    code = "enumeration-too-large"


class SolverError(NetidError):
    code = "solver-error"

    def __init__(self, message, column=None):
        super().__init__(message)
        self.column = column


class InfeasibleError(NetidError):
    code = "infeasible"
