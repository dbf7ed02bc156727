"""
BRST Reduction - Error Module
Exception hierarchy shared by all modules. Every class carries the
error code used in reports and on the command line.
"""


class ReductionError(Exception):
    """Base class for all errors raised by the reduction engine."""

    code = "ERROR"

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_dict(self) -> dict:
        data = {"code": self.code, "message": self.message}
        if self.witness is not None:
            data["witness"] = str(self.witness)
        return data


class NotDivisibleError(ReductionError, ArithmeticError):
    code = "NOT_DIVISIBLE"


class DegreeBoundExceeded(ReductionError, ValueError):
    code = "DEGREE_BOUND_EXCEEDED"


class ZeroDegreeError(ReductionError, ValueError):
    code = "ZERO_DEGREE"


class NotInvariantError(ReductionError, ValueError):
    code = "NOT_INVARIANT"


class NotClosedError(ReductionError, ValueError):
    code = "NOT_CLOSED"


class NotEquivariantError(ReductionError, ValueError):
    code = "NOT_EQUIVARIANT"


class UnsupportedScenarioError(ReductionError, ValueError):
    code = "UNSUPPORTED_N"


class ExpressionParseError(ReductionError, ValueError):
    code = "PARSE"


class ScenarioAxiomError(ReductionError):
    """A construction-time axiom check of a scenario failed."""

    code = "SCENARIO_AXIOM"


class InternalConsistencyError(ReductionError, RuntimeError):
    """An identity that holds by construction failed: a bug, not bad input."""

    code = "INTERNAL"
