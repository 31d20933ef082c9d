"""Error hierarchy shared by all layers.

Every error carries the pipeline stage it was raised in and the CLI exit code
it maps to.
"""

from typing import Optional

from common.config.constants import AppConstants


class StlDecompositionError(Exception):
    """Base class for all errors raised by the decomposition toolkit."""

    exit_code = AppConstants.EXIT_INPUT_ERROR

    def __init__(self, message: str, stage: Optional[str] = None):
        """
        Initialize error.

        Args:
            message: Human readable description
            stage: Pipeline stage the error belongs to
        """
        super().__init__(message)
        self.stage = stage

    def __str__(self) -> str:
        """Message prefixed with the stage, when known."""
        message = super().__str__()
        if self.stage:
            return f"[{self.stage}] {message}"
        return message


class InputError(StlDecompositionError):
    """Malformed or inconsistent user input (exit code 1)."""

    exit_code = AppConstants.EXIT_INPUT_ERROR


class FormulaSyntaxError(InputError):
    """Formula text does not follow the grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}", AppConstants.STAGE_INPUT)
        self.line = line
        self.column = column


class UnknownPredicateError(InputError):
    """Formula references a predicate name missing from the table."""


class IntervalError(InputError):
    """Time interval violates 0 <= a <= b < inf."""


class FragmentError(InputError):
    """Formula lies outside the decomposable fragment."""


class HorizonError(InputError):
    """Trajectory does not cover the times a formula needs."""


class DimensionError(InputError):
    """Vector or trajectory dimensions do not match."""


class PartitionError(InputError):
    """Team partition is overlapping, non-covering or references unknown agents."""


class ScenarioError(InputError):
    """Scenario document failed schema validation."""


class InfeasibleError(StlDecompositionError):
    """A program or plan has no solution (exit code 2)."""

    exit_code = AppConstants.EXIT_INFEASIBLE


class PlanningInfeasibleError(InfeasibleError):
    """A team cannot meet one of its deadlines under its input bound."""

    def __init__(self, message: str, team: int, deadline: Optional[float] = None):
        super().__init__(message, AppConstants.STAGE_PLAN)
        self.team = team
        self.deadline = deadline


class ConvergenceError(StlDecompositionError):
    """Solver exhausted its iteration budget (exit code 2)."""

    exit_code = AppConstants.EXIT_INFEASIBLE


class PropertyViolationError(StlDecompositionError):
    """A checked guarantee failed (exit code 3)."""

    exit_code = AppConstants.EXIT_PROPERTY_VIOLATION
