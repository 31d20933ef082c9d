"""Decomposition request data object."""

from typing import Dict, Optional, Tuple

import numpy as np

from domain.exceptions import StlDecompositionError
from domain.models.formula import TimeInterval
from domain.models.hypercube import DecompositionProblem, DecompositionResult
from domain.models.predicate import PredicateFunction
from domain.models.team import TeamPartition


class DecompositionRequest:
    """
    Data object representing the decomposition of one global conjunct.
    Used in the Chain of Responsibility pattern.
    """

    def __init__(
        self,
        index: int,
        operator: str,
        interval: TimeInterval,
        predicate: PredicateFunction,
        negated: bool,
        partition: TeamPartition,
        domain: Tuple[Tuple[np.ndarray, np.ndarray], ...],
    ):
        """
        Initialize decomposition request.

        Args:
            index: Global conjunct index i (1-based)
            operator: "G" or "F"
            interval: Interval [a_i, b_i] of the conjunct
            predicate: Predicate function h_i
            negated: Whether the conjunct reads the negated predicate
            partition: Team partition
            domain: Per-team (lower, upper) state boxes Z_l, in team order
        """
        self.index = index
        self.operator = operator
        self.interval = interval
        self.predicate = predicate
        self.negated = negated
        self.partition = partition
        self.domain = domain

        # Results
        self.problem: Optional[DecompositionProblem] = None
        self.result: Optional[DecompositionResult] = None
        self.oracle: Optional[DecompositionResult] = None
        self.success = False
        self.error: Optional[StlDecompositionError] = None

        # Metadata
        self.attempt_count = 0
        self.solve_seconds = 0.0
        self.iterations = 0

    def mark_success(self, result: DecompositionResult):
        """
        Mark request as successful.

        Args:
            result: Solved decomposition
        """
        self.success = True
        self.result = result
        self.error = None

    def mark_failure(self, error: StlDecompositionError):
        """
        Mark request as failed.

        Args:
            error: Stage-attributed error
        """
        self.success = False
        self.error = error

    def increment_attempt(self):
        """Increment solve attempt counter."""
        self.attempt_count += 1

    def domain_boxes(self) -> Dict[int, Tuple[np.ndarray, np.ndarray]]:
        """team -> (lower, upper) state box."""
        return {team: box for team, box in enumerate(self.domain, start=1)}

    def set_timing(self, seconds: float, iterations: int):
        """
        Record solver effort.

        Args:
            seconds: Wall-clock solve time
            iterations: Newton iterations used
        """
        self.solve_seconds = seconds
        self.iterations = iterations

    def is_valid(self) -> bool:
        """
        Check if request is valid for processing.

        Returns:
            True if request has valid data
        """
        return (
            self.index > 0
            and self.operator in ("G", "F")
            and self.predicate is not None
            and len(self.domain) == self.partition.team_count
        )

    def __repr__(self) -> str:
        """String representation."""
        status = "SUCCESS" if self.success else "FAILED" if self.error else "PENDING"
        return f"DecompositionRequest(index={self.index}, status={status}, iterations={self.iterations})"
