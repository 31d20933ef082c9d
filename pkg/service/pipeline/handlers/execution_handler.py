"""Execution handler - Step 2: Solve the decomposition program."""

import logging
import time
from typing import Optional

from common.config.settings import DefaultSettings, SolverSettings
from domain.exceptions import ConvergenceError
from domain.models.decomposition_request import DecompositionRequest
from service.decomposition.hypercube import solve_decomposition
from service.pipeline.handlers.base_handler import DecompositionHandler


class ExecutionHandler(DecompositionHandler):
    """
    Solves the decomposition program.
    Second step in the chain.

    A run that exhausts its iteration budget is retried with the budget
    doubled, up to `max_attempts` solves. Infeasibility is final.
    """

    def __init__(
        self,
        settings: Optional[SolverSettings] = None,
        max_attempts: int = 2,
        degenerate_radius: float = DefaultSettings.DEFAULT_DEGENERATE_RADIUS,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Initialize execution handler.

        Args:
            settings: Solver tolerances and budgets
            max_attempts: Maximum number of solves per request
            degenerate_radius: Radius at or below which a cube is flagged degenerate
            logger: Logger instance
        """
        super().__init__(logger)
        self.settings = settings or SolverSettings()
        self.max_attempts = max_attempts
        self.degenerate_radius = degenerate_radius

    def _settings_for(self, attempt: int) -> SolverSettings:
        scale = 2 ** (attempt - 1)
        return SolverSettings(
            feasibility_tolerance=self.settings.feasibility_tolerance,
            optimality_tolerance=self.settings.optimality_tolerance,
            initial_barrier_weight=self.settings.initial_barrier_weight,
            barrier_factor=self.settings.barrier_factor,
            max_outer_iterations=self.settings.max_outer_iterations * scale,
            max_inner_iterations=self.settings.max_inner_iterations * scale,
        )

    def process(self, request: DecompositionRequest) -> None:
        """
        Solve the program attached by validation.

        Raises:
            ConvergenceError: When every attempt ran out of iterations
            InfeasibleError: When the level set has no box inside the domain
        """
        started = time.perf_counter()
        try:
            while True:
                request.increment_attempt()
                try:
                    result = solve_decomposition(
                        request.problem,
                        self._settings_for(request.attempt_count),
                        self.degenerate_radius,
                        self.logger,
                    )
                except ConvergenceError as e:
                    self.logger.warning(
                        f"[{request.index}] attempt {request.attempt_count}/{self.max_attempts}: {e}"
                    )
                    if request.attempt_count >= self.max_attempts:
                        raise
                    continue
                request.mark_success(result)
                request.set_timing(time.perf_counter() - started, int(result.diagnostics.get("iterations", 0)))
                return
        finally:
            if not request.success:
                request.set_timing(time.perf_counter() - started, 0)
