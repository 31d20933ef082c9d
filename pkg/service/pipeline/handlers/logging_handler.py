"""Logging handler - Step 5: Log results."""

from domain.models.decomposition_request import DecompositionRequest
from service.pipeline.handlers.base_handler import DecompositionHandler


class LoggingHandler(DecompositionHandler):
    """
    Logs decomposition results, failed ones included.
    Last step in the chain.
    """

    runs_after_failure = True

    def process(self, request: DecompositionRequest) -> None:
        """Log the outcome of one conjunct."""
        if request.success:
            radii = ", ".join(f"{cube.team}:{cube.radius:.4f}" for cube in request.result.cubes)
            self.logger.info(
                f"[{request.index}] solved "
                f"(objective: {request.result.objective:.6f}, radii: {radii}, "
                f"iterations: {request.iterations}, {request.solve_seconds:.3f}s)"
            )
        else:
            self.logger.error(
                f"[{request.index}] failed: {request.error} "
                f"(attempts: {request.attempt_count})"
            )
