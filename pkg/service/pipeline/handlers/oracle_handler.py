"""Oracle handler - Step 3: Cross-check small programs against the grid oracle."""

import logging
from typing import Optional

from common.config.settings import DefaultSettings
from domain.exceptions import InfeasibleError, PropertyViolationError
from domain.models.decomposition_request import DecompositionRequest
from service.decomposition.oracle import grid_oracle
from service.pipeline.handlers.base_handler import DecompositionHandler

ORACLE_GAP_TOLERANCE = 1e-3


class OracleHandler(DecompositionHandler):
    """
    Compares the solver objective with a brute-force grid search.
    Third step in the chain, only added when the oracle is requested.
    """

    def __init__(
        self,
        resolution: int = DefaultSettings.DEFAULT_ORACLE_RESOLUTION,
        max_variables: int = DefaultSettings.DEFAULT_ORACLE_MAX_VARIABLES,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Initialize oracle handler.

        Args:
            resolution: Grid values per decision variable
            max_variables: Programs with more variables are skipped
            logger: Logger instance
        """
        super().__init__(logger)
        self.resolution = resolution
        self.max_variables = max_variables

    def process(self, request: DecompositionRequest) -> None:
        """
        Record the oracle result and flag a solver objective below it.

        Raises:
            PropertyViolationError: When the grid beats the solver by more
                than ORACLE_GAP_TOLERANCE
        """
        if not request.success or request.problem.variable_count > self.max_variables:
            return

        try:
            request.oracle = grid_oracle(request.problem, self.resolution, self.max_variables, self.logger)
        except InfeasibleError:
            # The grid can miss a thin level set the solver found
            self.logger.warning(f"[{request.index}] oracle found no feasible grid point")
            return

        gap = request.oracle.objective - request.result.objective
        request.result.diagnostics["oracle_objective"] = request.oracle.objective
        request.result.diagnostics["oracle_gap"] = gap
        if gap > ORACLE_GAP_TOLERANCE:
            raise PropertyViolationError(
                f"conjunct {request.index}: solver objective {request.result.objective:.6f} is "
                f"{gap:.3e} below the grid oracle {request.oracle.objective:.6f}"
            )
