"""Validation handler - Step 1: Request validation and program assembly."""

from common.config.constants import AppConstants
from domain.exceptions import InputError
from domain.models.decomposition_request import DecompositionRequest
from service.decomposition.hypercube import assemble_program, level_set_hint
from service.pipeline.handlers.base_handler import DecompositionHandler


class ValidationHandler(DecompositionHandler):
    """
    Validates decomposition requests and assembles their programs.
    First step in the chain.
    """

    def process(self, request: DecompositionRequest) -> None:
        """
        Validate the request and attach its decomposition program.

        Raises:
            InputError: For a malformed request
            FragmentError: When the constrained function is not concave
        """
        if not request.is_valid():
            raise InputError(
                f"conjunct {request.index}: malformed decomposition request", AppConstants.STAGE_INPUT
            )

        request.problem = assemble_program(
            request.predicate,
            request.partition,
            request.domain_boxes(),
            source=request.index,
            negated=request.negated,
        )

        # Phase-I decides; this only makes the log more helpful
        if not level_set_hint(request.problem):
            self.logger.debug(
                f"[{request.index}] predicate is negative at the domain and predicate centres; "
                f"relying on phase-one"
            )
