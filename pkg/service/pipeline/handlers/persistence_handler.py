"""Persistence handler - Step 4: Record decomposition results."""

import logging
from typing import Optional

from domain.models.decomposition_request import DecompositionRequest
from infrastructure.repositories.artifact_repository import ArtifactRepository
from service.pipeline.handlers.base_handler import DecompositionHandler


class PersistenceHandler(DecompositionHandler):
    """
    Hands successful results to the artifact repository.
    Fourth step in the chain.
    """

    def __init__(
        self,
        artifact_repository: ArtifactRepository,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Initialize persistence handler.

        Args:
            artifact_repository: Artifact repository instance
            logger: Logger instance
        """
        super().__init__(logger)
        self.artifact_repository = artifact_repository

    def process(self, request: DecompositionRequest) -> None:
        """Record the decomposition result of a solved request."""
        if request.success and request.result is not None:
            self.artifact_repository.record_decomposition(request.result)
