"""Decomposition pipeline builder implementing Builder pattern."""

import logging
from typing import Optional

from common.config.settings import DefaultSettings, SolverSettings
from infrastructure.repositories.artifact_repository import ArtifactRepository
from service.pipeline.handlers.base_handler import DecompositionHandler
from service.pipeline.handlers.execution_handler import ExecutionHandler
from service.pipeline.handlers.logging_handler import LoggingHandler
from service.pipeline.handlers.oracle_handler import OracleHandler
from service.pipeline.handlers.persistence_handler import PersistenceHandler
from service.pipeline.handlers.validation_handler import ValidationHandler


class DecompositionPipelineBuilder:
    """
    Builds the per-conjunct decomposition pipeline using Builder pattern.
    Chains handlers together using Chain of Responsibility pattern.
    """

    def __init__(self):
        """Initialize pipeline builder."""
        self._handlers = []

    def add_validation(self, logger: Optional[logging.Logger] = None) -> "DecompositionPipelineBuilder":
        """
        Add validation handler to pipeline.

        Args:
            logger: Logger instance

        Returns:
            Self for method chaining
        """
        self._handlers.append(ValidationHandler(logger))
        return self

    def add_execution(
        self,
        settings: Optional[SolverSettings] = None,
        max_attempts: int = 2,
        degenerate_radius: float = DefaultSettings.DEFAULT_DEGENERATE_RADIUS,
        logger: Optional[logging.Logger] = None,
    ) -> "DecompositionPipelineBuilder":
        """
        Add execution handler to pipeline.

        Args:
            settings: Solver tolerances and budgets
            max_attempts: Maximum solves per request
            degenerate_radius: Degenerate-cube threshold
            logger: Logger instance

        Returns:
            Self for method chaining
        """
        self._handlers.append(ExecutionHandler(settings, max_attempts, degenerate_radius, logger))
        return self

    def add_oracle(
        self,
        resolution: int = DefaultSettings.DEFAULT_ORACLE_RESOLUTION,
        max_variables: int = DefaultSettings.DEFAULT_ORACLE_MAX_VARIABLES,
        logger: Optional[logging.Logger] = None,
    ) -> "DecompositionPipelineBuilder":
        """
        Add grid-oracle cross-check handler to pipeline.

        Args:
            resolution: Grid values per decision variable
            max_variables: Variable guard of the oracle
            logger: Logger instance

        Returns:
            Self for method chaining
        """
        self._handlers.append(OracleHandler(resolution, max_variables, logger))
        return self

    def add_persistence(
        self,
        artifact_repository: ArtifactRepository,
        logger: Optional[logging.Logger] = None,
    ) -> "DecompositionPipelineBuilder":
        """
        Add persistence handler to pipeline.

        Args:
            artifact_repository: Artifact repository instance
            logger: Logger instance

        Returns:
            Self for method chaining
        """
        self._handlers.append(PersistenceHandler(artifact_repository, logger))
        return self

    def add_logging(self, logger: Optional[logging.Logger] = None) -> "DecompositionPipelineBuilder":
        """
        Add logging handler to pipeline.

        Args:
            logger: Logger instance

        Returns:
            Self for method chaining
        """
        self._handlers.append(LoggingHandler(logger))
        return self

    def build(self) -> DecompositionHandler:
        """
        Build the pipeline by chaining handlers.

        Returns:
            First handler in the chain

        Raises:
            ValueError: If no handlers were added
        """
        if not self._handlers:
            raise ValueError("Pipeline must have at least one handler")

        # Chain handlers together
        for i in range(len(self._handlers) - 1):
            self._handlers[i].set_next(self._handlers[i + 1])

        # Return first handler
        return self._handlers[0]

    def reset(self) -> "DecompositionPipelineBuilder":
        """
        Reset builder to start fresh.

        Returns:
            Self for method chaining
        """
        self._handlers = []
        return self
