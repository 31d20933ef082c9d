"""Base handler for the per-conjunct decomposition chain."""

import logging
from abc import ABC, abstractmethod
from typing import Optional

from common.config.constants import AppConstants
from domain.exceptions import StlDecompositionError
from domain.models.decomposition_request import DecompositionRequest


class DecompositionHandler(ABC):
    """
    One step of the decomposition chain.

    `handle` is the same for every step: requests that already failed skip
    the step (unless it sets `runs_after_failure`), and a
    StlDecompositionError raised by `process` is recorded on the request,
    tagged with the step's stage when it carries none. Other exceptions are
    programming errors and propagate.
    """

    stage: str = AppConstants.STAGE_DECOMPOSE
    runs_after_failure: bool = False

    def __init__(self, logger: Optional[logging.Logger] = None):
        self.logger = logger or logging.getLogger(type(self).__module__)
        self._next_handler: Optional[DecompositionHandler] = None

    def set_next(self, handler: "DecompositionHandler") -> "DecompositionHandler":
        """Append `handler` after this one and return it, so calls chain."""
        self._next_handler = handler
        return handler

    def handle(self, request: DecompositionRequest) -> DecompositionRequest:
        if request.error is None or self.runs_after_failure:
            try:
                self.process(request)
            except StlDecompositionError as e:
                if e.stage is None:
                    e.stage = self.stage
                request.mark_failure(e)
        if self._next_handler is not None:
            return self._next_handler.handle(request)
        return request

    @abstractmethod
    def process(self, request: DecompositionRequest) -> None:
        """Do this step's work on the request; raise StlDecompositionError to fail it."""
