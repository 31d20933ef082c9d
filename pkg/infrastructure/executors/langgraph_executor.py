"""LangGraph executor - Infrastructure layer for the scenario stage graph.

This is part of the Infrastructure Layer following layered architecture.
Uses a LangGraph StateGraph to run the stages of one scenario in order and
to stop at the first stage that fails.
"""

import logging
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypedDict

from langgraph.graph import END, START, StateGraph

from domain.exceptions import StlDecompositionError

CONTINUE = "continue"
STOP = "stop"


class ScenarioState(TypedDict, total=False):
    """Shared state flowing through the stage graph."""

    scenario: Any
    formula: Any
    results: Dict[int, Any]
    tasks: Dict[int, Any]
    plans: Dict[int, Any]
    report: Any
    stage_seconds: Dict[str, float]
    failed_stage: Optional[str]
    error: Optional[StlDecompositionError]


# A stage reads the state and returns the keys it updates
Stage = Callable[[ScenarioState], Dict[str, Any]]


class ScenarioGraphExecutor:
    """
    Runs named stages as a linear LangGraph graph.
    Responsibilities:
    - Build and compile the StateGraph
    - Time every stage
    - Turn stage errors into state (failed_stage, error) and route to END
    """

    def __init__(self, stages: Sequence[Tuple[str, Stage]], logger: Optional[logging.Logger] = None):
        """
        Initialize executor.

        Args:
            stages: (name, callable) pairs in execution order
            logger: Logger instance
        """
        if not stages:
            raise ValueError("Stage graph needs at least one stage")
        self.stage_names: List[str] = [name for name, _ in stages]
        self.logger = logger or logging.getLogger(__name__)
        self.graph = self._build(stages)

    def _wrap(self, name: str, stage: Stage) -> Callable[[ScenarioState], Dict[str, Any]]:
        def node(state: ScenarioState) -> Dict[str, Any]:
            seconds = dict(state.get("stage_seconds") or {})
            started = time.perf_counter()
            try:
                update = stage(state) or {}
            except StlDecompositionError as e:
                if e.stage is None:
                    e.stage = name
                self.logger.error(f"Stage {name} failed: {e}")
                update = {"failed_stage": e.stage, "error": e}
            seconds[name] = time.perf_counter() - started
            update["stage_seconds"] = seconds
            return update

        return node

    @staticmethod
    def _route(state: ScenarioState) -> str:
        return STOP if state.get("error") is not None else CONTINUE

    def _build(self, stages: Sequence[Tuple[str, Stage]]):
        graph = StateGraph(ScenarioState)
        for name, stage in stages:
            graph.add_node(name, self._wrap(name, stage))

        graph.add_edge(START, self.stage_names[0])
        for current, following in zip(self.stage_names, self.stage_names[1:] + [END]):
            graph.add_conditional_edges(current, self._route, {CONTINUE: following, STOP: END})
        return graph.compile()

    def execute(self, initial: ScenarioState) -> ScenarioState:
        """
        Run the graph to completion or to the first failure.

        Args:
            initial: Initial state (at least `scenario`)

        Returns:
            Final state
        """
        state: ScenarioState = {"stage_seconds": {}, "failed_stage": None, "error": None}
        state.update(initial)
        return self.graph.invoke(state)
