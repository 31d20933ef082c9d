"""Agents and scenarios for the simulation harness."""

from dataclasses import dataclass, field, replace
from typing import Any, Dict, Mapping, Optional, Tuple, Union

import numpy as np

from common.config.settings import SolverSettings
from domain.exceptions import DimensionError, ScenarioError
from domain.models.local_task import TimingPolicy
from domain.models.predicate import PredicateFunction
from domain.models.team import TeamPartition

AUTO_INITIAL_STATE = "auto"


@dataclass(frozen=True, eq=False)
class LinearAgent:
    """
    Agent with dynamics x' = A x + u, ||x||_2 <= d_x and ||u||_2 <= d_u.

    `initial_state` is a vector, or "auto" to start at the centre of the
    agent's earliest task box (resolved by the planner).
    """

    id: int
    dynamics: np.ndarray
    state_bound: float
    input_bound: float
    initial_state: Union[np.ndarray, str, None] = None
    domain_box: Optional[Tuple[np.ndarray, np.ndarray]] = None

    def __post_init__(self):
        dynamics = np.atleast_2d(np.asarray(self.dynamics, dtype=float))
        n = dynamics.shape[0]
        if dynamics.shape != (n, n):
            raise DimensionError(f"agent {self.id}: dynamics must be square, got {dynamics.shape}")
        if not (self.state_bound > 0 and self.input_bound > 0):
            raise ScenarioError(f"agent {self.id}: state and input bounds must be positive")
        object.__setattr__(self, "dynamics", dynamics)

        initial = self.initial_state
        if initial is None:
            initial = np.zeros(n)
        if not isinstance(initial, str):
            initial = np.asarray(initial, dtype=float).reshape(-1)
            if initial.shape != (n,):
                raise DimensionError(f"agent {self.id}: initial state must have {n} components")
            if np.linalg.norm(initial) > self.state_bound + 1e-12:
                raise ScenarioError(f"agent {self.id}: initial state lies outside the state bound")
        elif initial != AUTO_INITIAL_STATE:
            raise ScenarioError(f"agent {self.id}: unknown initial state {initial!r}")
        object.__setattr__(self, "initial_state", initial)

        if self.domain_box is not None:
            lo, hi = (np.asarray(v, dtype=float).reshape(-1) for v in self.domain_box)
            if lo.shape != (n,) or hi.shape != (n,) or np.any(lo >= hi):
                raise ScenarioError(f"agent {self.id}: domain box must be {n} ordered bound pairs")
            object.__setattr__(self, "domain_box", (lo, hi))

    @property
    def dim(self) -> int:
        return self.dynamics.shape[0]

    @property
    def auto_initial(self) -> bool:
        return isinstance(self.initial_state, str)

    def box(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Per-coordinate domain box of the agent.

        Defaults to the largest axis-aligned cube inside ||x||_2 <= d_x,
        half-width d_x / sqrt(n), so any box in it respects the state bound.
        """
        if self.domain_box is not None:
            return self.domain_box
        half = self.state_bound / np.sqrt(self.dim)
        return -half * np.ones(self.dim), half * np.ones(self.dim)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything one end-to-end run needs."""

    agents: Tuple[LinearAgent, ...]
    partition: TeamPartition
    predicates: Dict[str, PredicateFunction]
    formula_text: str
    horizon: float
    dt: float
    timing: TimingPolicy = field(default_factory=TimingPolicy)
    solver: SolverSettings = field(default_factory=SolverSettings)
    margin: Optional[float] = None
    name: str = "scenario"
    until_instants: Mapping[int, float] = field(default_factory=dict)
    # timing mode -> conjunct index -> override, so the mode can be switched per run
    timing_options: Mapping[str, Mapping[int, Any]] = field(default_factory=dict)

    def __post_init__(self):
        if not self.dt > 0:
            raise ScenarioError("dt must be positive")
        if not self.horizon > 0:
            raise ScenarioError("horizon must be positive")
        ids = tuple(agent.id for agent in self.agents)
        if tuple(sorted(ids)) != self.partition.agent_ids:
            raise ScenarioError("agents and partition list different agent ids")
        for agent in self.agents:
            if agent.dim != self.partition.agent_dim(agent.id):
                raise ScenarioError(f"agent {agent.id}: dynamics dimension disagrees with partition")
        object.__setattr__(self, "agents", tuple(sorted(self.agents, key=lambda a: a.id)))

    def with_timing(self, mode: Optional[str]) -> "Scenario":
        """Copy running under `mode`, with the overrides declared for that mode."""
        if mode is None or mode == self.timing.mode:
            return self
        overrides = self.timing_options.get(mode, {})
        return replace(self, timing=TimingPolicy(mode, overrides))

    def agent(self, agent_id: int) -> LinearAgent:
        for agent in self.agents:
            if agent.id == agent_id:
                return agent
        raise ScenarioError(f"unknown agent {agent_id}")

    def team_agents(self, team: int) -> Tuple[LinearAgent, ...]:
        return tuple(self.agent(agent_id) for agent_id in self.partition.members(team))

    def team_domain(self, team: int) -> Tuple[np.ndarray, np.ndarray]:
        """Stacked domain boxes of the team's agents (the set Z_l)."""
        boxes = [agent.box() for agent in self.team_agents(team)]
        return np.concatenate([b[0] for b in boxes]), np.concatenate([b[1] for b in boxes])

    @property
    def sample_count(self) -> int:
        """Samples on [0, horizon] at step dt."""
        return int(round(self.horizon / self.dt)) + 1
