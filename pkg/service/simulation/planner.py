"""Waypoint planner for one team's local tasks.

Every local conjunct pins a set of team coordinates to [c - r', c + r'] over
a window of samples. The planner aims each coordinate at the centre of the
box it must be in next, drives the agent there with a deadbeat input that is
saturated at the input bound, and rolls the result out with forward Euler.
The plan is accepted only if the rollout satisfies the team's task.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np

from common.config.constants import AppConstants
from domain.exceptions import DimensionError, HorizonError, PlanningInfeasibleError
from domain.models.local_task import LocalTaskSet
from domain.models.scenario import LinearAgent
from domain.models.trajectory import Trajectory
from service.simulation.dynamics import Rollout, simulate_dynamics, step_count
from service.stl.semantics import RobustnessEvaluator

logger = logging.getLogger(__name__)

SATURATION_SCALE = 1.0 - 1e-12


@dataclass(frozen=True, eq=False)
class TeamPlan:
    """Planned team trajectory z_l with its per-agent rollouts."""

    team: int
    trajectory: Trajectory
    rollouts: Dict[int, Rollout]
    robustness: float
    conjunct_robustness: Dict[str, float] = field(default_factory=dict)

    @property
    def state_violations(self) -> int:
        return sum(rollout.violation_count for rollout in self.rollouts.values())


def task_bindings(tasks: LocalTaskSet):
    """Predicate name -> hypercube value on team-state stacks."""
    return {name: cube.value for name, cube in tasks.predicates().items()}


def box_schedule(tasks: LocalTaskSet, team_dim: int, samples: int, dt: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Per-sample bounds every team coordinate has to respect.

    Returns:
        (lower, upper), both samples x team_dim, -inf/+inf where unconstrained

    Raises:
        HorizonError: When a conjunct reaches past the last sample
    """
    lower = np.full((samples, team_dim), -np.inf)
    upper = np.full((samples, team_dim), np.inf)
    grid = Trajectory(np.zeros((samples, 1)), dt)
    for conjunct in tasks.conjuncts:
        cube = conjunct.cube
        if cube.dim != team_dim:
            raise DimensionError(f"team {tasks.team}: cube over {cube.dim} coordinates, team state has {team_dim}")
        window = grid.window(conjunct.interval.a, conjunct.interval.b)
        lo, hi = cube.bounds()
        rows = slice(window.start, window.stop)
        for j, coordinate in enumerate(cube.coordinates):
            lower[rows, coordinate] = np.maximum(lower[rows, coordinate], lo[j])
            upper[rows, coordinate] = np.minimum(upper[rows, coordinate], hi[j])
    return lower, upper


def waypoint_targets(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """
    For every sample and coordinate, the centre of the current or next box.

    NaN where no box lies ahead. Conflicting boxes (lower > upper) keep the
    midpoint; the final robustness check rejects such plans.
    """
    constrained = np.isfinite(lower) & np.isfinite(upper)
    mid = np.full(lower.shape, np.nan)
    mid[constrained] = 0.5 * (lower[constrained] + upper[constrained])
    targets = np.full_like(mid, np.nan)
    ahead = np.full(mid.shape[1], np.nan)
    for k in range(mid.shape[0] - 1, -1, -1):
        ahead = np.where(constrained[k], mid[k], ahead)
        targets[k] = ahead
    return targets


def resolve_initial_states(
    agents: Sequence[LinearAgent], targets: np.ndarray
) -> Dict[int, np.ndarray]:
    """
    Initial state per agent; "auto" agents start at their first box centres.

    Coordinates no box ever constrains start at zero.
    """
    states = {}
    offset = 0
    for agent in agents:
        if agent.auto_initial:
            first = targets[0, offset:offset + agent.dim]
            states[agent.id] = np.where(np.isnan(first), 0.0, first)
        else:
            states[agent.id] = np.asarray(agent.initial_state, dtype=float)
        offset += agent.dim
    return states


def saturated_input(agent: LinearAgent, x: np.ndarray, target: np.ndarray, dt: float) -> np.ndarray:
    """Input reaching `target` in one step, scaled back onto ||u|| <= d_u."""
    u = (target - x) / dt - agent.dynamics @ x
    norm = float(np.linalg.norm(u))
    if norm > agent.input_bound:
        u = u * (agent.input_bound * SATURATION_SCALE / norm)
    return u


def _agent_inputs(agent: LinearAgent, x0: np.ndarray, targets: np.ndarray, dt: float) -> np.ndarray:
    steps = targets.shape[0] - 1
    inputs = np.zeros((steps, agent.dim))
    x = x0.copy()
    for k in range(steps):
        target = np.where(np.isnan(targets[k + 1]), x, targets[k + 1])
        inputs[k] = saturated_input(agent, x, target, dt)
        x = x + dt * (agent.dynamics @ x + inputs[k])
    return inputs


def _first_violation(tasks: LocalTaskSet, evaluator: RobustnessEvaluator) -> Tuple[float, str, float]:
    failing = []
    for conjunct in tasks.conjuncts:
        rho = evaluator.at_index(conjunct.formula(), 0)
        if rho <= 0:
            failing.append((conjunct.interval.a, conjunct.name, rho))
    return min(failing) if failing else (math.nan, "", math.nan)


def plan_team_trajectory(
    tasks: LocalTaskSet,
    agents: Sequence[LinearAgent],
    horizon: float,
    dt: float,
    team_logger: Optional[logging.Logger] = None,
) -> TeamPlan:
    """
    Plan and verify a trajectory for one team.

    Args:
        tasks: The team's local task set
        agents: The team's agents in ascending id order
        horizon: Final time
        dt: Step

    Returns:
        TeamPlan whose trajectory satisfies the team's task (robustness > 0)

    Raises:
        HorizonError: When a task interval ends after the horizon
        PlanningInfeasibleError: When the rollout misses a box; names the deadline
    """
    log = team_logger or logger
    tol = AppConstants.GRID_SNAP_TOLERANCE
    if tasks.horizon() > horizon + tol:
        raise HorizonError(
            f"team {tasks.team}: tasks reach t={tasks.horizon()} beyond horizon {horizon}",
            AppConstants.STAGE_PLAN,
        )
    samples = step_count(horizon, dt) + 1
    team_dim = sum(agent.dim for agent in agents)
    lower, upper = box_schedule(tasks, team_dim, samples, dt)
    targets = waypoint_targets(lower, upper)
    initial = resolve_initial_states(agents, targets)

    rollouts: Dict[int, Rollout] = {}
    offset = 0
    for agent in agents:
        agent_targets = targets[:, offset:offset + agent.dim]
        inputs = _agent_inputs(agent, initial[agent.id], agent_targets, dt)
        rollouts[agent.id] = simulate_dynamics(agent, inputs, horizon, dt, initial[agent.id])
        offset += agent.dim

    trajectory = Trajectory.stack([rollouts[agent.id].trajectory for agent in agents])
    formula = tasks.formula()
    if formula is None:
        return TeamPlan(tasks.team, trajectory, rollouts, math.inf)

    evaluator = RobustnessEvaluator(trajectory, task_bindings(tasks))
    rho = evaluator.at_index(formula, 0)
    per_conjunct = {c.name: evaluator.at_index(c.formula(), 0) for c in tasks.conjuncts}
    if rho <= 0:
        deadline, name, value = _first_violation(tasks, evaluator)
        raise PlanningInfeasibleError(
            f"team {tasks.team}: {name} not met by t={deadline} (robustness {value:.3e}) "
            f"under input bounds {[a.input_bound for a in agents]}",
            tasks.team,
            deadline,
        )

    violations = sum(r.violation_count for r in rollouts.values())
    if violations:
        log.warning(f"team {tasks.team}: {violations} samples leave the state bound")
    log.debug(f"team {tasks.team}: planned {samples} samples, robustness {rho:.6f}")
    return TeamPlan(tasks.team, trajectory, rollouts, rho, per_conjunct)
