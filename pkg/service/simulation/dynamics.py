"""Forward-Euler rollout of linear agents x' = A x + u."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from common.config.constants import AppConstants
from domain.exceptions import DimensionError, InputError
from domain.models.scenario import LinearAgent
from domain.models.trajectory import Trajectory

BOUND_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class Rollout:
    """Simulated trajectory plus the samples where ||x|| exceeded the state bound."""

    trajectory: Trajectory
    inputs: np.ndarray
    state_violations: Tuple[int, ...] = ()

    @property
    def violation_count(self) -> int:
        return len(self.state_violations)


def step_count(horizon: float, dt: float) -> int:
    """Number of Euler steps covering [0, horizon]."""
    if not dt > 0:
        raise InputError("dt must be positive")
    if not horizon > 0:
        raise InputError("horizon must be positive")
    return int(round(horizon / dt))


def euler_step(dynamics: np.ndarray, x: np.ndarray, u: np.ndarray, dt: float) -> np.ndarray:
    """x + dt (A x + u)."""
    return x + dt * (dynamics @ x + u)


def simulate_dynamics(
    agent: LinearAgent,
    inputs: Sequence[Sequence[float]],
    horizon: float,
    dt: float,
    initial_state: Optional[Sequence[float]] = None,
) -> Rollout:
    """
    Roll an agent forward under a sampled input signal.

    Args:
        agent: Agent with dynamics and bounds
        inputs: K x n inputs, u_k held over [k dt, (k+1) dt); K = horizon / dt
        horizon: Final time
        dt: Step
        initial_state: Overrides the agent's initial state

    Returns:
        Rollout with K + 1 samples

    Raises:
        DimensionError: When the input array does not have K rows of n values
        InputError: When an input exceeds the agent's input bound
    """
    steps = step_count(horizon, dt)
    u = np.asarray(inputs, dtype=float)
    if u.ndim == 1 and agent.dim == 1:
        u = u.reshape(-1, 1)
    if u.shape != (steps, agent.dim):
        raise DimensionError(f"agent {agent.id}: expected {steps} x {agent.dim} inputs, got {u.shape}")

    norms = np.linalg.norm(u, axis=1)
    over = np.flatnonzero(norms > agent.input_bound * (1.0 + BOUND_TOLERANCE))
    if over.size:
        k = int(over[0])
        raise InputError(
            f"agent {agent.id}: input {norms[k]:.6g} at t={k * dt:.6g} exceeds bound {agent.input_bound}",
            AppConstants.STAGE_PLAN,
        )

    if initial_state is None:
        if agent.auto_initial:
            raise InputError(f"agent {agent.id}: automatic initial state must be resolved before simulation")
        initial_state = agent.initial_state
    x = np.asarray(initial_state, dtype=float).reshape(-1)
    if x.shape != (agent.dim,):
        raise DimensionError(f"agent {agent.id}: initial state must have {agent.dim} components")

    samples = np.empty((steps + 1, agent.dim))
    samples[0] = x
    for k in range(steps):
        samples[k + 1] = euler_step(agent.dynamics, samples[k], u[k], dt)

    norms = np.linalg.norm(samples, axis=1)
    violations = tuple(int(k) for k in np.flatnonzero(norms > agent.state_bound * (1.0 + BOUND_TOLERANCE)))
    return Rollout(Trajectory(samples, dt), u, violations)
