"""Tests for the Euler rollout and the waypoint planner."""

import os
import sys
import unittest
import warnings

import numpy as np

# Add parent directory to path
parent_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_dir)

from common.config.constants import AppConstants
from domain.exceptions import DimensionError, HorizonError, InputError, PlanningInfeasibleError, ScenarioError
from domain.models.formula import TimeInterval
from domain.models.hypercube import HypercubePredicate
from domain.models.local_task import LocalConjunct, LocalTaskSet
from domain.models.scenario import AUTO_INITIAL_STATE, LinearAgent
from service.simulation.dynamics import euler_step, simulate_dynamics, step_count
from service.simulation.planner import (
    box_schedule,
    plan_team_trajectory,
    resolve_initial_states,
    saturated_input,
    waypoint_targets,
)


def conjunct(source, operator, a, b, center, radius, coordinates=(0, 1), team=1):
    return LocalConjunct(
        team=team,
        source=source,
        operator=operator,
        interval=TimeInterval(a, b),
        cube=HypercubePredicate(team=team, center=center, radius=radius, coordinates=coordinates, source=source),
        margin=0.0,
    )


class TestLinearAgent(unittest.TestCase):
    """Test LinearAgent validation."""

    def test_default_box_fits_state_bound(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 5.0)
        lo, hi = agent.box()
        np.testing.assert_allclose(hi, [1 / np.sqrt(2)] * 2)
        self.assertAlmostEqual(float(np.linalg.norm(hi)), 1.0)
        np.testing.assert_array_equal(agent.initial_state, [0.0, 0.0])

    def test_non_square_dynamics(self):
        with self.assertRaises(DimensionError):
            LinearAgent(1, np.zeros((2, 3)), 1.0, 5.0)

    def test_initial_state_outside_bound(self):
        with self.assertRaises(ScenarioError):
            LinearAgent(1, -np.eye(2), 1.0, 5.0, [1.0, 1.0])

    def test_unknown_initial_keyword(self):
        with self.assertRaises(ScenarioError):
            LinearAgent(1, -np.eye(2), 1.0, 5.0, "origin")


class TestDynamics(unittest.TestCase):
    """Test simulate_dynamics."""

    def test_single_euler_step(self):
        agent = LinearAgent(1, -np.eye(2), 2.0, 5.0, [1.0, 0.0])
        rollout = simulate_dynamics(agent, np.zeros((1, 2)), horizon=0.1, dt=0.1)
        np.testing.assert_allclose(rollout.trajectory.state(1), [0.9, 0.0])
        self.assertEqual(len(rollout.trajectory), 2)

    def test_euler_step_with_input(self):
        x = euler_step(np.array([[0.0, 1.0], [0.0, 0.0]]), np.array([1.0, 2.0]), np.array([0.0, 1.0]), 0.5)
        np.testing.assert_allclose(x, [2.0, 2.5])

    def test_input_bound(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 1.0)
        inputs = np.zeros((10, 2))
        inputs[3] = [1.0, 1.0]
        with self.assertRaises(InputError) as ctx:
            simulate_dynamics(agent, inputs, horizon=1.0, dt=0.1)
        self.assertEqual(ctx.exception.stage, AppConstants.STAGE_PLAN)

    def test_input_shape(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 1.0)
        with self.assertRaises(DimensionError):
            simulate_dynamics(agent, np.zeros((9, 2)), horizon=1.0, dt=0.1)

    def test_state_bound_violations_are_flagged(self):
        agent = LinearAgent(1, np.zeros((1, 1)), 1.0, 5.0, [0.9])
        rollout = simulate_dynamics(agent, np.full((5, 1), 1.0), horizon=0.5, dt=0.1)
        # 0.9, 1.0, 1.1, ... ; samples 2..5 leave the bound
        self.assertEqual(rollout.state_violations, (2, 3, 4, 5))
        self.assertEqual(rollout.violation_count, 4)

    def test_auto_initial_state_must_be_resolved(self):
        agent = LinearAgent(1, -np.eye(1), 1.0, 5.0, AUTO_INITIAL_STATE)
        with self.assertRaises(InputError):
            simulate_dynamics(agent, np.zeros((1, 1)), horizon=0.1, dt=0.1)

    def test_zero_input_decays(self):
        """Both drift matrices of the five-agent scenario are Hurwitz and contract the state."""
        for dynamics in ([[-0.5, 0.0], [1.0, -1.0]], [[-1.0, -1.0], [0.0, -3.0]]):
            self.assertTrue(np.all(np.linalg.eigvals(dynamics).real < 0))
            for initial in ([0.6, 0.0], [0.0, 0.6], [-0.4, 0.5]):
                agent = LinearAgent(1, dynamics, 1.0, 5.0, initial)
                rollout = simulate_dynamics(agent, np.zeros((50, 2)), horizon=5.0, dt=0.1)
                norms = np.linalg.norm(rollout.trajectory.samples, axis=1)
                self.assertTrue(np.all(np.diff(norms) < 0), f"{dynamics} from {initial}")
                self.assertLess(norms[-1], 0.5 * norms[0])
                self.assertEqual(rollout.violation_count, 0)

    def test_euler_error_is_first_order(self):
        """A rollout differs from a ten times finer one by O(dt)."""
        agent = LinearAgent(1, [[-0.5, 0.0], [1.0, -1.0]], 1.0, 5.0, [0.6, 0.6])

        def gap(dt):
            coarse = simulate_dynamics(agent, np.zeros((step_count(2.0, dt), 2)), horizon=2.0, dt=dt)
            fine_dt = dt / 10.0
            fine = simulate_dynamics(agent, np.zeros((step_count(2.0, fine_dt), 2)), horizon=2.0, dt=fine_dt)
            return float(np.max(np.abs(coarse.trajectory.samples - fine.trajectory.samples[::10])))

        first, second = gap(0.1), gap(0.05)
        self.assertLess(first, 0.05)
        self.assertGreater(first / second, 1.6)
        self.assertLess(first / second, 2.4)

    def test_step_count(self):
        self.assertEqual(step_count(10.0, 0.1), 100)
        with self.assertRaises(InputError):
            step_count(10.0, 0.0)


class TestPlannerHelpers(unittest.TestCase):
    """Test box_schedule, waypoint_targets and friends."""

    def setUp(self):
        self.tasks = LocalTaskSet(
            1,
            (
                conjunct(1, "G", 0.0, 0.2, (0.3, 0.0), 0.1, coordinates=(0,)),
                conjunct(2, "F", 0.4, 0.4, (-0.3, 0.5), 0.1),
            ),
            AppConstants.TIMING_POINT,
            0.0,
        )

    def test_box_schedule(self):
        lower, upper = box_schedule(self.tasks, 2, 6, 0.1)
        self.assertEqual(lower.shape, (6, 2))
        np.testing.assert_allclose(lower[0:3, 0], [0.2] * 3)
        self.assertTrue(np.all(np.isinf(lower[0:4, 1])))
        np.testing.assert_allclose(upper[4], [-0.2, 0.6])
        self.assertTrue(np.all(np.isinf(upper[5])))

    def test_box_schedule_past_last_sample(self):
        with self.assertRaises(HorizonError):
            box_schedule(self.tasks, 2, 3, 0.1)

    def test_waypoint_targets_look_ahead(self):
        lower, upper = box_schedule(self.tasks, 2, 6, 0.1)
        with warnings.catch_warnings():
            # unconstrained cells must not produce inf - inf
            warnings.simplefilter("error")
            targets = waypoint_targets(lower, upper)
        np.testing.assert_allclose(targets[0], [0.3, 0.5])
        np.testing.assert_allclose(targets[3], [-0.3, 0.5])
        self.assertTrue(np.all(np.isnan(targets[5])))

    def test_resolve_initial_states(self):
        agents = [
            LinearAgent(1, -np.eye(2), 1.0, 5.0, AUTO_INITIAL_STATE),
            LinearAgent(2, -np.eye(1), 1.0, 5.0, [0.2]),
        ]
        targets = np.array([[0.3, np.nan, 0.7]])
        states = resolve_initial_states(agents, targets)
        np.testing.assert_array_equal(states[1], [0.3, 0.0])
        np.testing.assert_array_equal(states[2], [0.2])

    def test_saturated_input(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 2.0)
        u = saturated_input(agent, np.zeros(2), np.array([1.0, 1.0]), 0.1)
        self.assertLessEqual(float(np.linalg.norm(u)), 2.0)
        np.testing.assert_allclose(u / np.linalg.norm(u), [1 / np.sqrt(2)] * 2)

    def test_unsaturated_input_hits_target(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 5.0)
        x = np.array([0.1, 0.0])
        target = np.array([0.15, 0.05])
        u = saturated_input(agent, x, target, 0.1)
        np.testing.assert_allclose(euler_step(agent.dynamics, x, u, 0.1), target)


class TestPlanTeamTrajectory(unittest.TestCase):
    """Test plan_team_trajectory."""

    def test_plan_meets_both_boxes(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 5.0, AUTO_INITIAL_STATE)
        tasks = LocalTaskSet(
            1,
            (
                conjunct(1, "G", 0.0, 1.0, (0.3, 0.3), 0.1),
                conjunct(2, "F", 5.0, 5.0, (-0.3, -0.3), 0.1),
            ),
            AppConstants.TIMING_POINT,
            0.0,
        )
        plan = plan_team_trajectory(tasks, [agent], horizon=10.0, dt=0.1)

        self.assertEqual(len(plan.trajectory), 101)
        self.assertAlmostEqual(plan.robustness, 0.1, delta=1e-6)
        self.assertEqual(set(plan.conjunct_robustness), {"box_1_1", "box_2_1"})
        np.testing.assert_allclose(plan.trajectory.state(0), [0.3, 0.3])
        np.testing.assert_allclose(plan.trajectory.state(50), [-0.3, -0.3], atol=1e-9)
        self.assertEqual(plan.state_violations, 0)

    def test_empty_task_set(self):
        agent = LinearAgent(1, -np.eye(1), 1.0, 5.0, [0.5])
        plan = plan_team_trajectory(LocalTaskSet(1, (), AppConstants.TIMING_POINT, 0.0), [agent], 1.0, 0.1)
        self.assertEqual(plan.robustness, float("inf"))

    def test_unreachable_deadline(self):
        agent = LinearAgent(1, np.zeros((2, 2)), 1.0, 0.1, [0.0, 0.0])
        tasks = LocalTaskSet(
            1, (conjunct(1, "F", 0.5, 0.5, (0.5, 0.5), 0.05),), AppConstants.TIMING_POINT, 0.0
        )
        with self.assertRaises(PlanningInfeasibleError) as ctx:
            plan_team_trajectory(tasks, [agent], horizon=1.0, dt=0.1)
        self.assertEqual(ctx.exception.team, 1)
        self.assertEqual(ctx.exception.deadline, 0.5)
        self.assertEqual(ctx.exception.exit_code, AppConstants.EXIT_INFEASIBLE)
        self.assertIn("box_1_1", str(ctx.exception))

    def test_tasks_beyond_horizon(self):
        agent = LinearAgent(1, -np.eye(2), 1.0, 5.0)
        tasks = LocalTaskSet(
            1, (conjunct(1, "F", 12.0, 12.0, (0.0, 0.0), 0.1),), AppConstants.TIMING_POINT, 0.0
        )
        with self.assertRaises(HorizonError):
            plan_team_trajectory(tasks, [agent], horizon=10.0, dt=0.1)


def run_tests():
    """Run all tests."""
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromModule(sys.modules[__name__])
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)
    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    sys.exit(0 if success else 1)
