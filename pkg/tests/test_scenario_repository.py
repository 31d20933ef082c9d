"""Tests for scenario loading and the artifact repository."""

import copy
import json
import os
import sys
import tempfile
import unittest

import numpy as np

# Add parent directory to path
parent_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_dir)

from common.config.constants import AppConstants
from common.utils.path_manager import PathManager
from domain.exceptions import DimensionError, InputError, PartitionError, ScenarioError
from domain.models.hypercube import DecompositionResult, HypercubePredicate
from domain.models.local_task import TimingPolicy
from domain.models.predicate import Affine, ConcaveQuadratic
from domain.models.trajectory import Trajectory
from infrastructure.repositories.artifact_repository import ArtifactRepository
from infrastructure.repositories.scenario_repository import (
    ScenarioRepository,
    predicate_from_dict,
    scenario_from_dict,
    scenario_to_dict,
)
from service.stl.parser import parse_formula
from service.synthesis import synthesize

FIVE_AGENT = os.path.join(parent_dir, "scenarios", "five_agent.json")


def small_document():
    return {
        "name": "pair",
        "agents": [
            {"id": 1, "dim": 1, "dynamics": [[-1.0]], "state_bound": 1.0, "input_bound": 2.0},
            {"id": 2, "dim": 1, "dynamics": [[-1.0]], "state_bound": 1.0, "input_bound": 2.0, "initial_state": [0.1]},
        ],
        "teams": [[1], [2]],
        "predicates": {
            "p": {"family": "affine", "parameters": {"gradient": [1.0], "offset": 0.5}, "footprint": [[1, 0]]},
        },
        "formula": "G[0,1] p",
        "horizon": 2.0,
        "dt": 0.1,
    }


class TestScenarioRepository(unittest.TestCase):
    """Test loading the bundled five-agent scenario."""

    def setUp(self):
        self.scenario = ScenarioRepository().load(FIVE_AGENT)

    def test_structure(self):
        self.assertEqual(self.scenario.name, "five_agent")
        self.assertEqual(len(self.scenario.agents), 5)
        self.assertEqual(self.scenario.partition.team_count, 5)
        self.assertEqual(self.scenario.partition.state_dim, 10)
        self.assertEqual(sorted(self.scenario.predicates), ["near12", "near25", "near34", "near45"])
        self.assertEqual(self.scenario.sample_count, 101)
        self.assertAlmostEqual(self.scenario.margin, 0.001)
        self.assertTrue(all(agent.auto_initial for agent in self.scenario.agents))

    def test_predicates_are_parsed(self):
        near12 = self.scenario.predicates["near12"]
        self.assertAlmostEqual(float(near12.value(np.array([0.3, 0.5, 0.0, 0.0]))), 0.1)
        near45 = self.scenario.predicates["near45"]
        self.assertAlmostEqual(float(near45.value(np.array([0.1, 0.0, 0.0, 0.0]))), 0.16)

    def test_timing_options_per_mode(self):
        self.assertEqual(self.scenario.timing.mode, AppConstants.TIMING_POINT)
        self.assertEqual(dict(self.scenario.timing.overrides), {3: 7.0, 4: 9.0})

        interval = self.scenario.with_timing(AppConstants.TIMING_INTERVAL)
        self.assertEqual(interval.timing.mode, AppConstants.TIMING_INTERVAL)
        self.assertEqual(dict(interval.timing.overrides), {3: [5.0, 7.0], 4: [9.0, 10.0]})
        self.assertIs(self.scenario.with_timing(None), self.scenario)

    def test_round_trip(self):
        again = scenario_from_dict(scenario_to_dict(self.scenario))
        self.assertEqual(again.formula_text, self.scenario.formula_text)
        self.assertEqual(again.partition.teams, self.scenario.partition.teams)
        self.assertEqual(again.timing_options, self.scenario.timing_options)
        for name, predicate in self.scenario.predicates.items():
            self.assertEqual(again.predicates[name].to_dict(), predicate.to_dict())

    def test_save_and_load(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "copy.json")
            ScenarioRepository().save(self.scenario, path)
            again = ScenarioRepository().load(path)
        self.assertEqual(again.name, "five_agent")
        self.assertEqual(again.horizon, 10.0)


class TestScenarioValidation(unittest.TestCase):
    """Schema errors are reported before anything runs."""

    def test_small_document(self):
        scenario = scenario_from_dict(small_document())
        self.assertEqual(scenario.timing.mode, AppConstants.TIMING_POINT)
        self.assertIsNone(scenario.margin)
        np.testing.assert_array_equal(scenario.agent(2).initial_state, [0.1])

    def test_unknown_top_level_key(self):
        document = small_document()
        document["colour"] = "red"
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_missing_required_key(self):
        document = small_document()
        del document["dt"]
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_unknown_agent_key(self):
        document = small_document()
        document["agents"][0]["mass"] = 1.0
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_dynamics_size(self):
        document = small_document()
        document["agents"][0]["dynamics"] = [[-1.0, 0.0]]
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_overlapping_teams(self):
        document = small_document()
        document["teams"] = [[1, 2], [2]]
        with self.assertRaises(PartitionError):
            scenario_from_dict(document)

    def test_bad_timing_mode(self):
        document = small_document()
        document["timing"] = {"mode": "whenever"}
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_bare_overrides(self):
        document = small_document()
        document["timing"] = {"mode": "interval", "overrides": {"1": [0.2, 0.8], "2": 0.5}}
        scenario = scenario_from_dict(document)
        self.assertEqual(dict(scenario.timing.overrides), {1: [0.2, 0.8]})
        self.assertEqual(dict(scenario.timing_options[AppConstants.TIMING_POINT]), {2: 0.5})

    def test_unknown_solver_setting(self):
        document = small_document()
        document["solver"] = {"step": 3}
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_negative_margin(self):
        document = small_document()
        document["margin"] = -0.1
        with self.assertRaises(ScenarioError):
            scenario_from_dict(document)

    def test_until_instants(self):
        document = small_document()
        document["until_instants"] = {"1": 0.4}
        self.assertEqual(dict(scenario_from_dict(document).until_instants), {1: 0.4})

    def test_malformed_json(self):
        with tempfile.TemporaryDirectory() as directory:
            path = os.path.join(directory, "broken.json")
            with open(path, "w", encoding="utf-8") as f:
                f.write('{"agents": [')
            with self.assertRaises(InputError) as ctx:
                ScenarioRepository().load(path)
        self.assertEqual(ctx.exception.exit_code, AppConstants.EXIT_INPUT_ERROR)
        self.assertEqual(ctx.exception.stage, AppConstants.STAGE_INPUT)

    def test_missing_file(self):
        with self.assertRaises(InputError):
            ScenarioRepository().load(os.path.join(parent_dir, "scenarios", "missing.json"))


class TestPredicateFamilies(unittest.TestCase):
    """Test predicate_from_dict."""

    def test_quadratic(self):
        predicate = predicate_from_dict(
            "q", {"family": "quadratic", "parameters": {"offset": 1.0, "center": [1.0], "weight": [2.0]}, "footprint": [[1, 0]]}
        )
        self.assertIsInstance(predicate, ConcaveQuadratic)
        self.assertAlmostEqual(float(predicate.value(np.array([0.5]))), 0.5)

    def test_affine(self):
        predicate = predicate_from_dict(
            "a", {"family": "affine", "parameters": {"gradient": [1.0, -1.0], "offset": 0.0}, "footprint": [[1, 0], [2, 0]]}
        )
        self.assertIsInstance(predicate, Affine)
        self.assertEqual(predicate.agents, (1, 2))

    def test_unknown_family(self):
        with self.assertRaises(ScenarioError):
            predicate_from_dict("s", {"family": "sigmoid", "parameters": {}, "footprint": [[1, 0]]})

    def test_missing_parameter(self):
        with self.assertRaises(ScenarioError):
            predicate_from_dict("q", {"family": "quadratic", "parameters": {"offset": 1.0}, "footprint": [[1, 0]]})

    def test_serialized_form_loads_back(self):
        original = ConcaveQuadratic.difference(0.1, [1.0, 2.0], [(1, 0), (1, 1), (2, 0), (2, 1)], shift=[0.3, 0.5])
        loaded = predicate_from_dict("d", copy.deepcopy(original.to_dict()))
        y = np.array([0.2, 0.1, -0.3, 0.4])
        self.assertAlmostEqual(float(loaded.value(y)), float(original.value(y)))


class TestArtifactRepository(unittest.TestCase):
    """Test the artifact repository."""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.repository = ArtifactRepository(PathManager(self.directory.name))

    def tearDown(self):
        self.directory.cleanup()

    def test_in_memory_results(self):
        repository = ArtifactRepository()
        repository.record_decomposition(DecompositionResult(2, (), 0.1))
        repository.record_decomposition(DecompositionResult(1, (), 0.2))
        self.assertEqual(sorted(repository.decompositions()), [1, 2])
        repository.clear()
        self.assertEqual(repository.decompositions(), {})
        with self.assertRaises(InputError):
            repository.save_report(None)

    def test_trajectory_csv(self):
        trajectory = Trajectory([[0.0, 1.0], [0.5, 1.5], [1.0, 2.0]], 0.1)
        path = os.path.join(self.directory.name, "trajectory.csv")
        ArtifactRepository.write_trajectory(path, trajectory)

        loaded = ArtifactRepository.load_trajectory(path, expected_dim=2)
        np.testing.assert_array_equal(loaded.samples, trajectory.samples)
        self.assertAlmostEqual(loaded.dt, 0.1)
        with self.assertRaises(DimensionError):
            ArtifactRepository.load_trajectory(path, expected_dim=3)

    def test_truncated_trajectory(self):
        path = os.path.join(self.directory.name, "truncated.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write("t,x_1,x_2\n0.0,0.0,1.0\n0.1,0.5\n")
        with self.assertRaises(InputError):
            ArtifactRepository.load_trajectory(path)

    def test_non_uniform_trajectory(self):
        path = os.path.join(self.directory.name, "uneven.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write("t,x_1\n0.0,0.0\n0.1,0.5\n0.3,1.0\n")
        with self.assertRaises(InputError):
            ArtifactRepository.load_trajectory(path)

    def test_missing_header(self):
        path = os.path.join(self.directory.name, "headless.csv")
        with open(path, "w", encoding="utf-8") as f:
            f.write("0.0,0.0\n0.1,0.5\n")
        with self.assertRaises(InputError):
            ArtifactRepository.load_trajectory(path)

    def test_local_tasks_round_trip(self):
        scenario = scenario_from_dict(small_document())
        formula = parse_formula(scenario.formula_text, scenario.predicates)
        cube = HypercubePredicate(team=1, center=(0.25,), radius=0.25, coordinates=(0,), source=1)
        results = {1: DecompositionResult(1, (cube,), 0.25)}
        tasks = synthesize(formula, results, TimingPolicy(), scenario.partition, margin=0.01)

        path = self.repository.save_local_tasks(
            scenario.name,
            scenario.formula_text,
            scenario.predicates,
            scenario.partition,
            tasks,
            AppConstants.TIMING_POINT,
            0.01,
            dt=scenario.dt,
        )
        bundle = ArtifactRepository.load_local_tasks(path)

        self.assertEqual(bundle.scenario, "pair")
        self.assertEqual(bundle.formula_text, "G[0,1] p")
        self.assertEqual(bundle.partition.teams, scenario.partition.teams)
        self.assertEqual(sorted(bundle.tasks), [1, 2])
        self.assertEqual(bundle.tasks[2].conjuncts, ())
        loaded = bundle.tasks[1].conjuncts[0]
        self.assertEqual(loaded, tasks[1].conjuncts[0])
        self.assertAlmostEqual(loaded.cube.radius, 0.24)
        self.assertEqual(bundle.dt, 0.1)

    def test_incomplete_local_tasks(self):
        path = os.path.join(self.directory.name, "local_tasks.json")
        with open(path, "w", encoding="utf-8") as f:
            json.dump({"formula": "G[0,1] p"}, f)
        with self.assertRaises(InputError):
            ArtifactRepository.load_local_tasks(path)

    def test_boxes_csv(self):
        scenario = scenario_from_dict(small_document())
        formula = parse_formula(scenario.formula_text, scenario.predicates)
        cube = HypercubePredicate(team=1, center=(0.25,), radius=0.25, coordinates=(0,), source=1)
        tasks = synthesize(formula, {1: DecompositionResult(1, (cube,), 0.25)}, TimingPolicy(), scenario.partition)

        path = self.repository.save_boxes(tasks, scenario.partition)
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        self.assertEqual(lines[0], "team,formula_index,operator,t_start,t_end,agent,components,corners")
        self.assertEqual(len(lines), 2)
        self.assertTrue(lines[1].startswith("1,1,G,0.0,1.0,1,0,"))


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
