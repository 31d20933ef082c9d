"""End-to-end tests of the stldec command line."""

import io
import json
import os
import sys
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

# Add parent directory to path
parent_dir = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))
sys.path.insert(0, parent_dir)

from common.config.constants import AppConstants
from presentation.cli.main import build_parser, main


def pair_document():
    """Two 1-D agents: stay 0.2 apart during [0, 1], agent 2 visits 0.5 in [2, 3]."""
    agent = {"dim": 1, "dynamics": [[-1.0]], "state_bound": 1.0, "input_bound": 5.0, "initial_state": "auto"}
    return {
        "name": "pair",
        "agents": [dict(agent, id=1), dict(agent, id=2)],
        "teams": [[1], [2]],
        "predicates": {
            "near": {
                "family": "quadratic-difference",
                "parameters": {"offset": 0.04, "weight": [1.0], "shift": [0.2]},
                "footprint": [[1, 0], [2, 0]],
            },
            "home": {
                "family": "quadratic",
                "parameters": {"offset": 0.01, "center": [0.5], "weight": [1.0]},
                "footprint": [[2, 0]],
            },
        },
        "formula": "G[0,1] near and F[2,3] home",
        "horizon": 4.0,
        "dt": 0.1,
    }


class CliTestCase(unittest.TestCase):
    """Temporary workspace plus a quiet main()."""

    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.out = os.path.join(self.directory.name, "out")

    def tearDown(self):
        self.directory.cleanup()

    def write_scenario(self, document, name="scenario.json"):
        path = os.path.join(self.directory.name, name)
        with open(path, "w", encoding="utf-8") as f:
            if isinstance(document, str):
                f.write(document)
            else:
                json.dump(document, f)
        return path

    def run_cli(self, *argv):
        stdout = io.StringIO()
        with redirect_stdout(stdout), redirect_stderr(io.StringIO()):
            code = main(list(argv))
        return code, stdout.getvalue()

    def out_path(self, name):
        return os.path.join(self.out, name)


class TestParser(unittest.TestCase):
    """Test build_parser."""

    def test_subcommands(self):
        parser = build_parser()
        args = parser.parse_args(["simulate", "--out", "runs", "--timing", "interval", "--seed", "7"])
        self.assertEqual(args.command, "simulate")
        self.assertEqual(args.timing, AppConstants.TIMING_INTERVAL)
        self.assertEqual(args.seed, 7)
        self.assertTrue(args.scenario.endswith(os.path.join("scenarios", "five_agent.json")))

    def test_check_needs_inputs(self):
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit):
                build_parser().parse_args(["check", "--tasks", "local_tasks.json"])


class TestDecomposeCommand(CliTestCase):
    """Test `stldec decompose`."""

    def test_writes_artifacts(self):
        code, output = self.run_cli("decompose", "--scenario", self.write_scenario(pair_document()), "--out", self.out)

        self.assertEqual(code, AppConstants.EXIT_OK)
        self.assertIn("Decomposed 2 conjuncts into 3 hypercubes", output)
        for name in (
            AppConstants.DECOMPOSITION_FILENAME,
            AppConstants.LOCAL_TASKS_FILENAME,
            AppConstants.BOXES_FILENAME,
        ):
            self.assertTrue(os.path.exists(self.out_path(name)), name)

        with open(self.out_path(AppConstants.DECOMPOSITION_FILENAME), encoding="utf-8") as f:
            decomposition = json.load(f)
        self.assertEqual([c["formula_index"] for c in decomposition["conjuncts"]], [1, 2])
        radii = [team["radius"] for team in decomposition["conjuncts"][0]["teams"]]
        self.assertAlmostEqual(sum(radii), 0.2, delta=1e-3)

        with open(self.out_path(AppConstants.LOCAL_TASKS_FILENAME), encoding="utf-8") as f:
            local_tasks = json.load(f)
        self.assertEqual(local_tasks["timing_mode"], AppConstants.TIMING_POINT)
        self.assertEqual(local_tasks["local_tasks"]["1"]["formula"].split(" ")[1], "box_1_1")
        self.assertEqual(len(local_tasks["local_tasks"]["2"]["conjuncts"]), 2)

    def test_interval_mode(self):
        path = self.write_scenario(pair_document())
        code, _ = self.run_cli("decompose", "--scenario", path, "--out", self.out, "--timing", "interval")
        self.assertEqual(code, AppConstants.EXIT_OK)
        with open(self.out_path(AppConstants.LOCAL_TASKS_FILENAME), encoding="utf-8") as f:
            conjunct = json.load(f)["local_tasks"]["2"]["conjuncts"][1]
        self.assertEqual(conjunct["operator"], AppConstants.OPERATOR_ALWAYS)
        self.assertAlmostEqual(conjunct["interval"][0], 2 + 1 / 3)
        self.assertAlmostEqual(conjunct["interval"][1], 3 - 1 / 3)

    def test_infeasible_predicate(self):
        document = pair_document()
        document["predicates"]["home"]["parameters"]["offset"] = -0.5
        code, _ = self.run_cli("decompose", "--scenario", self.write_scenario(document), "--out", self.out)
        self.assertEqual(code, AppConstants.EXIT_INFEASIBLE)

    def test_malformed_json(self):
        code, _ = self.run_cli("decompose", "--scenario", self.write_scenario('{"agents": '), "--out", self.out)
        self.assertEqual(code, AppConstants.EXIT_INPUT_ERROR)

    def test_unknown_key(self):
        document = pair_document()
        document["obstacles"] = []
        code, _ = self.run_cli("decompose", "--scenario", self.write_scenario(document), "--out", self.out)
        self.assertEqual(code, AppConstants.EXIT_INPUT_ERROR)

    def test_negative_margin_flag(self):
        path = self.write_scenario(pair_document())
        code, _ = self.run_cli("decompose", "--scenario", path, "--out", self.out, "--margin", "-1")
        self.assertEqual(code, AppConstants.EXIT_INPUT_ERROR)


class TestSimulateAndCheck(CliTestCase):
    """Test `stldec simulate` and `stldec check` on its output."""

    def test_simulate_then_check(self):
        path = self.write_scenario(pair_document())
        code, output = self.run_cli("simulate", "--scenario", path, "--out", self.out)

        self.assertEqual(code, AppConstants.EXIT_OK)
        report = json.loads(output)
        self.assertGreater(report["global_robustness"], 0)
        for name in (
            AppConstants.REPORT_FILENAME,
            AppConstants.TRAJECTORY_FILENAME,
            AppConstants.BOXES_FILENAME,
            AppConstants.ROBUSTNESS_TRACE_FILENAME,
            AppConstants.TIMINGS_FILENAME,
            AppConstants.TEAM_TRAJECTORY_TEMPLATE.format(team=1),
            AppConstants.TEAM_TRAJECTORY_TEMPLATE.format(team=2),
        ):
            self.assertTrue(os.path.exists(self.out_path(name)), name)

        code, output = self.run_cli(
            "check",
            "--tasks",
            self.out_path(AppConstants.LOCAL_TASKS_FILENAME),
            "--trajectory",
            self.out_path(AppConstants.TRAJECTORY_FILENAME),
        )
        self.assertEqual(code, AppConstants.EXIT_OK)
        checked = json.loads(output)
        self.assertEqual(checked["violated_conjuncts"], [])
        self.assertAlmostEqual(checked["global_robustness"], report["global_robustness"], places=9)
        self.assertEqual(set(checked["local_robustness"]), {"1", "2"})

    def test_check_reports_violation(self):
        path = self.write_scenario(pair_document())
        self.assertEqual(self.run_cli("decompose", "--scenario", path, "--out", self.out)[0], AppConstants.EXIT_OK)

        trajectory = os.path.join(self.directory.name, "still.csv")
        with open(trajectory, "w", encoding="utf-8") as f:
            f.write("t,x_1,x_2\n")
            for k in range(41):
                f.write(f"{k / 10},0.0,0.0\n")

        code, output = self.run_cli(
            "check", "--tasks", self.out_path(AppConstants.LOCAL_TASKS_FILENAME), "--trajectory", trajectory
        )
        self.assertEqual(code, AppConstants.EXIT_PROPERTY_VIOLATION)
        self.assertIn("box_2_2", json.loads(output)["violated_conjuncts"])

    def test_check_wrong_dimension(self):
        path = self.write_scenario(pair_document())
        self.run_cli("decompose", "--scenario", path, "--out", self.out)

        trajectory = os.path.join(self.directory.name, "narrow.csv")
        with open(trajectory, "w", encoding="utf-8") as f:
            f.write("t,x_1\n0.0,0.0\n0.1,0.0\n")
        code, _ = self.run_cli(
            "check", "--tasks", self.out_path(AppConstants.LOCAL_TASKS_FILENAME), "--trajectory", trajectory
        )
        self.assertEqual(code, AppConstants.EXIT_INPUT_ERROR)

    def test_simulate_is_reproducible(self):
        path = self.write_scenario(pair_document())
        first, second = (os.path.join(self.directory.name, name) for name in ("first", "second"))
        for out in (first, second):
            code, _ = self.run_cli("simulate", "--scenario", path, "--out", out, "--seed", "42", "--timing", "interval")
            self.assertEqual(code, AppConstants.EXIT_OK)

        # timings.json holds wall-clock seconds and is the only artifact allowed to differ
        names = [
            AppConstants.REPORT_FILENAME,
            AppConstants.LOCAL_TASKS_FILENAME,
            AppConstants.DECOMPOSITION_FILENAME,
            AppConstants.TRAJECTORY_FILENAME,
            AppConstants.BOXES_FILENAME,
            AppConstants.ROBUSTNESS_TRACE_FILENAME,
            AppConstants.TEAM_TRAJECTORY_TEMPLATE.format(team=1),
            AppConstants.TEAM_TRAJECTORY_TEMPLATE.format(team=2),
        ]
        for name in names:
            with open(os.path.join(first, name), "rb") as a, open(os.path.join(second, name), "rb") as b:
                self.assertEqual(a.read(), b.read(), name)

    def test_simulate_infeasible_writes_report(self):
        document = pair_document()
        document["predicates"]["home"]["parameters"]["offset"] = -0.5
        code, output = self.run_cli("simulate", "--scenario", self.write_scenario(document), "--out", self.out)

        self.assertEqual(code, AppConstants.EXIT_INFEASIBLE)
        report = json.loads(output)
        self.assertEqual(report["failed_stage"], AppConstants.STAGE_DECOMPOSE)
        self.assertTrue(os.path.exists(self.out_path(AppConstants.REPORT_FILENAME)))

    def test_fuzz_count_must_be_positive(self):
        code, _ = self.run_cli("simulate", "--out", self.out, "--fuzz", "0")
        self.assertEqual(code, AppConstants.EXIT_INPUT_ERROR)


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
