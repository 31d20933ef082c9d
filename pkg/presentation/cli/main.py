"""Main CLI entry point for the decomposition toolkit.

This is the Presentation Layer - handles user interaction and system initialization.

Subcommands:
    decompose  scenario -> decomposition.json, local_tasks.json, boxes.csv
    check      local_tasks.json + trajectory CSV -> robustness report
    simulate   scenario -> full run with report, trajectories and plot data

Exit codes: 0 success, 1 input error, 2 infeasible, 3 property violation.
"""

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Dict, List, Optional

from dotenv import load_dotenv

from common.config.constants import AppConstants
from common.config.settings import DefaultSettings, SettingsManager
from common.utils.logger_utils import LoggerUtils
from common.utils.path_manager import PathManager
from domain.exceptions import StlDecompositionError
from domain.models.formula import conjuncts
from infrastructure.repositories.artifact_repository import ArtifactRepository
from infrastructure.repositories.scenario_repository import ScenarioRepository
from service.orchestrator import ScenarioOrchestrator
from service.simulation.planner import task_bindings
from service.stl.parser import format_formula
from service.stl.semantics import RobustnessEvaluator, bind_global_predicates, compile_global_formula
from service.team_algebra import selection_for_team

PROJECT_ROOT = Path(__file__).parent.parent.parent


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with the three subcommands."""
    parser = argparse.ArgumentParser(
        prog="stldec",
        description="Decompose STL tasks over sub-teams and check the result in simulation",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_run_options(sub: argparse.ArgumentParser):
        sub.add_argument(
            "--scenario",
            default=str(PROJECT_ROOT / AppConstants.BUNDLED_SCENARIO),
            help="Scenario JSON (default: bundled five-agent scenario)",
        )
        sub.add_argument("--out", required=True, help="Output directory")
        sub.add_argument(
            "--timing", choices=AppConstants.TIMING_MODES, help="Timing mode (default: the scenario's)"
        )
        sub.add_argument("--margin", type=float, help="Radius margin (default: scenario, then 1e-3)")
        sub.add_argument(
            "--oracle", action="store_true", help="Cross-check small programs against the grid oracle"
        )

    decompose = subparsers.add_parser("decompose", help="Decompose a scenario into local tasks")
    add_run_options(decompose)

    check = subparsers.add_parser("check", help="Evaluate local and global robustness of a trajectory")
    check.add_argument("--tasks", required=True, help="local_tasks.json written by decompose/simulate")
    check.add_argument("--trajectory", required=True, help="Global trajectory CSV (t, x_1, ..., x_n)")

    simulate = subparsers.add_parser("simulate", help="Run decompose, synthesize, plan and evaluate")
    add_run_options(simulate)
    simulate.add_argument("--seed", type=int, default=DefaultSettings.DEFAULT_SEED, help="Random seed")
    simulate.add_argument("--fuzz", type=int, metavar="N", help="Run N random scenarios instead")
    return parser


def build_settings(args: argparse.Namespace) -> SettingsManager:
    """Run settings from flags and environment."""
    return SettingsManager(
        timing_mode=getattr(args, "timing", None) or AppConstants.TIMING_POINT,
        margin=getattr(args, "margin", None),
        seed=getattr(args, "seed", DefaultSettings.DEFAULT_SEED),
        use_oracle=getattr(args, "oracle", False),
        worker_count=int(os.getenv(AppConstants.ENV_WORKER_COUNT, str(DefaultSettings.DEFAULT_WORKER_COUNT))),
        log_level=LoggerUtils.level_from_env(),
    )


def cmd_decompose(args: argparse.Namespace, settings: SettingsManager, logger: logging.Logger) -> int:
    """Write decomposition.json, local_tasks.json and boxes.csv."""
    repository = ArtifactRepository(PathManager(args.out), logger)
    orchestrator = ScenarioOrchestrator(settings, repository, logger)
    scenario = ScenarioRepository(logger).load(args.scenario).with_timing(args.timing)

    formula, results = orchestrator.decompose(scenario)
    tasks = orchestrator.synthesize(scenario, formula, results)
    margin = orchestrator.margin_for(scenario)

    repository.save_decomposition(scenario.name, format_formula(formula), results, margin)
    repository.save_local_tasks(
        scenario.name,
        format_formula(formula),
        scenario.predicates,
        scenario.partition,
        tasks,
        scenario.timing.mode,
        margin,
        scenario.dt,
        {team: format_formula(t.formula()) if t.conjuncts else None for team, t in tasks.items()},
    )
    repository.save_boxes(tasks, scenario.partition)

    print(f"Decomposed {len(results)} conjuncts into {sum(len(r.cubes) for r in results.values())} hypercubes")
    for index, result in results.items():
        radii = ", ".join(f"team {c.team}: r={c.radius:.6f}" for c in result.cubes)
        print(f"  conjunct {index}: objective {result.objective:.6f} ({radii})")
    return AppConstants.EXIT_OK


def cmd_check(args: argparse.Namespace, settings: SettingsManager, logger: logging.Logger) -> int:
    """Print local and global robustness; exit 0 iff every local task holds."""
    bundle = ArtifactRepository.load_local_tasks(args.tasks)
    x = ArtifactRepository.load_trajectory(args.trajectory, bundle.partition.state_dim)

    local: Dict[str, float] = {}
    violated: List[str] = []
    for team, task in sorted(bundle.tasks.items()):
        if not task.conjuncts:
            continue
        z = x.select(selection_for_team(bundle.partition, team).columns)
        evaluator = RobustnessEvaluator(z, task_bindings(task))
        local[str(team)] = evaluator.at(task.formula(), x.start)
        for conjunct in task.conjuncts:
            if evaluator.at(conjunct.formula(), x.start) <= 0:
                violated.append(conjunct.name)

    formula = compile_global_formula(bundle.formula_text, bundle.predicates)
    evaluator = RobustnessEvaluator(x, bind_global_predicates(bundle.predicates, bundle.partition))
    report = {
        "local_robustness": local,
        "global_robustness": evaluator.at(formula, x.start),
        "global_conjunct_robustness": {
            str(i): evaluator.at(c, x.start) for i, c in enumerate(conjuncts(formula), start=1)
        },
        "violated_conjuncts": violated,
    }
    print(json.dumps(report, indent=2, sort_keys=True))

    if violated:
        logger.error(f"Local tasks violated: {', '.join(violated)}")
        return AppConstants.EXIT_PROPERTY_VIOLATION
    return AppConstants.EXIT_OK


def cmd_simulate(args: argparse.Namespace, settings: SettingsManager, logger: logging.Logger) -> int:
    """Full scenario run, or a fuzz campaign with --fuzz."""
    repository = ArtifactRepository(PathManager(args.out), logger)
    orchestrator = ScenarioOrchestrator(settings, repository, logger)

    if args.fuzz is not None:
        if args.fuzz < 1:
            print("--fuzz needs a positive count", file=sys.stderr)
            return AppConstants.EXIT_INPUT_ERROR
        summary = orchestrator.run_fuzz(args.fuzz, args.seed)
        repository.save_fuzz_summary(summary.to_dict())
        print(
            f"Fuzzed {summary.scenarios} scenarios ({summary.runs} runs): "
            f"{summary.locally_satisfied} locally satisfied, {len(summary.violations)} soundness violations"
        )
        return AppConstants.EXIT_OK if summary.sound else AppConstants.EXIT_PROPERTY_VIOLATION

    scenario = ScenarioRepository(logger).load(args.scenario).with_timing(args.timing)
    state = orchestrator.run(scenario)
    orchestrator.persist(state)
    report = state["report"]
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))

    error = state.get("error")
    if error is not None:
        print(f"Error: {error}", file=sys.stderr)
        return error.exit_code
    if not report.sound:
        print("Error: local tasks hold but the global task does not", file=sys.stderr)
        return AppConstants.EXIT_PROPERTY_VIOLATION
    return AppConstants.EXIT_OK


COMMANDS = {"decompose": cmd_decompose, "check": cmd_check, "simulate": cmd_simulate}


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for CLI application."""
    # Load environment variables from .env in the project root
    load_dotenv(dotenv_path=PROJECT_ROOT / ".env")

    args = build_parser().parse_args(argv)

    try:
        settings = build_settings(args)
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return AppConstants.EXIT_INPUT_ERROR

    LoggerUtils.configure_package_loggers(settings.get_log_level())
    LoggerUtils.suppress_noisy_loggers()
    logger = LoggerUtils.setup_logger("stldec", settings.get_log_level())

    try:
        return COMMANDS[args.command](args, settings, logger)
    except StlDecompositionError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"Error: {e}", file=sys.stderr)
        return AppConstants.EXIT_INPUT_ERROR


if __name__ == "__main__":
    sys.exit(main())
