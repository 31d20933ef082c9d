"""Decomposition and scenario orchestration services."""

import concurrent.futures
import logging
import threading
from typing import Dict, List, Mapping, Optional, Tuple

import numpy as np

from common.config.constants import AppConstants
from common.config.settings import SettingsManager, SolverSettings
from common.utils.logger_utils import LoggerUtils
from domain.exceptions import PropertyViolationError, StlDecompositionError
from domain.models.decomposition_request import DecompositionRequest
from domain.models.formula import Always, StlFormula, conjuncts
from domain.models.hypercube import DecompositionResult
from domain.models.local_task import LocalTaskSet
from domain.models.predicate import PredicateFunction
from domain.models.report import RobustnessReport
from domain.models.scenario import Scenario
from domain.models.team import TeamPartition
from domain.models.trajectory import Trajectory
from infrastructure.executors.langgraph_executor import ScenarioGraphExecutor, ScenarioState
from infrastructure.repositories.artifact_repository import ArtifactRepository
from infrastructure.repositories.scenario_repository import scenario_to_dict
from service.pipeline.builder import DecompositionPipelineBuilder
from service.simulation.fuzz import FuzzSummary, random_scenario, random_smooth_trajectory
from service.simulation.planner import TeamPlan, plan_team_trajectory, task_bindings
from service.stl.parser import format_formula
from service.stl.semantics import (
    RobustnessEvaluator,
    bind_global_predicates,
    compile_global_formula,
    robustness_signal,
)
from service.synthesis import cross_team_consistency_check, synthesize
from service.team_algebra import global_permutation

DomainBoxes = Tuple[Tuple[np.ndarray, np.ndarray], ...]

INDEPENDENT_SAMPLES = 20


class DecompositionOrchestrator:
    """
    Solves the decomposition programs of all global conjuncts.

    Each conjunct runs through the handler chain (validation, execution,
    optional oracle cross-check, persistence, logging) on a worker thread.
    """

    def __init__(
        self,
        settings: SettingsManager,
        solver: Optional[SolverSettings] = None,
        artifact_repository: Optional[ArtifactRepository] = None,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Initialize orchestrator.

        Args:
            settings: Run settings
            solver: Solver tolerances and budgets
            artifact_repository: Collects results (a fresh in-memory one by default)
            logger: Logger instance
        """
        self.settings = settings
        self.solver = solver or SolverSettings()
        self.logger = logger or logging.getLogger(__name__)
        self.artifact_repository = artifact_repository or ArtifactRepository(logger=self.logger)

        builder = (
            DecompositionPipelineBuilder()
            .add_validation(self.logger)
            .add_execution(self.solver, logger=self.logger)
        )
        if settings.use_oracle:
            builder.add_oracle(settings.oracle_resolution, logger=self.logger)
        self.pipeline = (
            builder.add_persistence(self.artifact_repository, self.logger)
            .add_logging(self.logger)
            .build()
        )

        self.stats_lock = threading.Lock()
        self.total_seconds = 0.0
        self.total_iterations = 0

    @staticmethod
    def build_requests(
        formula: StlFormula,
        predicates: Mapping[str, PredicateFunction],
        partition: TeamPartition,
        domain: DomainBoxes,
    ) -> List[DecompositionRequest]:
        """One request per conjunct of a validated global formula."""
        requests = []
        for index, conjunct in enumerate(conjuncts(formula), start=1):
            atom = conjunct.child
            requests.append(
                DecompositionRequest(
                    index=index,
                    operator=(
                        AppConstants.OPERATOR_ALWAYS
                        if isinstance(conjunct, Always)
                        else AppConstants.OPERATOR_EVENTUALLY
                    ),
                    interval=conjunct.interval,
                    predicate=predicates[atom.name],
                    negated=atom.negated,
                    partition=partition,
                    domain=domain,
                )
            )
        return requests

    def process_request(self, request: DecompositionRequest) -> DecompositionRequest:
        """
        Process a single decomposition request through the pipeline.

        Args:
            request: Decomposition request

        Returns:
            The processed request
        """
        result = self.pipeline.handle(request)

        with self.stats_lock:
            self.total_seconds += result.solve_seconds
            self.total_iterations += result.iterations

        return result

    def decompose(
        self,
        formula: StlFormula,
        predicates: Mapping[str, PredicateFunction],
        partition: TeamPartition,
        domain: DomainBoxes,
    ) -> Dict[int, DecompositionResult]:
        """
        Decompose every conjunct with a thread pool.

        Returns:
            conjunct index -> result, in index order

        Raises:
            StlDecompositionError: The first failure in conjunct order, once all have run
        """
        requests = self.build_requests(formula, predicates, partition, domain)
        self.logger.info(
            f"Decomposing {len(requests)} conjuncts over {partition.team_count} teams "
            f"(workers={self.settings.worker_count})"
        )

        with concurrent.futures.ThreadPoolExecutor(
            max_workers=self.settings.worker_count, thread_name_prefix="Decomposer"
        ) as executor:
            futures = {executor.submit(self.process_request, request): request for request in requests}
            for future in concurrent.futures.as_completed(futures):
                request = futures[future]
                try:
                    future.result()
                except Exception:
                    # handlers record domain errors on the request; anything else is a bug
                    self.logger.exception(f"Conjunct {request.index}: internal error")
                    raise

        self._print_statistics(requests)
        for request in requests:
            if request.error is not None:
                raise request.error
        return {request.index: request.result for request in requests}

    def _print_statistics(self, requests: List[DecompositionRequest]):
        """Print decomposition statistics."""
        solved = sum(1 for request in requests if request.success)
        with self.stats_lock:
            seconds = self.total_seconds
            iterations = self.total_iterations

        self.logger.info("=" * 80)
        self.logger.info("Decomposition Statistics:")
        self.logger.info(f" Conjuncts: {len(requests)}")
        self.logger.info(f" Solved: {solved}")
        self.logger.info(f" Failed: {len(requests) - solved}")
        self.logger.info(f" Newton iterations: {iterations}")
        if requests:
            self.logger.info(f" Average solve time: {seconds / len(requests):.3f}s")
        self.logger.info("=" * 80)


def assemble_global_trajectory(partition: TeamPartition, team_trajectories: Mapping[int, Trajectory]) -> Trajectory:
    """x = A z from the team trajectories z_l."""
    order = global_permutation(partition).columns
    return Trajectory.stack([team_trajectories[team] for team in range(1, partition.team_count + 1)], order)


class ScenarioOrchestrator:
    """
    Runs decompose -> synthesize -> plan -> evaluate for a scenario.

    The stages run as a LangGraph graph; team planning is spread over a
    thread pool.
    """

    def __init__(
        self,
        settings: SettingsManager,
        artifact_repository: Optional[ArtifactRepository] = None,
        logger: Optional[logging.Logger] = None,
    ):
        """
        Initialize orchestrator.

        Args:
            settings: Run settings
            artifact_repository: Destination of run artifacts (optional)
            logger: Logger instance
        """
        self.settings = settings
        self.logger = logger or LoggerUtils.setup_logger("ScenarioOrchestrator", settings.get_log_level())
        LoggerUtils.suppress_noisy_loggers()
        self.artifact_repository = artifact_repository or ArtifactRepository(logger=self.logger)

        self.executor = ScenarioGraphExecutor(
            [
                (AppConstants.STAGE_DECOMPOSE, self._decompose_stage),
                (AppConstants.STAGE_SYNTHESIZE, self._synthesize_stage),
                (AppConstants.STAGE_PLAN, self._plan_stage),
                (AppConstants.STAGE_EVALUATE, self._evaluate_stage),
            ],
            self.logger,
        )

    # Stages

    def margin_for(self, scenario: Scenario) -> float:
        return self.settings.resolve_margin(scenario.margin)

    def decompose(self, scenario: Scenario) -> Tuple[StlFormula, Dict[int, DecompositionResult]]:
        """Compile the scenario formula and solve all of its programs."""
        formula = compile_global_formula(
            scenario.formula_text, scenario.predicates, scenario.until_instants, scenario.horizon
        )
        domain = tuple(scenario.team_domain(team) for team in range(1, scenario.partition.team_count + 1))
        self.artifact_repository.clear()
        orchestrator = DecompositionOrchestrator(self.settings, scenario.solver, self.artifact_repository, self.logger)
        return formula, orchestrator.decompose(formula, scenario.predicates, scenario.partition, domain)

    def synthesize(
        self, scenario: Scenario, formula: StlFormula, results: Mapping[int, DecompositionResult]
    ) -> Dict[int, LocalTaskSet]:
        """
        Local tasks of every team, checked for cross-team consistency.

        Raises:
            PropertyViolationError: When the consistency check fails
        """
        tasks = synthesize(formula, results, scenario.timing, scenario.partition, self.margin_for(scenario), scenario.dt)
        report = cross_team_consistency_check(tasks, formula, results)
        if not report.ok:
            raise PropertyViolationError("; ".join(report.violations), AppConstants.STAGE_SYNTHESIZE)
        for team, task in sorted(tasks.items()):
            formula_l = task.formula()
            self.logger.info(f"Team {team}: {format_formula(formula_l) if formula_l else 'no tasks'}")
        return tasks

    def plan(self, scenario: Scenario, tasks: Mapping[int, LocalTaskSet]) -> Dict[int, TeamPlan]:
        """
        Plan every team on a thread pool.

        Raises:
            StlDecompositionError: The first failure in team order
        """
        plans: Dict[int, TeamPlan] = {}
        errors: Dict[int, StlDecompositionError] = {}
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=self.settings.worker_count, thread_name_prefix="Planner"
        ) as executor:
            futures = {
                executor.submit(
                    plan_team_trajectory,
                    tasks[team],
                    scenario.team_agents(team),
                    scenario.horizon,
                    scenario.dt,
                    self.logger,
                ): team
                for team in sorted(tasks)
            }
            for future in concurrent.futures.as_completed(futures):
                team = futures[future]
                try:
                    plans[team] = future.result()
                except StlDecompositionError as e:
                    errors[team] = e
        if errors:
            raise errors[min(errors)]
        return dict(sorted(plans.items()))

    def evaluate(
        self,
        scenario: Scenario,
        formula: StlFormula,
        results: Mapping[int, DecompositionResult],
        tasks: Mapping[int, LocalTaskSet],
        plans: Mapping[int, TeamPlan],
    ) -> RobustnessReport:
        """Local and global robustness at t = 0 plus the soundness verdict."""
        margin = self.margin_for(scenario)
        report = RobustnessReport(scenario.name, scenario.timing.mode, margin)
        report.objectives = {index: result.objective for index, result in results.items()}

        for team, plan in plans.items():
            task = tasks[team]
            if not task.conjuncts:
                continue
            evaluator = RobustnessEvaluator(plan.trajectory, task_bindings(task))
            report.local_robustness[team] = evaluator.at_index(task.formula(), 0)
            for conjunct in task.conjuncts:
                report.conjunct_robustness[conjunct.name] = evaluator.at_index(conjunct.formula(), 0)
            report.state_bound_violations += plan.state_violations

        x = assemble_global_trajectory(scenario.partition, {team: plan.trajectory for team, plan in plans.items()})
        evaluator = RobustnessEvaluator(x, bind_global_predicates(scenario.predicates, scenario.partition))
        report.global_robustness = evaluator.at_index(formula, 0)
        for index, conjunct in enumerate(conjuncts(formula), start=1):
            report.global_conjunct_robustness[index] = evaluator.at_index(conjunct, 0)

        for index, result in results.items():
            if result.degenerate:
                report.warnings.append(f"conjunct {index}: degenerate decomposition")
        if report.state_bound_violations:
            report.warnings.append(f"{report.state_bound_violations} samples leave the state bound")
        if not report.sound:
            self.logger.error(
                f"Soundness violation in {scenario.name}: all local robustness > 0 but global "
                f"robustness {report.global_robustness:.6g}"
            )
        return report

    def _decompose_stage(self, state: ScenarioState):
        formula, results = self.decompose(state["scenario"])
        return {"formula": formula, "results": results}

    def _synthesize_stage(self, state: ScenarioState):
        return {"tasks": self.synthesize(state["scenario"], state["formula"], state["results"])}

    def _plan_stage(self, state: ScenarioState):
        return {"plans": self.plan(state["scenario"], state["tasks"])}

    def _evaluate_stage(self, state: ScenarioState):
        report = self.evaluate(state["scenario"], state["formula"], state["results"], state["tasks"], state["plans"])
        return {"report": report}

    # Entry points

    def run(self, scenario: Scenario) -> ScenarioState:
        """
        Run the stage graph on a scenario.

        Returns:
            Final state; `report` is always set, with `failed_stage` and
            `failure` filled in when a stage failed
        """
        state = self.executor.execute({"scenario": scenario})
        report = state.get("report")
        if report is None:
            report = RobustnessReport(scenario.name, scenario.timing.mode, self.margin_for(scenario))
            if state.get("results"):
                report.objectives = {i: r.objective for i, r in state["results"].items()}
        if state.get("error") is not None:
            report.failed_stage = state.get("failed_stage")
            report.failure = str(state["error"])
        report.stage_seconds = dict(state.get("stage_seconds") or {})
        state["report"] = report

        self.logger.info(
            f"Scenario {scenario.name} ({scenario.timing.mode}): "
            + (
                f"global robustness {report.global_robustness:.6g}, local {report.local_robustness}"
                if report.completed
                else f"stopped at {report.failed_stage}: {report.failure}"
            )
        )
        return state

    def run_scenario(self, scenario: Scenario) -> RobustnessReport:
        """decompose -> synthesize -> plan -> evaluate; failures are recorded in the report."""
        return self.run(scenario)["report"]

    def persist(self, state: ScenarioState):
        """Write every artifact the state holds to the repository's directory."""
        scenario: Scenario = state["scenario"]
        repository = self.artifact_repository
        margin = self.margin_for(scenario)
        results = state.get("results")
        tasks = state.get("tasks")
        plans = state.get("plans")

        formula_text = format_formula(state["formula"]) if state.get("formula") is not None else scenario.formula_text
        if results:
            repository.save_decomposition(scenario.name, formula_text, results, margin)
        if tasks:
            formulas = {team: format_formula(t.formula()) if t.conjuncts else None for team, t in tasks.items()}
            repository.save_local_tasks(
                scenario.name,
                formula_text,
                scenario.predicates,
                scenario.partition,
                tasks,
                scenario.timing.mode,
                margin,
                scenario.dt,
                formulas,
            )
            repository.save_boxes(tasks, scenario.partition)
        if plans and state.get("formula") is not None:
            team_trajectories = {team: plan.trajectory for team, plan in plans.items()}
            x = assemble_global_trajectory(scenario.partition, team_trajectories)
            repository.save_trajectories(x, team_trajectories, scenario.partition)
            team_traces = {
                team: robustness_signal(tasks[team].formula(), plan.trajectory, task_bindings(tasks[team]))
                for team, plan in plans.items()
                if tasks[team].conjuncts
            }
            global_trace = robustness_signal(
                state["formula"], x, bind_global_predicates(scenario.predicates, scenario.partition)
            )
            repository.save_robustness_trace(x.times(), team_traces, global_trace)
        repository.save_report(state["report"])

    # Fuzzing

    def independent_check(
        self,
        scenario: Scenario,
        formula: StlFormula,
        tasks: Mapping[int, LocalTaskSet],
        rng: np.random.Generator,
        samples: int = INDEPENDENT_SAMPLES,
    ) -> List[float]:
        """
        Global robustness of planner-free trajectories that satisfy every local task.

        Each of `samples` attempts draws a random spline per team, biased
        toward the boxes; an attempt is kept only when the local robustness
        of every team is positive.
        """
        bindings = bind_global_predicates(scenario.predicates, scenario.partition)
        kept = []
        for _ in range(samples):
            team_trajectories = {}
            satisfied = True
            for team in range(1, scenario.partition.team_count + 1):
                task = tasks[team]
                z = random_smooth_trajectory(rng, task, scenario.team_domain(team), scenario.horizon, scenario.dt)
                team_trajectories[team] = z
                if task.conjuncts:
                    rho = RobustnessEvaluator(z, task_bindings(task)).at_index(task.formula(), 0)
                    satisfied = satisfied and rho > 0
            if satisfied:
                x = assemble_global_trajectory(scenario.partition, team_trajectories)
                kept.append(RobustnessEvaluator(x, bindings).at_index(formula, 0))
        return kept

    def run_fuzz(self, count: int, seed: int) -> FuzzSummary:
        """
        Run `count` random scenarios in both timing modes.

        Returns:
            FuzzSummary; any run with all local robustness > 0 and global
            robustness <= 0 is listed as a violation
        """
        summary = FuzzSummary(seed)
        for number in range(count):
            rng = np.random.default_rng([seed, number])
            base = random_scenario(rng, margin=self.settings.resolve_margin(None), name=f"fuzz-{seed}-{number}")
            summary.scenarios += 1
            for mode in AppConstants.TIMING_MODES:
                scenario = base.with_timing(mode)
                state = self.run(scenario)
                report: RobustnessReport = state["report"]
                summary.runs += 1
                if not report.completed:
                    summary.record_failure(report.failed_stage)
                    continue
                if report.all_local_satisfied:
                    summary.locally_satisfied += 1
                if report.global_satisfied:
                    summary.globally_satisfied += 1
                if not report.sound:
                    summary.violations.append(
                        {"scenario": scenario_to_dict(scenario), "report": report.to_dict(), "source": "planner"}
                    )
                for rho in self.independent_check(scenario, state["formula"], state["tasks"], rng):
                    if not rho > 0:
                        summary.violations.append(
                            {"scenario": scenario_to_dict(scenario), "global_robustness": rho, "source": "sampled"}
                        )
        self._print_fuzz_statistics(summary)
        return summary

    def _print_fuzz_statistics(self, summary: FuzzSummary):
        """Print fuzz statistics."""
        self.logger.info("=" * 80)
        self.logger.info("Fuzz Statistics:")
        self.logger.info(f" Seed: {summary.seed}")
        self.logger.info(f" Scenarios: {summary.scenarios}")
        self.logger.info(f" Runs: {summary.runs}")
        self.logger.info(f" All local satisfied: {summary.locally_satisfied}")
        self.logger.info(f" Global satisfied: {summary.globally_satisfied}")
        self.logger.info(f" Failures by stage: {summary.failures_by_stage}")
        self.logger.info(f" Soundness violations: {len(summary.violations)}")
        self.logger.info("=" * 80)


def run_scenario(scenario: Scenario, settings: Optional[SettingsManager] = None) -> RobustnessReport:
    """decompose -> synthesize -> plan -> evaluate with default run settings."""
    return ScenarioOrchestrator(settings or SettingsManager()).run_scenario(scenario)
