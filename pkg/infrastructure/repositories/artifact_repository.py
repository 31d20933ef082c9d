"""Artifact repository - Infrastructure layer for run outputs.

This is part of the Infrastructure Layer following layered architecture.
Writes and reads the JSON and CSV artifacts of decompose/check/simulate runs.
"""

import logging
import threading
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence

import numpy as np

from common.utils.file_utils import FileUtils
from common.utils.path_manager import PathManager
from domain.exceptions import DimensionError, InputError
from domain.models.hypercube import DecompositionResult
from domain.models.local_task import LocalConjunct, LocalTaskSet
from domain.models.predicate import PredicateFunction
from domain.models.report import RobustnessReport
from domain.models.team import TeamPartition
from domain.models.trajectory import Trajectory
from infrastructure.repositories.scenario_repository import predicate_from_dict


@dataclass(frozen=True, eq=False)
class LocalTaskBundle:
    """Everything `check` needs: the local tasks plus the global formula they came from."""

    scenario: str
    formula_text: str
    predicates: Dict[str, PredicateFunction]
    partition: TeamPartition
    tasks: Dict[int, LocalTaskSet]
    mode: str
    margin: float
    dt: Optional[float] = None


class ArtifactRepository:
    """
    Collects decomposition results and reads/writes run artifacts.
    Responsibilities:
    - Thread-safe collection of per-conjunct results
    - JSON documents (decomposition, local tasks, reports)
    - CSV dumps (trajectories, boxes, robustness traces)
    """

    def __init__(self, path_manager: Optional[PathManager] = None, logger: Optional[logging.Logger] = None):
        """
        Initialize artifact repository.

        Args:
            path_manager: Output paths (None keeps results in memory only)
            logger: Logger instance
        """
        self.path_manager = path_manager
        self.logger = logger or logging.getLogger(__name__)
        self._results: Dict[int, DecompositionResult] = {}
        self.results_lock = threading.Lock()

    def record_decomposition(self, result: DecompositionResult):
        """Store one conjunct's result (called from worker threads)."""
        with self.results_lock:
            self._results[result.source] = result

    def decompositions(self) -> Dict[int, DecompositionResult]:
        """Recorded results in conjunct order."""
        with self.results_lock:
            return dict(sorted(self._results.items()))

    def clear(self):
        with self.results_lock:
            self._results.clear()

    def _require_paths(self) -> PathManager:
        if self.path_manager is None:
            raise InputError("artifact repository has no output directory")
        FileUtils.ensure_directory_exists(self.path_manager.base_dir)
        return self.path_manager

    # JSON documents

    def save_decomposition(
        self, scenario: str, formula_text: str, results: Mapping[int, DecompositionResult], margin: float
    ) -> str:
        """Write decomposition.json; returns its path."""
        path = self._require_paths().get_decomposition_path()
        FileUtils.write_json_file(
            path,
            {
                "scenario": scenario,
                "formula": formula_text,
                "margin": margin,
                "conjuncts": [results[index].to_dict(margin) for index in sorted(results)],
            },
        )
        self.logger.info(f"Saved decomposition: {path}")
        return path

    def save_local_tasks(
        self,
        scenario: str,
        formula_text: str,
        predicates: Mapping[str, PredicateFunction],
        partition: TeamPartition,
        tasks: Mapping[int, LocalTaskSet],
        mode: str,
        margin: float,
        dt: Optional[float] = None,
        formulas: Optional[Mapping[int, Optional[str]]] = None,
    ) -> str:
        """
        Write local_tasks.json, self-contained so `check` can run on it alone.

        Args:
            formulas: team -> formula text of its local task
        """
        path = self._require_paths().get_local_tasks_path()
        formulas = formulas or {}
        FileUtils.write_json_file(
            path,
            {
                "scenario": scenario,
                "formula": formula_text,
                "predicates": {name: pred.to_dict() for name, pred in sorted(predicates.items())},
                "agents": [list(agent) for agent in partition.agents],
                "teams": [list(team) for team in partition.teams],
                "timing_mode": mode,
                "margin": margin,
                "dt": dt,
                "local_tasks": {
                    str(team): {
                        "formula": formulas.get(team),
                        "conjuncts": [c.to_dict() for c in tasks[team].conjuncts],
                    }
                    for team in sorted(tasks)
                },
            },
        )
        self.logger.info(f"Saved local tasks: {path}")
        return path

    @staticmethod
    def load_local_tasks(path: str) -> LocalTaskBundle:
        """
        Read a local_tasks.json document.

        Raises:
            InputError: When the file is unreadable or incomplete
        """
        try:
            data = FileUtils.read_json_file(path)
            partition = TeamPartition([tuple(a) for a in data["agents"]], data["teams"])
            tasks = {}
            for key, entry in data["local_tasks"].items():
                team = int(key)
                conjuncts = tuple(LocalConjunct.from_dict(team, c) for c in entry["conjuncts"])
                tasks[team] = LocalTaskSet(team, conjuncts, data["timing_mode"], float(data["margin"]))
            return LocalTaskBundle(
                scenario=data.get("scenario", ""),
                formula_text=data["formula"],
                predicates={name: predicate_from_dict(name, p) for name, p in data["predicates"].items()},
                partition=partition,
                tasks=tasks,
                mode=data["timing_mode"],
                margin=float(data["margin"]),
                dt=data.get("dt"),
            )
        except (OSError, ValueError) as e:
            raise InputError(f"cannot read local tasks: {e}") from e
        except (KeyError, TypeError) as e:
            raise InputError(f"{path}: incomplete local-task document ({e})") from e

    def save_report(self, report: RobustnessReport) -> str:
        """Write report.json (deterministic) and timings.json (wall clock)."""
        paths = self._require_paths()
        FileUtils.write_json_file(paths.get_report_path(), report.to_dict())
        FileUtils.write_json_file(paths.get_timings_path(), report.timings_dict())
        self.logger.info(f"Saved report: {paths.get_report_path()}")
        return paths.get_report_path()

    def save_fuzz_summary(self, summary: Dict[str, Any]) -> str:
        path = self._require_paths().get_fuzz_summary_path()
        FileUtils.write_json_file(path, summary)
        self.logger.info(f"Saved fuzz summary: {path}")
        return path

    # CSV dumps

    @staticmethod
    def write_trajectory(path: str, trajectory: Trajectory, labels: Optional[Sequence[str]] = None):
        """CSV with columns t, x_1, ..., x_n."""
        labels = list(labels or [f"x_{i + 1}" for i in range(trajectory.dim)])
        rows = (
            [float(t)] + [float(v) for v in trajectory.state(k)]
            for k, t in enumerate(trajectory.times())
        )
        FileUtils.write_csv_file(path, ["t"] + labels, rows)

    @staticmethod
    def load_trajectory(path: str, expected_dim: Optional[int] = None) -> Trajectory:
        """
        Read a trajectory CSV written by write_trajectory.

        Raises:
            InputError: On unreadable, ragged or non-uniformly sampled files
            DimensionError: When the state dimension differs from expected_dim
        """
        try:
            rows = FileUtils.read_csv_file(path)
        except OSError as e:
            raise InputError(f"cannot read trajectory: {e}") from e
        if len(rows) < 2 or not rows[0] or rows[0][0] != "t":
            raise InputError(f"{path}: expected a header starting with 't' and at least one sample")
        width = len(rows[0])
        if any(len(row) != width for row in rows[1:]):
            raise InputError(f"{path}: rows have inconsistent lengths (truncated file?)")
        try:
            values = np.array([[float(v) for v in row] for row in rows[1:]])
        except ValueError as e:
            raise InputError(f"{path}: non-numeric entry ({e})") from e

        times = values[:, 0]
        if len(times) > 1:
            steps = np.diff(times)
            dt = float(steps.mean())
            if dt <= 0 or not np.allclose(steps, dt, rtol=1e-6, atol=1e-9):
                raise InputError(f"{path}: samples are not uniformly spaced")
        else:
            dt = 1.0
        if expected_dim is not None and width - 1 != expected_dim:
            raise DimensionError(f"{path}: trajectory has {width - 1} state columns, expected {expected_dim}")
        return Trajectory(values[:, 1:], dt, float(times[0]))

    def save_trajectories(
        self, trajectory: Trajectory, team_trajectories: Mapping[int, Trajectory], partition: TeamPartition
    ):
        """Global trajectory.csv plus one trajectory_team{l}.csv per team."""
        paths = self._require_paths()
        self.write_trajectory(paths.get_trajectory_path(), trajectory)
        for team, z in sorted(team_trajectories.items()):
            labels = [
                f"x_{partition.global_index(agent, component) + 1}"
                for agent, component in partition.team_coordinates(team)
            ]
            self.write_trajectory(paths.get_team_trajectory_path(team), z, labels)

    def save_boxes(self, tasks: Mapping[int, LocalTaskSet], partition: TeamPartition) -> str:
        """
        boxes.csv: one row per local box projected on an agent's coordinates.

        Boxes over two coordinates of one agent list their four rectangle
        corners; single coordinates list the two interval ends. Corners are
        "u v" pairs separated by ";".
        """
        path = self._require_paths().get_boxes_path()
        FileUtils.write_csv_file(
            path,
            ["team", "formula_index", "operator", "t_start", "t_end", "agent", "components", "corners"],
            self._box_rows(tasks, partition),
        )
        return path

    @staticmethod
    def _box_rows(tasks: Mapping[int, LocalTaskSet], partition: TeamPartition) -> List[List[Any]]:
        rows = []
        for team in sorted(tasks):
            coordinates = partition.team_coordinates(team)
            for conjunct in tasks[team].conjuncts:
                lo, hi = conjunct.cube.bounds()
                by_agent: Dict[int, List[int]] = {}
                for j, index in enumerate(conjunct.cube.coordinates):
                    by_agent.setdefault(coordinates[index][0], []).append(j)
                for agent, slots in sorted(by_agent.items()):
                    for start in range(0, len(slots), 2):
                        pair = slots[start:start + 2]
                        components = [coordinates[conjunct.cube.coordinates[j]][1] for j in pair]
                        if len(pair) == 2:
                            a, b = pair
                            corners = [(lo[a], lo[b]), (hi[a], lo[b]), (hi[a], hi[b]), (lo[a], hi[b])]
                        else:
                            corners = [(lo[pair[0]],), (hi[pair[0]],)]
                        rows.append(
                            [
                                team,
                                conjunct.source,
                                conjunct.operator,
                                conjunct.interval.a,
                                conjunct.interval.b,
                                agent,
                                "|".join(str(c) for c in components),
                                ";".join(" ".join(repr(float(v)) for v in corner) for corner in corners),
                            ]
                        )
        return rows

    def save_robustness_trace(
        self, times: np.ndarray, team_traces: Mapping[int, np.ndarray], global_trace: np.ndarray
    ) -> str:
        """robustness_trace.csv: t, rho_team_1 .. rho_team_v, rho_global (empty where undefined)."""
        path = self._require_paths().get_robustness_trace_path()
        teams = sorted(team_traces)
        header = ["t"] + [f"rho_team_{team}" for team in teams] + ["rho_global"]

        def cell(value: float) -> Any:
            return "" if np.isnan(value) else float(value)

        rows = (
            [float(t)] + [cell(team_traces[team][k]) for team in teams] + [cell(global_trace[k])]
            for k, t in enumerate(times)
        )
        FileUtils.write_csv_file(path, header, rows)
        return path
