"""Scenario repository - Infrastructure layer for scenario documents.

This is part of the Infrastructure Layer following layered architecture.
Scenario files are JSON; every section is schema-checked and unknown keys are
rejected before anything is computed.
"""

import logging
import os
from typing import Any, Dict, Mapping, Optional

import numpy as np

from common.config.constants import AppConstants
from common.config.settings import SolverSettings
from common.utils.file_utils import FileUtils
from domain.exceptions import InputError, ScenarioError, StlDecompositionError
from domain.models.local_task import TimingPolicy
from domain.models.predicate import Affine, ConcaveQuadratic, PredicateFunction
from domain.models.scenario import LinearAgent, Scenario
from domain.models.team import TeamPartition

TOP_LEVEL_KEYS = {
    "name",
    "agents",
    "teams",
    "predicates",
    "formula",
    "horizon",
    "dt",
    "timing",
    "solver",
    "margin",
    "until_instants",
}
REQUIRED_KEYS = {"agents", "teams", "predicates", "formula", "horizon", "dt"}
AGENT_KEYS = {"id", "dim", "dynamics", "state_bound", "input_bound", "initial_state", "domain_box"}
AGENT_REQUIRED = {"id", "dim", "dynamics", "state_bound", "input_bound"}
PREDICATE_KEYS = {"family", "parameters", "footprint"}
TIMING_KEYS = {"mode", "overrides"}
FAMILY_PARAMETERS = {
    AppConstants.FAMILY_QUADRATIC: ({"offset", "center", "weight"}, set()),
    AppConstants.FAMILY_QUADRATIC_DIFFERENCE: ({"offset", "weight"}, {"shift"}),
    AppConstants.FAMILY_AFFINE: ({"gradient", "offset"}, set()),
}


def _check_keys(section: str, data: Any, allowed: set, required: set = frozenset()):
    if not isinstance(data, dict):
        raise ScenarioError(f"{section}: expected an object, got {type(data).__name__}")
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ScenarioError(f"{section}: unknown keys {unknown}")
    missing = sorted(set(required) - set(data))
    if missing:
        raise ScenarioError(f"{section}: missing keys {missing}")


def _index_map(section: str, data: Any) -> Dict[int, Any]:
    """JSON object keyed by 1-based conjunct index."""
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ScenarioError(f"{section}: expected an object keyed by conjunct index")
    try:
        return {int(key): value for key, value in data.items()}
    except ValueError as e:
        raise ScenarioError(f"{section}: keys must be conjunct indices ({e})") from e


def predicate_from_dict(name: str, data: Mapping[str, Any]) -> PredicateFunction:
    """
    Build a predicate function from its scenario entry.

    Families:
        quadratic: offset - (y - center)^T weight (y - center)
        quadratic-difference: offset - ||y_a - y_b - shift||^2_weight over halves of y
        affine: gradient . y + offset

    Raises:
        ScenarioError: On an unknown family or bad parameter set
        InputError: When the parameters themselves are invalid
    """
    _check_keys(f"predicates.{name}", data, PREDICATE_KEYS, PREDICATE_KEYS)
    family = data["family"]
    if family not in FAMILY_PARAMETERS:
        raise ScenarioError(f"predicates.{name}: unknown family {family!r}")
    required, optional = FAMILY_PARAMETERS[family]
    params = data["parameters"]
    _check_keys(f"predicates.{name}.parameters", params, required | optional, required)
    footprint = data["footprint"]

    if family == AppConstants.FAMILY_QUADRATIC:
        return ConcaveQuadratic(params["offset"], params["center"], params["weight"], footprint)
    if family == AppConstants.FAMILY_QUADRATIC_DIFFERENCE:
        return ConcaveQuadratic.difference(params["offset"], params["weight"], footprint, params.get("shift"))
    return Affine(params["gradient"], params["offset"], footprint)


def _agent_from_dict(position: int, data: Any) -> LinearAgent:
    _check_keys(f"agents[{position}]", data, AGENT_KEYS, AGENT_REQUIRED)
    dim = int(data["dim"])
    dynamics = np.asarray(data["dynamics"], dtype=float)
    if dynamics.size != dim * dim:
        raise ScenarioError(f"agents[{position}]: dynamics must hold {dim * dim} entries")
    box = data.get("domain_box")
    if box is not None:
        if not isinstance(box, dict) or set(box) != {"lower", "upper"}:
            raise ScenarioError(f"agents[{position}].domain_box: expected {{lower, upper}}")
        box = (box["lower"], box["upper"])
    return LinearAgent(
        id=int(data["id"]),
        dynamics=dynamics.reshape(dim, dim),
        state_bound=float(data["state_bound"]),
        input_bound=float(data["input_bound"]),
        initial_state=data.get("initial_state"),
        domain_box=box,
    )


def _timing_options(data: Any) -> Dict[str, Dict[int, Any]]:
    """
    Per-mode overrides. A number applies to point mode, a [start, end] pair
    to interval mode, and {"point": t, "interval": [a, b]} to both.
    """
    options: Dict[str, Dict[int, Any]] = {mode: {} for mode in AppConstants.TIMING_MODES}
    for index, value in _index_map("timing.overrides", data).items():
        if isinstance(value, dict):
            _check_keys(f"timing.overrides.{index}", value, set(AppConstants.TIMING_MODES))
            for mode, entry in value.items():
                options[mode][index] = entry
        elif isinstance(value, (list, tuple)):
            if len(value) != 2:
                raise ScenarioError(f"timing.overrides.{index}: interval override needs [start, end]")
            options[AppConstants.TIMING_INTERVAL][index] = [float(v) for v in value]
        else:
            options[AppConstants.TIMING_POINT][index] = float(value)
    return options


def scenario_from_dict(data: Any, default_name: str = "scenario") -> Scenario:
    """
    Validate a scenario document and build the Scenario.

    Raises:
        ScenarioError: On schema violations
        InputError: On invalid content (formula, partition, predicates)
    """
    _check_keys("scenario", data, TOP_LEVEL_KEYS, REQUIRED_KEYS)
    if not isinstance(data["agents"], list) or not data["agents"]:
        raise ScenarioError("agents: expected a non-empty list")
    if not isinstance(data["teams"], list):
        raise ScenarioError("teams: expected a list of agent-id lists")
    if not isinstance(data["predicates"], dict):
        raise ScenarioError("predicates: expected an object keyed by name")
    if not isinstance(data["formula"], str):
        raise ScenarioError("formula: expected formula text")

    agents = [_agent_from_dict(position, entry) for position, entry in enumerate(data["agents"])]
    partition = TeamPartition([(agent.id, agent.dim) for agent in agents], data["teams"])
    predicates = {name: predicate_from_dict(name, entry) for name, entry in data["predicates"].items()}

    timing = data.get("timing") or {}
    _check_keys("timing", timing, TIMING_KEYS)
    mode = timing.get("mode", AppConstants.TIMING_POINT)
    if mode not in AppConstants.TIMING_MODES:
        raise ScenarioError(f"timing.mode: expected one of {AppConstants.TIMING_MODES}, got {mode!r}")
    options = _timing_options(timing.get("overrides"))

    try:
        solver = SolverSettings.from_dict(data.get("solver"))
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"solver: {e}") from e

    margin = data.get("margin")
    if margin is not None and float(margin) < 0:
        raise ScenarioError("margin: must be non-negative")

    until_instants = {k: float(v) for k, v in _index_map("until_instants", data.get("until_instants")).items()}

    return Scenario(
        agents=tuple(agents),
        partition=partition,
        predicates=predicates,
        formula_text=data["formula"],
        horizon=float(data["horizon"]),
        dt=float(data["dt"]),
        timing=TimingPolicy(mode, options[mode]),
        solver=solver,
        margin=None if margin is None else float(margin),
        name=str(data.get("name", default_name)),
        until_instants=until_instants,
        timing_options=options,
    )


def scenario_to_dict(scenario: Scenario) -> Dict[str, Any]:
    """Scenario document of a Scenario (inverse of scenario_from_dict)."""
    agents = []
    for agent in scenario.agents:
        entry = {
            "id": agent.id,
            "dim": agent.dim,
            "dynamics": agent.dynamics.tolist(),
            "state_bound": agent.state_bound,
            "input_bound": agent.input_bound,
            "initial_state": agent.initial_state if agent.auto_initial else agent.initial_state.tolist(),
        }
        if agent.domain_box is not None:
            entry["domain_box"] = {"lower": agent.domain_box[0].tolist(), "upper": agent.domain_box[1].tolist()}
        agents.append(entry)

    overrides: Dict[str, Dict[str, Any]] = {}
    for mode, values in scenario.timing_options.items():
        for index, value in values.items():
            overrides.setdefault(str(index), {})[mode] = value
    for index, value in scenario.timing.overrides.items():
        overrides.setdefault(str(index), {})[scenario.timing.mode] = value

    data = {
        "name": scenario.name,
        "agents": agents,
        "teams": [list(team) for team in scenario.partition.teams],
        "predicates": {name: pred.to_dict() for name, pred in sorted(scenario.predicates.items())},
        "formula": scenario.formula_text,
        "horizon": scenario.horizon,
        "dt": scenario.dt,
        "timing": {"mode": scenario.timing.mode, "overrides": overrides},
        "solver": scenario.solver.to_dict(),
    }
    if scenario.margin is not None:
        data["margin"] = scenario.margin
    if scenario.until_instants:
        data["until_instants"] = {str(k): v for k, v in sorted(scenario.until_instants.items())}
    return data


class ScenarioRepository:
    """Loads and validates scenario files."""

    def __init__(self, logger: Optional[logging.Logger] = None):
        """
        Initialize scenario repository.

        Args:
            logger: Logger instance
        """
        self.logger = logger or logging.getLogger(__name__)

    def load(self, path: str) -> Scenario:
        """
        Read and validate a scenario file.

        Args:
            path: Scenario JSON path

        Returns:
            Validated Scenario

        Raises:
            InputError: When the file is unreadable, malformed or invalid
        """
        try:
            data = FileUtils.read_json_file(path)
        except (OSError, ValueError) as e:
            raise InputError(f"cannot read scenario: {e}", AppConstants.STAGE_INPUT) from e

        try:
            scenario = scenario_from_dict(data, default_name=self._default_name(path))
        except StlDecompositionError as e:
            if e.stage is None:
                e.stage = AppConstants.STAGE_INPUT
            raise
        except (TypeError, ValueError, KeyError) as e:
            raise ScenarioError(f"{path}: {e}", AppConstants.STAGE_INPUT) from e

        self.logger.info(
            f"Loaded scenario {scenario.name!r}: {len(scenario.agents)} agents, "
            f"{scenario.partition.team_count} teams, {len(scenario.predicates)} predicates"
        )
        return scenario

    def save(self, scenario: Scenario, path: str):
        """Write a scenario document."""
        FileUtils.write_json_file(path, scenario_to_dict(scenario))

    @staticmethod
    def _default_name(path: str) -> str:
        return os.path.splitext(os.path.basename(path))[0]

