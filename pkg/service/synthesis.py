"""Local task synthesis from per-conjunct decomposition results."""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Tuple

from common.config.constants import AppConstants
from domain.exceptions import InputError, IntervalError
from domain.models.formula import StlFormula, TimeInterval
from domain.models.hypercube import DecompositionResult
from domain.models.local_task import LocalConjunct, LocalTaskSet, TimingPolicy
from domain.models.team import TeamPartition
from service.stl.semantics import IndexSets, partition_indices

logger = logging.getLogger(__name__)

RADIUS_TOLERANCE = 1e-12


@dataclass(frozen=True)
class ConsistencyReport:
    """Violations found by cross_team_consistency_check; falsy when any exist."""

    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def snap_instant(t: float, interval: TimeInterval, dt: float) -> float:
    """
    Move t onto the sample grid.

    Picks the grid point nearest to t among those inside [a, b]; when the
    interval holds no grid point, the nearest grid point overall.
    """
    tol = AppConstants.GRID_SNAP_TOLERANCE
    first = math.ceil(interval.a / dt - tol)
    last = math.floor(interval.b / dt + tol)
    k = int(round(t / dt))
    if first <= last:
        k = min(max(k, first), last)
    return round(k * dt, 12)


def local_timing(
    index: int, indices: IndexSets, policy: TimingPolicy, dt: Optional[float] = None
) -> Tuple[str, TimeInterval]:
    """
    Operator and interval of the local conjuncts of global conjunct `index`.

    Raises:
        IntervalError: When a chosen instant or window leaves [a_i, b_i]
    """
    interval = indices.intervals[index]
    if index in indices.always:
        return AppConstants.OPERATOR_ALWAYS, interval

    if policy.is_point:
        try:
            t = policy.instant_for(index, interval)
        except (TypeError, ValueError) as e:
            raise IntervalError(
                f"conjunct {index}: point timing needs a single instant ({e})", AppConstants.STAGE_SYNTHESIZE
            ) from e
        if not interval.contains(t):
            raise IntervalError(
                f"conjunct {index}: instant {t} lies outside [{interval.a}, {interval.b}]",
                AppConstants.STAGE_SYNTHESIZE,
            )
        if dt is not None:
            t = snap_instant(t, interval, dt)
        return AppConstants.OPERATOR_EVENTUALLY, TimeInterval(t, t)

    try:
        window = policy.window_for(index, interval)
    except (TypeError, ValueError) as e:
        raise IntervalError(
            f"conjunct {index}: interval timing needs a (start, end) pair ({e})", AppConstants.STAGE_SYNTHESIZE
        ) from e
    if not interval.includes(window):
        raise IntervalError(
            f"conjunct {index}: window [{window.a}, {window.b}] is not inside [{interval.a}, {interval.b}]",
            AppConstants.STAGE_SYNTHESIZE,
        )
    return AppConstants.OPERATOR_ALWAYS, window


def synthesize(
    global_formula: StlFormula,
    results: Mapping[int, DecompositionResult],
    policy: TimingPolicy,
    partition: TeamPartition,
    margin: float = 0.0,
    dt: Optional[float] = None,
) -> Dict[int, LocalTaskSet]:
    """
    Emit one local task per team.

    Always-conjuncts keep [a_i, b_i]. Eventually-conjuncts become F[t_i, t_i]
    (point mode) or G[a_q, b_q] (interval mode), with the same timing for
    every team of V_i. Cube radii are shrunk by `margin`.

    Args:
        global_formula: Validated global formula
        results: Global conjunct index -> decomposition result
        policy: Timing policy
        partition: Team partition
        margin: Radius shrink applied to every cube
        dt: Sampling step; when given, point instants snap to the grid

    Returns:
        team -> LocalTaskSet (teams without tasks get an empty set)

    Raises:
        InputError: When a conjunct has no decomposition
        IntervalError: On timing outside the conjunct interval
    """
    if margin < 0:
        raise InputError("margin must be non-negative", AppConstants.STAGE_SYNTHESIZE)
    indices = partition_indices(global_formula)
    per_team: Dict[int, List[LocalConjunct]] = {team: [] for team in range(1, partition.team_count + 1)}

    for index in range(1, indices.count + 1):
        result = results.get(index)
        if result is None or not result.cubes:
            raise InputError(f"conjunct {index} has no decomposition result", AppConstants.STAGE_SYNTHESIZE)
        operator, interval = local_timing(index, indices, policy, dt)
        for cube in result.cubes:
            shrunk = cube.shrink(margin)
            if shrunk.radius <= 0:
                logger.warning(
                    f"conjunct {index}, team {cube.team}: margin {margin} consumes radius {cube.radius}; "
                    f"the local task cannot be met strictly"
                )
            per_team[cube.team].append(
                LocalConjunct(
                    team=cube.team,
                    source=index,
                    operator=operator,
                    interval=interval,
                    cube=shrunk,
                    margin=margin,
                )
            )

    return {
        team: LocalTaskSet(team, tuple(conjuncts), policy.mode, margin)
        for team, conjuncts in per_team.items()
    }


def cross_team_consistency_check(
    tasks: Mapping[int, LocalTaskSet],
    global_formula: StlFormula,
    results: Mapping[int, DecompositionResult],
) -> ConsistencyReport:
    """
    Check the premises the soundness argument relies on.

    Verifies that every global conjunct maps to exactly one local conjunct
    per involved team, that all teams share the timing of each conjunct and
    that one margin was applied throughout.
    """
    violations: List[str] = []
    try:
        indices = partition_indices(global_formula)
    except InputError as e:
        return ConsistencyReport((f"global formula: {e}",))

    margins = {c.margin for task in tasks.values() for c in task.conjuncts}
    if len(margins) > 1:
        violations.append(f"margins differ across conjuncts: {sorted(margins)}")

    for team, task in tasks.items():
        seen = set()
        for conjunct in task.conjuncts:
            if conjunct.team != team or conjunct.cube.team != team:
                violations.append(f"team {team} holds a conjunct for team {conjunct.team}")
            if conjunct.source in seen:
                violations.append(f"team {team} has several conjuncts for conjunct {conjunct.source}")
            seen.add(conjunct.source)
            if conjunct.source not in indices.intervals:
                violations.append(f"team {team} has a conjunct for unknown conjunct {conjunct.source}")

    for index in range(1, indices.count + 1):
        result = results.get(index)
        if result is None:
            violations.append(f"conjunct {index} has no decomposition result")
            continue
        timings = set()
        for team, task in tasks.items():
            conjunct = task.conjunct_for(index)
            decomposed = result.cube_for(team)
            if decomposed is None:
                if conjunct is not None:
                    violations.append(f"team {team} has a conjunct for conjunct {index} it does not take part in")
                continue
            if conjunct is None:
                violations.append(f"conjunct {index} is missing from team {team}")
                continue
            timings.add((conjunct.operator, conjunct.interval.a, conjunct.interval.b))
            target = max(decomposed.radius - conjunct.margin, 0.0)
            if abs(conjunct.cube.radius - target) > RADIUS_TOLERANCE:
                violations.append(
                    f"conjunct {index}, team {team}: radius {conjunct.cube.radius} is not the "
                    f"decomposed radius {decomposed.radius} less margin {conjunct.margin}"
                )
        if len(timings) > 1:
            violations.append(f"conjunct {index}: teams disagree on timing {sorted(timings)}")
        if index in indices.always and timings:
            interval = indices.intervals[index]
            if timings != {(AppConstants.OPERATOR_ALWAYS, interval.a, interval.b)}:
                violations.append(f"conjunct {index}: always-conjunct interval changed")

    return ConsistencyReport(tuple(violations))
