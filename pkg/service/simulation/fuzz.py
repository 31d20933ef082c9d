"""Random scenarios for the soundness fuzz run and the property tests."""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from common.config.constants import AppConstants
from domain.models.formula import Always, Conjunction, Eventually, Predicate, TimeInterval, Until
from domain.models.local_task import LocalTaskSet, TimingPolicy
from domain.models.predicate import Affine, ConcaveQuadratic
from domain.models.scenario import AUTO_INITIAL_STATE, LinearAgent, Scenario
from domain.models.team import TeamPartition
from domain.models.trajectory import Trajectory
from service.stl.parser import format_formula

FUZZ_HORIZON = 10.0
FUZZ_DT = 0.1
MAX_FOOTPRINT = 6


@dataclass
class FuzzSummary:
    """Counts of a fuzz run; `violations` lists every soundness counterexample."""

    seed: int
    scenarios: int = 0
    runs: int = 0
    locally_satisfied: int = 0
    globally_satisfied: int = 0
    failures_by_stage: Dict[str, int] = field(default_factory=dict)
    violations: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def sound(self) -> bool:
        return not self.violations

    def record_failure(self, stage: Optional[str]):
        key = stage or "unknown"
        self.failures_by_stage[key] = self.failures_by_stage.get(key, 0) + 1

    def to_dict(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "scenarios": self.scenarios,
            "runs": self.runs,
            "locally_satisfied": self.locally_satisfied,
            "globally_satisfied": self.globally_satisfied,
            "failures_by_stage": dict(sorted(self.failures_by_stage.items())),
            "soundness_violations": len(self.violations),
            "violations": list(self.violations),
            "sound": self.sound,
        }


def random_partition(rng: np.random.Generator, agent_ids: List[int]) -> List[List[int]]:
    """Random split of the agents into 1..len(agent_ids) non-empty teams."""
    order = list(rng.permutation(agent_ids))
    team_count = int(rng.integers(1, len(order) + 1))
    cuts = sorted(rng.choice(np.arange(1, len(order)), size=team_count - 1, replace=False)) if team_count > 1 else []
    teams, start = [], 0
    for cut in list(cuts) + [len(order)]:
        teams.append(sorted(int(a) for a in order[start:cut]))
        start = cut
    return teams


def random_footprint(
    rng: np.random.Generator, agents: List[Tuple[int, int]], max_agents: int = 3
) -> List[Tuple[int, int]]:
    """Components of one to `max_agents` agents, at most MAX_FOOTPRINT in total."""
    count = int(rng.integers(1, min(max_agents, len(agents)) + 1))
    chosen = sorted(rng.choice(len(agents), size=count, replace=False))
    footprint: List[Tuple[int, int]] = []
    for position in chosen:
        agent, dim = agents[int(position)]
        budget = MAX_FOOTPRINT - len(footprint)
        if budget <= 0:
            break
        size = int(rng.integers(1, min(dim, budget) + 1))
        components = sorted(int(c) for c in rng.choice(dim, size=size, replace=False))
        footprint.extend((agent, c) for c in components)
    return footprint


def random_quadratic(
    rng: np.random.Generator, footprint: List[Tuple[int, int]], half_widths: Dict[int, float]
) -> ConcaveQuadratic:
    """Concave quadratic whose centre lies well inside the domain, so its level set is non-empty there."""
    size = len(footprint)
    center = np.array([rng.uniform(-0.5, 0.5) * half_widths[agent] for agent, _ in footprint])
    basis = rng.normal(size=(size, size))
    weight = basis @ basis.T / size + np.diag(rng.uniform(0.2, 1.0, size=size))
    offset = float(rng.uniform(0.05, 0.3))
    return ConcaveQuadratic(offset, center, weight, footprint)


def random_affine(
    rng: np.random.Generator, footprint: List[Tuple[int, int]], half_widths: Dict[int, float]
) -> Affine:
    """Affine h with -h > 0 at a point well inside the domain, for use under `not`."""
    size = len(footprint)
    inside = np.array([rng.uniform(-0.5, 0.5) * half_widths[agent] for agent, _ in footprint])
    gradient = rng.normal(size=size)
    gradient /= max(float(np.linalg.norm(gradient)), 1e-9)
    slack = float(rng.uniform(0.05, 0.3))
    return Affine(gradient, -float(gradient @ inside) - slack, footprint)


def random_interval(rng: np.random.Generator, horizon: float = FUZZ_HORIZON) -> TimeInterval:
    """Grid-aligned [a, b] inside [0, horizon]."""
    steps = int(round(horizon * 10))
    a = int(rng.integers(0, steps))
    b = int(rng.integers(a, min(a + 30, steps) + 1))
    return TimeInterval(a / 10.0, b / 10.0)


def random_instant(rng: np.random.Generator, interval: TimeInterval) -> float:
    """Grid-aligned t* in [a, b]."""
    a, b = (int(round(v * 10)) for v in (interval.a, interval.b))
    return int(rng.integers(a, b + 1)) / 10.0


def random_scenario(
    rng: np.random.Generator,
    timing_mode: str = AppConstants.TIMING_POINT,
    agent_range: Tuple[int, int] = (2, 6),
    max_dim: int = 3,
    max_conjuncts: int = 3,
    margin: float = 1e-3,
    name: str = "fuzz",
    until_share: float = 0.2,
    negated_share: float = 0.2,
) -> Scenario:
    """
    A random decomposable scenario.

    Agents have stable random dynamics, d_x = 1 and d_u = 5, start at the
    centre of their first box, and are split into random teams. A conjunct
    is, by the given shares, `p U[a,b] p'` over two concave quadratics with a
    random split time, G or F over a negated affine predicate, or G or F
    over a concave quadratic.
    """
    agent_count = int(rng.integers(agent_range[0], agent_range[1] + 1))
    agents_dims = [(k, int(rng.integers(1, max_dim + 1))) for k in range(1, agent_count + 1)]
    agents = []
    for agent_id, dim in agents_dims:
        dynamics = -np.diag(rng.uniform(0.2, 1.0, size=dim)) + 0.2 * rng.normal(size=(dim, dim))
        agents.append(LinearAgent(agent_id, dynamics, 1.0, 5.0, AUTO_INITIAL_STATE))
    partition = TeamPartition(agents_dims, random_partition(rng, [a for a, _ in agents_dims]))
    half_widths = {agent.id: float(agent.box()[1][0]) for agent in agents}

    predicates = {}
    until_instants = {}
    terms = []

    def quadratic() -> Predicate:
        key = f"p{len(predicates) + 1}"
        predicates[key] = random_quadratic(rng, random_footprint(rng, agents_dims), half_widths)
        return Predicate(key)

    for position in range(1, int(rng.integers(1, max_conjuncts + 1)) + 1):
        kind = rng.random()
        interval = random_interval(rng)
        if kind < until_share:
            terms.append(Until(interval, quadratic(), quadratic()))
            until_instants[position] = random_instant(rng, interval)
            continue
        if kind < until_share + negated_share:
            key = f"q{len(predicates) + 1}"
            predicates[key] = random_affine(rng, random_footprint(rng, agents_dims), half_widths)
            atom = Predicate(key, negated=True)
        else:
            atom = quadratic()
        operator = Always if rng.random() < 0.5 else Eventually
        terms.append(operator(interval, atom))
    formula = terms[0] if len(terms) == 1 else Conjunction(tuple(terms))

    return Scenario(
        agents=tuple(agents),
        partition=partition,
        predicates=predicates,
        formula_text=format_formula(formula),
        horizon=FUZZ_HORIZON,
        dt=FUZZ_DT,
        timing=TimingPolicy(timing_mode),
        margin=margin,
        name=name,
        until_instants=until_instants,
    )


def hermite_interpolate(
    knot_times: np.ndarray,
    knot_values: np.ndarray,
    times: np.ndarray,
    tangents: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    C1 cubic Hermite spline through (knot_times, knot_values), evaluated at `times`.

    Tangents default to the finite-difference slopes of the knots.
    """
    knot_values = knot_values.reshape(len(knot_times), -1)
    if tangents is None:
        tangents = np.gradient(knot_values, knot_times, axis=0, edge_order=1)
    segment = np.clip(np.searchsorted(knot_times, times, side="right") - 1, 0, len(knot_times) - 2)
    width = (knot_times[segment + 1] - knot_times[segment])[:, None]
    s = (times[:, None] - knot_times[segment][:, None]) / width
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    return (
        h00 * knot_values[segment]
        + h10 * width * tangents[segment]
        + h01 * knot_values[segment + 1]
        + h11 * width * tangents[segment + 1]
    )


def box_knots(
    rng: np.random.Generator, tasks: LocalTaskSet, dt: float, spacing: float, spread: float
) -> Dict[int, Dict[int, float]]:
    """
    Sample index -> coordinate -> knot value drawn near the box centres.

    Always-conjuncts pin their window ends and interior points half a
    `spacing` apart. Eventually-conjuncts pin one random sample of their
    window. Values lie within `spread` radii of the centre; between knots
    the curve is free to leave the box.
    """
    pinned: Dict[int, Dict[int, float]] = {}
    step = max(int(round(spacing / dt)) // 2, 1)
    tol = AppConstants.GRID_SNAP_TOLERANCE
    for conjunct in tasks.conjuncts:
        cube = conjunct.cube
        # same outward snapping as Trajectory.window
        first = math.floor(conjunct.interval.a / dt + tol)
        last = math.ceil(conjunct.interval.b / dt - tol)
        if conjunct.operator == AppConstants.OPERATOR_ALWAYS:
            indices = sorted(set(range(first, last + 1, step)) | {last})
        else:
            indices = [int(rng.integers(first, last + 1))]
        for index in indices:
            values = pinned.setdefault(index, {})
            for coordinate in cube.coordinates:
                values[coordinate] = float(cube.center[coordinate] + spread * cube.radius * rng.uniform(-1.0, 1.0))
    return pinned


def random_smooth_trajectory(
    rng: np.random.Generator,
    tasks: LocalTaskSet,
    domain: Tuple[np.ndarray, np.ndarray],
    horizon: float,
    dt: float,
    spacing: float = 1.0,
    spread: float = 1.0,
) -> Trajectory:
    """
    Planner-free team trajectory: a cubic spline through random knots.

    Free knots sit `spacing` apart and are uniform in the domain; knots
    inside conjunct windows are biased toward the boxes (see `box_knots`).
    Free knots closer than half a spacing to a pinned one are dropped. The
    tangents at pinned knots are scaled by one random stiffness in [0, 1],
    so curves range from flat inside the boxes to ones that overshoot them.
    The curve is clipped to the domain. Nothing guarantees the local task
    holds; callers filter on local robustness.
    """
    samples = int(round(horizon / dt)) + 1
    lo_domain, hi_domain = (np.asarray(v, dtype=float) for v in domain)
    pinned = {k: v for k, v in box_knots(rng, tasks, dt, spacing, spread).items() if k < samples}

    step = max(int(round(spacing / dt)), 1)
    free = sorted(set(range(0, samples, step)) | {samples - 1})
    guard = step / 2.0
    free = [k for k in free if all(abs(k - p) >= guard for p in pinned)]
    indices = np.array(sorted(set(free) | set(pinned)))

    values = rng.uniform(lo_domain, hi_domain, size=(len(indices), lo_domain.size))
    for row, index in enumerate(indices):
        for coordinate, value in pinned.get(int(index), {}).items():
            values[row, coordinate] = value

    if len(indices) == 1:
        curve = np.repeat(values, samples, axis=0)
    else:
        knot_times = indices * dt
        tangents = np.gradient(values, knot_times, axis=0, edge_order=1)
        tangents[np.isin(indices, list(pinned))] *= rng.uniform(0.0, 1.0)
        curve = hermite_interpolate(knot_times, values, np.arange(samples) * dt, tangents)
    return Trajectory(np.clip(curve, lo_domain, hi_domain), dt)
