"""Hypercube decomposition of one global predicate over the teams it reads.

For a predicate h_i over the teams V_i, every team l gets a cube
{z_l : |z_l(j) - c_l(j)| <= r_l, j in J_l}. Requiring h_i >= 0 on each of the
2^{d_i} combinations of cube vertices certifies h_i >= 0 on the whole product
of cubes, because h_i is concave. Maximizing sum_l r_l over those vertex
constraints is a convex program.
"""

import itertools
import logging
from typing import List, Mapping, Optional, Sequence, Tuple

import numpy as np

from common.config.constants import AppConstants
from common.config.settings import DefaultSettings, SolverSettings
from domain.exceptions import (
    ConvergenceError,
    DimensionError,
    FragmentError,
    InfeasibleError,
    InputError,
)
from domain.models.hypercube import DecompositionProblem, DecompositionResult, HypercubePredicate
from domain.models.predicate import Affine, PredicateFunction
from domain.models.team import TeamPartition
from infrastructure.solvers.barrier_solver import (
    AffineConstraints,
    BarrierSolver,
    ComposedConstraints,
    ConvexProgram,
)
from service.team_algebra import footprint_selection

logger = logging.getLogger(__name__)

DomainBoxes = Mapping[int, Tuple[np.ndarray, np.ndarray]]


def vertex_set(center: Sequence[float], radius: float, coordinates: Sequence[int]) -> List[np.ndarray]:
    """
    Corners of the cube of half-edge `radius` around `center` over `coordinates`.

    Coordinates outside the set are copied from the center. Corners are
    listed in lexicographic sign order (-1 before +1), 2^|J| of them, with
    repeats when the radius is zero.

    Raises:
        InputError: On a negative radius
    """
    if radius < 0:
        raise InputError(f"hypercube radius must be >= 0, got {radius}")
    center = np.asarray(center, dtype=float)
    coordinates = list(coordinates)
    vertices = []
    for signs in itertools.product((-1.0, 1.0), repeat=len(coordinates)):
        vertex = center.copy()
        vertex[coordinates] = center[coordinates] + radius * np.asarray(signs)
        vertices.append(vertex)
    return vertices


def effective_predicate(predicate: PredicateFunction, negated: bool) -> PredicateFunction:
    """
    The concave function a conjunct actually constrains.

    Raises:
        FragmentError: For a negated non-affine predicate (its negation is not concave)
    """
    if not negated:
        return predicate
    if isinstance(predicate, Affine):
        return predicate.negated()
    raise FragmentError(
        f"negated {predicate.family} predicate is not concave and cannot be decomposed",
        AppConstants.STAGE_DECOMPOSE,
    )


def assemble_program(
    predicate: PredicateFunction,
    partition: TeamPartition,
    domain: DomainBoxes,
    source: int = 1,
    negated: bool = False,
) -> DecompositionProblem:
    """
    Build the decomposition program of one global conjunct.

    Args:
        predicate: Global predicate function h_i
        partition: Team partition
        domain: team -> (lower, upper) bounds of z_l
        source: Global conjunct index i
        negated: Whether the conjunct reads not h_i

    Returns:
        DecompositionProblem over the teams the predicate reads

    Raises:
        FragmentError: When the constrained function is not concave
        DimensionError: When a footprint coordinate or domain box does not fit
    """
    predicate = effective_predicate(predicate, negated)
    selection = footprint_selection(predicate, partition)

    lower, upper, dims = [], [], []
    for fp in selection.teams:
        if fp.team not in domain:
            raise DimensionError(f"no domain box for team {fp.team}")
        lo, hi = (np.asarray(v, dtype=float).reshape(-1) for v in domain[fp.team])
        n_l = partition.team_dim(fp.team)
        if lo.shape != (n_l,) or hi.shape != (n_l,):
            raise DimensionError(f"team {fp.team} domain box must have {n_l} entries")
        if np.any(lo >= hi) or not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise InputError(f"team {fp.team} domain box must be finite with lower < upper")
        lower.append(lo)
        upper.append(hi)
        dims.append(n_l)

    return DecompositionProblem(
        source=source,
        predicate=predicate,
        teams=selection.teams,
        lower=tuple(lower),
        upper=tuple(upper),
        team_dims=tuple(dims),
    )


def vertex_maps(problem: DecompositionProblem) -> np.ndarray:
    """
    Linear maps from the decision vector to every vertex combination.

    Row p of map k is footprint slot p: centre coordinate plus or minus the
    radius of the team that owns the slot. Sign patterns run
    lexicographically over the teams' coordinates in decision-vector order.

    Returns:
        Array of shape (2^{d_i}, d_i, variables)
    """
    d = problem.footprint_size
    m = problem.variable_count
    slices = problem.variable_slices()
    rows = []  # (footprint slot, centre variable, radius variable)
    for fp, (centre, radius) in zip(problem.teams, slices):
        for j, slot in enumerate(fp.positions):
            rows.append((slot, centre.start + j, radius))

    maps = np.zeros((2 ** d, d, m))
    for k, signs in enumerate(itertools.product((-1.0, 1.0), repeat=d)):
        for sign, (slot, centre_var, radius_var) in zip(signs, rows):
            maps[k, slot, centre_var] = 1.0
            maps[k, slot, radius_var] = sign
    return maps


def build_convex_program(problem: DecompositionProblem) -> ConvexProgram:
    """
    maximize sum_l r_l subject to h_i >= 0 on every vertex combination and
    c_l(j) - r_l >= lower_l(j), c_l(j) + r_l <= upper_l(j).
    """
    m = problem.variable_count
    objective = np.zeros(m)
    lower = np.zeros(m)
    upper = np.zeros(m)
    box_rows, box_offsets = [], []
    for position, (centre, radius) in enumerate(problem.variable_slices()):
        lo, hi = problem.footprint_bounds(position)
        objective[radius] = 1.0
        lower[centre], upper[centre] = lo, hi
        lower[radius], upper[radius] = 0.0, float(np.min(hi - lo) / 2.0)
        for j in range(centre.stop - centre.start):
            row = np.zeros(m)
            row[centre.start + j], row[radius] = 1.0, -1.0
            box_rows.append(row)
            box_offsets.append(-lo[j])
            row = np.zeros(m)
            row[centre.start + j], row[radius] = -1.0, -1.0
            box_rows.append(row)
            box_offsets.append(hi[j])

    constraints = [
        ComposedConstraints(problem.predicate, vertex_maps(problem)),
        AffineConstraints(np.array(box_rows), np.array(box_offsets)),
    ]
    return ConvexProgram(objective, constraints, lower, upper)


def level_set_hint(problem: DecompositionProblem) -> bool:
    """
    Cheap evidence that the zero level set meets the domain.

    True when h_i >= 0 at the domain centre or, for quadratic predicates, at
    the predicate centre if that lies in the domain. False is inconclusive.
    """
    predicate = problem.predicate
    y_mid = np.zeros(predicate.size)
    y_lo = np.zeros(predicate.size)
    y_hi = np.zeros(predicate.size)
    for position, fp in enumerate(problem.teams):
        lo, hi = problem.footprint_bounds(position)
        y_mid[list(fp.positions)] = 0.5 * (lo + hi)
        y_lo[list(fp.positions)] = lo
        y_hi[list(fp.positions)] = hi
    if float(predicate.value(y_mid)) >= 0:
        return True
    centre = getattr(predicate, "center", None)
    if centre is not None and np.all(centre >= y_lo) and np.all(centre <= y_hi):
        return float(predicate.value(centre)) >= 0
    return False


def cubes_from_point(
    problem: DecompositionProblem, point: np.ndarray
) -> Tuple[Tuple[HypercubePredicate, ...], float]:
    """Per-team cubes of a decision vector; non-footprint centre entries sit at the domain midpoint."""
    cubes = []
    total = 0.0
    for position, (fp, (centre, radius)) in enumerate(zip(problem.teams, problem.variable_slices())):
        full_centre = 0.5 * (problem.lower[position] + problem.upper[position])
        lo, hi = problem.footprint_bounds(position)
        full_centre[list(fp.coordinates)] = np.clip(point[centre], lo, hi)
        r = max(float(point[radius]), 0.0)
        total += r
        cubes.append(
            HypercubePredicate(
                team=fp.team,
                center=tuple(full_centre),
                radius=r,
                coordinates=fp.coordinates,
                source=problem.source,
            )
        )
    return tuple(cubes), total


def vertex_violation(problem: DecompositionProblem, cubes: Sequence[HypercubePredicate]) -> float:
    """Largest -h_i over all vertex combinations of the cubes (0 when all are satisfied)."""
    point = np.zeros(problem.variable_count)
    for cube, (centre, radius) in zip(cubes, problem.variable_slices()):
        point[centre] = np.asarray(cube.center)[list(cube.coordinates)]
        point[radius] = cube.radius
    values = problem.predicate.value(np.einsum("kdm,m->kd", vertex_maps(problem), point))
    return max(0.0, float(-np.min(values)))


def solve_decomposition(
    problem: DecompositionProblem,
    settings: Optional[SolverSettings] = None,
    degenerate_radius: float = DefaultSettings.DEFAULT_DEGENERATE_RADIUS,
    solver_logger: Optional[logging.Logger] = None,
) -> DecompositionResult:
    """
    Solve the program of one global conjunct.

    Args:
        problem: Assembled program
        settings: Solver tolerances and budgets
        degenerate_radius: Team radius at or below which the optimum is
            reported as degenerate (success with a warning flag)
        solver_logger: Logger for solver progress

    Returns:
        DecompositionResult with one cube per involved team

    Raises:
        InfeasibleError: When the zero level set is empty within the domain
        ConvergenceError: When the solver exhausts its iteration budget
    """
    settings = settings or SolverSettings()
    program = build_convex_program(problem)
    result = BarrierSolver(settings, solver_logger).solve(program)

    if result.status == AppConstants.STATUS_INFEASIBLE:
        raise InfeasibleError(
            f"conjunct {problem.source}: predicate has no satisfying box inside the domain "
            f"(best phase-one slack {result.diagnostics.get('phase_one_slack', float('nan')):.3e})",
            AppConstants.STAGE_DECOMPOSE,
        )
    if result.status != AppConstants.STATUS_OPTIMAL:
        raise ConvergenceError(
            f"conjunct {problem.source}: solver stopped with status {result.status} after "
            f"{result.diagnostics.get('outer_iterations')} barrier rounds",
            AppConstants.STAGE_DECOMPOSE,
        )

    cubes, objective = cubes_from_point(problem, result.point)
    degenerate = bool(result.diagnostics.get("degenerate")) or min(c.radius for c in cubes) <= degenerate_radius
    if degenerate:
        logger.warning(
            f"conjunct {problem.source}: degenerate optimum (radii {[c.radius for c in cubes]}); "
            f"the level set is touched rather than entered"
        )

    diagnostics = {
        "status": result.status,
        "degenerate": degenerate,
        "iterations": result.diagnostics.get("newton_iterations", 0),
        "outer_iterations": result.diagnostics.get("outer_iterations", 0),
        "kkt_residual": result.diagnostics.get("kkt_residual"),
        "max_violation": vertex_violation(problem, cubes),
        "constraint_count": problem.constraint_count,
        "variable_count": problem.variable_count,
        "involved_teams": list(problem.involved_teams),
    }
    return DecompositionResult(problem.source, cubes, objective, diagnostics)
