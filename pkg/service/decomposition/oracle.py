"""Brute-force grid search over (c, r) for small decomposition programs."""

import logging
from typing import Optional

import numpy as np

from common.config.constants import AppConstants
from common.config.settings import DefaultSettings
from domain.exceptions import DimensionError, InfeasibleError
from domain.models.hypercube import DecompositionProblem, DecompositionResult
from service.decomposition.hypercube import cubes_from_point, vertex_maps

CHUNK_SIZE = 8192
FEASIBILITY_SLACK = 1e-12


def grid_oracle(
    problem: DecompositionProblem,
    resolution: int = DefaultSettings.DEFAULT_ORACLE_RESOLUTION,
    max_variables: int = DefaultSettings.DEFAULT_ORACLE_MAX_VARIABLES,
    logger: Optional[logging.Logger] = None,
) -> DecompositionResult:
    """
    Best gridded feasible point of the decomposition program.

    Each centre coordinate takes `resolution` values across its domain range
    and each radius `resolution` values in [0, half the narrowest range].
    Ties keep the first point in grid order.

    Returns:
        DecompositionResult whose diagnostics carry `grid_step`, an upper
        bound on how far the gridded optimum can fall below the true one

    Raises:
        DimensionError: When the program has more than `max_variables` variables
        InfeasibleError: When no grid point is feasible
    """
    logger = logger or logging.getLogger(__name__)
    m = problem.variable_count
    if m > max_variables:
        raise DimensionError(
            f"grid oracle handles at most {max_variables} variables, conjunct {problem.source} has {m}"
        )
    if resolution < 2:
        raise ValueError("oracle resolution must be at least 2")

    axes = [None] * m
    lower = np.zeros(m)
    upper = np.zeros(m)
    grid_step = 0.0
    for position, (centre, radius) in enumerate(problem.variable_slices()):
        lo, hi = problem.footprint_bounds(position)
        r_max = float(np.min(hi - lo) / 2.0)
        for j in range(centre.stop - centre.start):
            axes[centre.start + j] = np.linspace(lo[j], hi[j], resolution)
        axes[radius] = np.linspace(0.0, r_max, resolution)
        lower[centre], upper[centre] = lo, hi
        grid_step += float(np.max(hi - lo)) / (resolution - 1) / 2.0 + r_max / (resolution - 1)

    maps = vertex_maps(problem)
    objective = np.zeros(m)
    for _, radius in problem.variable_slices():
        objective[radius] = 1.0

    shape = tuple(len(axis) for axis in axes)
    total = int(np.prod(shape))
    best_value, best_point = -np.inf, None
    for start in range(0, total, CHUNK_SIZE):
        flat = np.arange(start, min(start + CHUNK_SIZE, total))
        index = np.unravel_index(flat, shape)
        points = np.stack([axes[v][index[v]] for v in range(m)], axis=1)

        feasible = np.ones(len(points), dtype=bool)
        for centre, radius in problem.variable_slices():
            c = points[:, centre]
            r = points[:, radius][:, None]
            feasible &= np.all(c - r >= lower[centre] - FEASIBILITY_SLACK, axis=1)
            feasible &= np.all(c + r <= upper[centre] + FEASIBILITY_SLACK, axis=1)
        if not feasible.any():
            continue
        candidates = points[feasible]
        values = problem.predicate.value(np.einsum("kdm,bm->bkd", maps, candidates))
        feasible_rows = np.all(values >= -FEASIBILITY_SLACK, axis=1)
        if not feasible_rows.any():
            continue
        scores = candidates[feasible_rows] @ objective
        best = int(np.argmax(scores))
        if scores[best] > best_value:
            best_value = float(scores[best])
            best_point = candidates[feasible_rows][best]

    if best_point is None:
        raise InfeasibleError(
            f"conjunct {problem.source}: no feasible grid point at resolution {resolution}",
            AppConstants.STAGE_DECOMPOSE,
        )

    cubes, objective_value = cubes_from_point(problem, best_point)
    logger.debug(
        f"oracle conjunct {problem.source}: objective {objective_value:.6f} over {total} grid points"
    )
    return DecompositionResult(
        problem.source,
        cubes,
        objective_value,
        {
            "status": AppConstants.STATUS_OPTIMAL,
            "oracle": True,
            "resolution": resolution,
            "grid_points": total,
            "grid_step": grid_step,
            "degenerate": objective_value <= 0.0,
        },
    )
