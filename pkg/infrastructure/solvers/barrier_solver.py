"""Log-barrier interior point solver for small dense convex programs.

Solves

    maximize    c^T x
    subject to  g_k(x) >= 0      (each g_k smooth and concave)
                lower <= x <= upper

by Newton centring on

    F_tau(x) = -c^T x - tau * sum_k log g_k(x) - tau * sum_j log(x_j - l_j) - tau * sum_j log(u_j - x_j)

with tau shrunk geometrically. A phase-I program finds the strictly feasible
start. Constraints come in blocks that evaluate all their members at once.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from common.config.constants import AppConstants
from common.config.settings import SolverSettings
from domain.exceptions import DimensionError
from domain.models.predicate import PredicateFunction

# Armijo slope fraction and step shrink factor of the line search
LINE_SEARCH_ALPHA = 0.25
LINE_SEARCH_BETA = 0.5
MIN_STEP = 1e-14

NEWTON_DECREMENT_TOLERANCE = 1e-10

PHASE_ONE_FEASIBLE = "feasible"
PHASE_ONE_DEGENERATE = "degenerate"
PHASE_ONE_INFEASIBLE = "infeasible"


class ConstraintBlock(ABC):
    """A group of concave constraints g_k(x) >= 0 over the same variables."""

    @property
    @abstractmethod
    def size(self) -> int:
        """Number of constraints in the block."""

    @abstractmethod
    def values(self, x: np.ndarray) -> np.ndarray:
        """g_k(x) for every member, shape (size,)."""

    @abstractmethod
    def gradients(self, x: np.ndarray) -> np.ndarray:
        """Rows are grad g_k(x), shape (size, m)."""

    def weighted_hessian(self, x: np.ndarray, weights: np.ndarray) -> Optional[np.ndarray]:
        """sum_k w_k * hess g_k(x), or None when second derivatives are unavailable."""
        return None


class AffineConstraints(ConstraintBlock):
    """g(x) = A x + b >= 0."""

    def __init__(self, matrix: Any, offset: Any):
        self.matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        self.offset = np.asarray(offset, dtype=float).reshape(-1)
        if self.offset.shape != (self.matrix.shape[0],):
            raise DimensionError(
                f"affine block has {self.matrix.shape[0]} rows but {self.offset.shape[0]} offsets"
            )

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    def values(self, x):
        return self.matrix @ x + self.offset

    def gradients(self, x):
        return self.matrix

    def weighted_hessian(self, x, weights):
        m = self.matrix.shape[1]
        return np.zeros((m, m))


class ComposedConstraints(ConstraintBlock):
    """
    g_k(x) = h(M_k x + y0_k) for a concave predicate function h.

    Each map is affine in x, so every g_k stays concave.
    """

    def __init__(self, predicate: PredicateFunction, maps: Any, offsets: Any = None):
        """
        Initialize block.

        Args:
            predicate: Concave function of the footprint vector
            maps: Array (K, d, m) of linear maps into the footprint
            offsets: Array (K, d) of constant footprint offsets (default zero)
        """
        self.predicate = predicate
        self.maps = np.asarray(maps, dtype=float)
        if self.maps.ndim != 3 or self.maps.shape[1] != predicate.size:
            raise DimensionError(
                f"maps must have shape (K, {predicate.size}, m), got {self.maps.shape}"
            )
        if offsets is None:
            offsets = np.zeros(self.maps.shape[:2])
        self.offsets = np.asarray(offsets, dtype=float)
        if self.offsets.shape != self.maps.shape[:2]:
            raise DimensionError(f"offsets must have shape {self.maps.shape[:2]}, got {self.offsets.shape}")

    @property
    def size(self) -> int:
        return self.maps.shape[0]

    def points(self, x: np.ndarray) -> np.ndarray:
        """Footprint vectors M_k x + y0_k, shape (K, d)."""
        return np.einsum("kdm,m->kd", self.maps, x) + self.offsets

    def values(self, x):
        return np.asarray(self.predicate.value(self.points(x)), dtype=float)

    def gradients(self, x):
        return np.einsum("kd,kdm->km", self.predicate.gradient(self.points(x)), self.maps)

    def weighted_hessian(self, x, weights):
        points = self.points(x)
        if self.predicate.constant_hessian:
            hessian = self.predicate.hessian(points[0])
            return np.einsum("k,kdm,de,ken->mn", weights, self.maps, hessian, self.maps)
        total = np.zeros((self.maps.shape[2], self.maps.shape[2]))
        for weight, matrix, point in zip(weights, self.maps, points):
            total += weight * matrix.T @ self.predicate.hessian(point) @ matrix
        return total


class ScalarConstraint(ConstraintBlock):
    """One concave constraint given by callables; the Hessian is optional."""

    def __init__(
        self,
        value: Callable[[np.ndarray], float],
        gradient: Callable[[np.ndarray], np.ndarray],
        hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self._value = value
        self._gradient = gradient
        self._hessian = hessian

    @property
    def size(self) -> int:
        return 1

    def values(self, x):
        return np.array([float(self._value(x))])

    def gradients(self, x):
        return np.asarray(self._gradient(x), dtype=float).reshape(1, -1)

    def weighted_hessian(self, x, weights):
        if self._hessian is None:
            return None
        return weights[0] * np.asarray(self._hessian(x), dtype=float)


class ConvexProgram:
    """maximize objective^T x subject to concave constraint blocks and a finite box."""

    def __init__(
        self,
        objective: Sequence[float],
        constraints: Sequence[ConstraintBlock],
        lower: Sequence[float],
        upper: Sequence[float],
    ):
        """
        Initialize program.

        Args:
            objective: Constant objective gradient c (maximized)
            constraints: Concave constraint blocks
            lower: Finite lower bounds per variable
            upper: Finite upper bounds per variable

        Raises:
            DimensionError: On inconsistent sizes
            ValueError: On infinite or crossed bounds
        """
        self.objective = np.asarray(objective, dtype=float).reshape(-1)
        self.lower = np.asarray(lower, dtype=float).reshape(-1)
        self.upper = np.asarray(upper, dtype=float).reshape(-1)
        self.constraints = list(constraints)
        m = self.objective.shape[0]
        if self.lower.shape != (m,) or self.upper.shape != (m,):
            raise DimensionError(f"bounds must have {m} entries")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("variable bounds must be finite")
        if np.any(self.lower >= self.upper):
            raise ValueError("every variable needs lower < upper")

    @property
    def variable_count(self) -> int:
        return self.objective.shape[0]

    @property
    def constraint_count(self) -> int:
        return sum(block.size for block in self.constraints)

    def values(self, x: np.ndarray) -> np.ndarray:
        if not self.constraints:
            return np.zeros(0)
        return np.concatenate([block.values(x) for block in self.constraints])

    def gradients(self, x: np.ndarray) -> np.ndarray:
        if not self.constraints:
            return np.zeros((0, self.variable_count))
        return np.vstack([block.gradients(x) for block in self.constraints])

    def weighted_hessian(self, x: np.ndarray, weights: np.ndarray) -> Optional[np.ndarray]:
        total = np.zeros((self.variable_count, self.variable_count))
        offset = 0
        for block in self.constraints:
            part = block.weighted_hessian(x, weights[offset: offset + block.size])
            if part is None:
                return None
            total += part
            offset += block.size
        return total

    def midpoint(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest amount by which a constraint or bound is violated (0 when feasible)."""
        worst = 0.0
        values = self.values(x)
        if values.size:
            worst = max(worst, float(-values.min()))
        worst = max(worst, float(np.max(self.lower - x)), float(np.max(x - self.upper)))
        return worst


@dataclass
class PhaseOneResult:
    status: str
    point: Optional[np.ndarray]
    slack: float
    iterations: int = 0


@dataclass
class SolverResult:
    point: Optional[np.ndarray]
    objective: float
    status: str
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.status == AppConstants.STATUS_OPTIMAL


class _BarrierProblem:
    """
    Barrier function of a generic concave program.

    Infinite bounds carry no barrier term; `values`, `gradients` and
    `hessian` evaluate the concave constraints.
    """

    def __init__(self, objective, values, gradients, hessian, lower, upper):
        self.objective = objective
        self.values = values
        self.gradients = gradients
        self.hessian = hessian
        self.lower = lower
        self.upper = upper
        self.has_lower = np.isfinite(lower)
        self.has_upper = np.isfinite(upper)

    def barrier_term_count(self, constraint_count: int) -> int:
        return constraint_count + int(self.has_lower.sum()) + int(self.has_upper.sum())

    def interior(self, x: np.ndarray, g: Optional[np.ndarray] = None) -> bool:
        if np.any(x[self.has_lower] <= self.lower[self.has_lower]):
            return False
        if np.any(x[self.has_upper] >= self.upper[self.has_upper]):
            return False
        if g is None:
            g = self.values(x)
        return bool(np.all(np.isfinite(g)) and np.all(g > 0))

    def value(self, x: np.ndarray, tau: float) -> float:
        g = self.values(x)
        if not self.interior(x, g):
            return np.inf
        total = -self.objective @ x - tau * np.sum(np.log(g))
        total -= tau * np.sum(np.log(x[self.has_lower] - self.lower[self.has_lower]))
        total -= tau * np.sum(np.log(self.upper[self.has_upper] - x[self.has_upper]))
        return float(total)

    def _bound_terms(self, x: np.ndarray, tau: float) -> Tuple[np.ndarray, np.ndarray]:
        gradient = np.zeros_like(x)
        curvature = np.zeros_like(x)
        lo = x[self.has_lower] - self.lower[self.has_lower]
        hi = self.upper[self.has_upper] - x[self.has_upper]
        gradient[self.has_lower] -= tau / lo
        gradient[self.has_upper] += tau / hi
        curvature[self.has_lower] += tau / lo ** 2
        curvature[self.has_upper] += tau / hi ** 2
        return gradient, curvature

    def gradient(self, x: np.ndarray, tau: float) -> np.ndarray:
        g = self.values(x)
        grads = self.gradients(x)
        bound_gradient, _ = self._bound_terms(x, tau)
        return -self.objective - tau * (grads.T @ (1.0 / g)) + bound_gradient

    def newton_system(self, x: np.ndarray, tau: float) -> Tuple[np.ndarray, Optional[np.ndarray], np.ndarray]:
        """Gradient, exact Hessian (None when unavailable) and Gauss-Newton part."""
        g = self.values(x)
        grads = self.gradients(x)
        bound_gradient, bound_curvature = self._bound_terms(x, tau)
        gradient = -self.objective - tau * (grads.T @ (1.0 / g)) + bound_gradient
        gauss_newton = tau * (grads.T * (1.0 / g ** 2)) @ grads + np.diag(bound_curvature)
        curvature = self.hessian(x, tau / g)
        exact = None if curvature is None else gauss_newton - curvature
        return gradient, exact, gauss_newton


class BarrierSolver:
    """
    Log-barrier interior point method with Newton centring.

    Re-entrant: all iteration state lives in local variables, so one solver
    can serve concurrent solves of distinct programs.
    """

    def __init__(self, settings: Optional[SolverSettings] = None, logger: Optional[logging.Logger] = None):
        """
        Initialize solver.

        Args:
            settings: Tolerances, barrier schedule and iteration budgets
            logger: Logger instance
        """
        self.settings = settings or SolverSettings()
        self.logger = logger or logging.getLogger(__name__)

    def _centre(
        self, problem: _BarrierProblem, x: np.ndarray, tau: float, kkt_target: float
    ) -> Tuple[np.ndarray, int, bool]:
        """Newton iterations on F_tau from a strictly feasible x."""
        bfgs: Optional[np.ndarray] = None
        previous: Optional[Tuple[np.ndarray, np.ndarray]] = None
        for step in range(1, self.settings.max_inner_iterations + 1):
            gradient, hessian, gauss_newton = problem.newton_system(x, tau)
            if not np.all(np.isfinite(gradient)):
                return x, step, False
            if hessian is None:
                if bfgs is None:
                    bfgs = gauss_newton + 1e-12 * np.eye(x.size)
                elif previous is not None:
                    bfgs = self._bfgs_update(bfgs, x - previous[0], gradient - previous[1])
                hessian = bfgs

            direction = self._solve(hessian, -gradient)
            decrement = float(-gradient @ direction)
            if decrement / 2.0 <= NEWTON_DECREMENT_TOLERANCE and np.linalg.norm(gradient) <= kkt_target:
                return x, step - 1, True
            if decrement <= 0:
                return x, step - 1, decrement / 2.0 <= NEWTON_DECREMENT_TOLERANCE

            t = self._line_search(problem, x, tau, direction, gradient)
            if t is None:
                return x, step, False
            previous = (x, gradient)
            x = x + t * direction
        return x, self.settings.max_inner_iterations, False

    @staticmethod
    def _solve(hessian: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        try:
            return np.linalg.solve(hessian, rhs)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(hessian, rhs, rcond=None)[0]

    @staticmethod
    def _bfgs_update(matrix: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
        sy = float(s @ y)
        if sy <= 1e-16:
            return matrix
        ms = matrix @ s
        return matrix - np.outer(ms, ms) / float(s @ ms) + np.outer(y, y) / sy

    @staticmethod
    def _line_search(
        problem: _BarrierProblem, x: np.ndarray, tau: float, direction: np.ndarray, gradient: np.ndarray
    ) -> Optional[float]:
        """Backtracking that keeps the iterate strictly feasible."""
        t = 1.0
        current = problem.value(x, tau)
        slope = float(gradient @ direction)
        while t >= MIN_STEP:
            candidate = problem.value(x + t * direction, tau)
            if candidate <= current + LINE_SEARCH_ALPHA * t * slope:
                return t
            t *= LINE_SEARCH_BETA
        return None

    def _run_barrier(
        self,
        problem: _BarrierProblem,
        x: np.ndarray,
        terms: int,
        gap_target: Callable[[np.ndarray], float],
        kkt_target: float,
        stop: Optional[Callable[[np.ndarray], bool]] = None,
    ) -> Tuple[np.ndarray, str, Dict[str, Any]]:
        tau = self.settings.initial_barrier_weight
        newton_steps = 0
        history: List[float] = []
        status = AppConstants.STATUS_ITERATION_LIMIT
        outer = 0
        for outer in range(1, self.settings.max_outer_iterations + 1):
            x, steps, centred = self._centre(problem, x, tau, kkt_target)
            newton_steps += steps
            history.append(float(problem.objective @ x))
            self.logger.debug(
                f"barrier round {outer}: tau={tau:.3e} steps={steps} centred={centred} "
                f"objective={history[-1]:.9g}"
            )
            if not np.all(np.isfinite(x)):
                break
            if stop is not None and stop(x):
                status = AppConstants.STATUS_OPTIMAL
                break
            if terms * tau <= gap_target(x):
                status = AppConstants.STATUS_OPTIMAL
                break
            tau /= self.settings.barrier_factor

        diagnostics = {
            "outer_iterations": outer,
            "newton_iterations": newton_steps,
            "barrier_weight": tau,
            "objective_history": history,
            "kkt_residual": float(np.linalg.norm(problem.gradient(x, tau))) if problem.interior(x) else None,
        }
        return x, status, diagnostics

    def phase_one(self, program: ConvexProgram) -> PhaseOneResult:
        """
        Find a point strictly inside the box with every g_k > 0.

        Maximizes a slack s subject to g_k(x) - s >= 0 over the open box and
        stops as soon as an iterate is strictly feasible.

        Returns:
            PhaseOneResult with status feasible (point returned), degenerate
            (best slack within the feasibility tolerance of zero; point
            returned) or infeasible (no point)
        """
        start = program.midpoint()
        g0 = program.values(start)
        if g0.size == 0 or np.all(g0 > 0):
            return PhaseOneResult(PHASE_ONE_FEASIBLE, start, float(g0.min()) if g0.size else np.inf)

        m = program.variable_count

        def values(z):
            return program.values(z[:m]) - z[m]

        def gradients(z):
            grads = program.gradients(z[:m])
            return np.hstack([grads, -np.ones((grads.shape[0], 1))])

        def hessian(z, weights):
            inner = program.weighted_hessian(z[:m], weights)
            if inner is None:
                return None
            out = np.zeros((m + 1, m + 1))
            out[:m, :m] = inner
            return out

        objective = np.zeros(m + 1)
        objective[m] = 1.0
        problem = _BarrierProblem(
            objective,
            values,
            gradients,
            hessian,
            np.append(program.lower, -np.inf),
            np.append(program.upper, np.inf),
        )
        z0 = np.append(start, float(g0.min()) - 1.0)
        tolerance = self.settings.feasibility_tolerance
        terms = problem.barrier_term_count(program.constraint_count)

        z, _, diagnostics = self._run_barrier(
            problem,
            z0,
            terms,
            gap_target=lambda z: 0.1 * tolerance,
            kkt_target=self.settings.optimality_tolerance,
            stop=lambda z: bool(np.all(program.values(z[:m]) > 0)),
        )
        point = z[:m]
        slack = float(program.values(point).min())
        iterations = diagnostics["newton_iterations"]
        if slack > 0:
            return PhaseOneResult(PHASE_ONE_FEASIBLE, point, slack, iterations)
        if slack >= -tolerance:
            return PhaseOneResult(PHASE_ONE_DEGENERATE, point, slack, iterations)
        self.logger.debug(f"phase one: best slack {slack:.3e} below -{tolerance:.1e}")
        return PhaseOneResult(PHASE_ONE_INFEASIBLE, None, slack, iterations)

    def solve(self, program: ConvexProgram) -> SolverResult:
        """
        Maximize the program objective.

        Returns:
            SolverResult with status optimal, infeasible or iteration-limit;
            diagnostics carry iteration counts, the KKT residual, the largest
            constraint violation and the objective history
        """
        settings = self.settings
        start = self.phase_one(program)
        if start.status == PHASE_ONE_INFEASIBLE:
            return SolverResult(
                None,
                float("-inf"),
                AppConstants.STATUS_INFEASIBLE,
                {"phase_one_slack": start.slack, "phase_one_iterations": start.iterations},
            )
        if start.status == PHASE_ONE_DEGENERATE:
            point = np.clip(start.point, program.lower, program.upper)
            return SolverResult(
                point,
                float(program.objective @ point),
                AppConstants.STATUS_OPTIMAL,
                {
                    "degenerate": True,
                    "phase_one_slack": start.slack,
                    "phase_one_iterations": start.iterations,
                    "max_violation": program.max_violation(point),
                    "outer_iterations": 0,
                    "newton_iterations": 0,
                    "objective_history": [],
                    "kkt_residual": None,
                },
            )

        problem = _BarrierProblem(
            program.objective,
            program.values,
            program.gradients,
            program.weighted_hessian,
            program.lower,
            program.upper,
        )
        terms = problem.barrier_term_count(program.constraint_count)
        kkt_target = settings.optimality_tolerance * (1.0 + float(np.linalg.norm(program.objective)))
        x, status, diagnostics = self._run_barrier(
            problem,
            start.point.copy(),
            terms,
            gap_target=lambda x: settings.optimality_tolerance * max(1.0, abs(float(program.objective @ x))),
            kkt_target=kkt_target,
        )
        violation = program.max_violation(x)
        if status == AppConstants.STATUS_OPTIMAL and violation > settings.feasibility_tolerance:
            status = AppConstants.STATUS_ITERATION_LIMIT
        diagnostics.update(
            {
                "degenerate": False,
                "phase_one_slack": start.slack,
                "phase_one_iterations": start.iterations,
                "max_violation": violation,
            }
        )
        return SolverResult(x, float(program.objective @ x), status, diagnostics)


def solve(program: ConvexProgram, settings: Optional[SolverSettings] = None) -> SolverResult:
    """Solve with a fresh BarrierSolver."""
    return BarrierSolver(settings).solve(program)


def phase_one(program: ConvexProgram, settings: Optional[SolverSettings] = None) -> PhaseOneResult:
    """Strictly feasible starting point of a program, if any."""
    return BarrierSolver(settings).phase_one(program)
