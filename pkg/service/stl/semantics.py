"""Fragment validation, until rewriting and quantitative robustness.

Robustness is evaluated on the sample grid of a Trajectory: the temporal
operators take extrema over the samples whose times fall in [t + a, t + b],
with non-aligned endpoints snapped outward (see Trajectory.window).
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Tuple

import numpy as np

from common.config.constants import AppConstants
from domain.exceptions import DimensionError, FragmentError, HorizonError, IntervalError
from domain.models.formula import (
    Always,
    Conjunction,
    Eventually,
    Predicate,
    StlFormula,
    TimeInterval,
    TrueFormula,
    Until,
    conjuncts,
    iter_subformulas,
)
from domain.models.predicate import PredicateFunction
from domain.models.team import TeamPartition
from domain.models.trajectory import Trajectory
from service.stl.parser import format_formula, parse_formula

# name -> function of an N x n sample stack returning N values
PredicateBinding = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class FragmentReport:
    """Outcome of validate_fragment; falsy when the formula is rejected."""

    violations: Tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def raise_if_invalid(self):
        if self.violations:
            raise FragmentError("; ".join(self.violations), AppConstants.STAGE_INPUT)


@dataclass(frozen=True)
class IndexSets:
    """I_G and I_F of a validated global formula, 1-based, plus [a_i, b_i]."""

    always: Tuple[int, ...]
    eventually: Tuple[int, ...]
    intervals: Dict[int, TimeInterval] = field(default_factory=dict)

    @property
    def count(self) -> int:
        return len(self.always) + len(self.eventually)


def _describe(formula: StlFormula) -> str:
    try:
        return format_formula(formula)
    except ValueError:
        return type(formula).__name__


def validate_fragment(formula: StlFormula) -> FragmentReport:
    """
    Check that a formula is a conjunction of G/F over (negated) predicates.

    A single temporal formula counts as a one-conjunct conjunction.

    Returns:
        FragmentReport naming every offending subtree (empty when valid)
    """
    violations: List[str] = []
    if any(isinstance(node, Until) for node in iter_subformulas(formula)):
        violations.append("formula contains an until operator; rewrite it with until_rewrite first")
        return FragmentReport(tuple(violations))

    if isinstance(formula, Conjunction) and not formula.children:
        return FragmentReport(("empty conjunction",))

    for position, conjunct in enumerate(conjuncts(formula), start=1):
        if not isinstance(conjunct, (Always, Eventually)):
            violations.append(
                f"conjunct {position} ({_describe(conjunct)}) is not an always/eventually formula"
            )
            continue
        if not isinstance(conjunct.child, Predicate):
            violations.append(
                f"conjunct {position}: operand of {_describe(conjunct)} must be a predicate or a negated predicate"
            )
    return FragmentReport(tuple(violations))


def until_rewrite(
    left: StlFormula, right: StlFormula, interval: TimeInterval, t_star: float
) -> Conjunction:
    """
    Replace left U[a,b] right by G[a,t*] left and F[t*,t*] right.

    Raises:
        IntervalError: When t* lies outside [a, b]
    """
    if not interval.contains(t_star):
        raise IntervalError(
            f"until split time {t_star} lies outside [{interval.a}, {interval.b}]",
            AppConstants.STAGE_INPUT,
        )
    return Conjunction(
        (
            Always(TimeInterval(interval.a, t_star), left),
            Eventually(TimeInterval(t_star, t_star), right),
        )
    )


def rewrite_untils(formula: StlFormula, instants: Optional[Mapping[int, float]] = None) -> StlFormula:
    """
    Rewrite every top-level until conjunct in place.

    Args:
        formula: Parsed global formula
        instants: 1-based conjunct position -> t*; the interval start is
            used for positions not listed

    Returns:
        Formula without top-level until operators
    """
    instants = dict(instants or {})
    rewritten: List[StlFormula] = []
    changed = False
    for position, conjunct in enumerate(conjuncts(formula), start=1):
        if isinstance(conjunct, Until):
            t_star = instants.get(position, conjunct.interval.a)
            rewritten.extend(until_rewrite(conjunct.left, conjunct.right, conjunct.interval, t_star).children)
            changed = True
        else:
            rewritten.append(conjunct)
    if not changed:
        return formula
    return Conjunction(tuple(rewritten))


def partition_indices(formula: StlFormula) -> IndexSets:
    """
    Split a fragment formula into its always (I_G) and eventually (I_F) indices.

    Raises:
        FragmentError: When the formula is outside the fragment
    """
    validate_fragment(formula).raise_if_invalid()
    always, eventually, intervals = [], [], {}
    for index, conjunct in enumerate(conjuncts(formula), start=1):
        intervals[index] = conjunct.interval
        (always if isinstance(conjunct, Always) else eventually).append(index)
    return IndexSets(tuple(always), tuple(eventually), intervals)


def bind_global_predicates(
    table: Mapping[str, PredicateFunction], partition: TeamPartition
) -> Dict[str, PredicateBinding]:
    """
    Bind predicate functions to columns of the global state x.

    Returns:
        name -> callable evaluating h on an N x n global sample stack
    """
    bindings = {}
    for name, predicate in table.items():
        columns = [partition.global_index(agent, component) for agent, component in predicate.footprint]
        bindings[name] = _column_binding(predicate, columns, partition.state_dim)
    return bindings


def _column_binding(predicate: PredicateFunction, columns: List[int], width: int) -> PredicateBinding:
    def evaluate(samples: np.ndarray) -> np.ndarray:
        if samples.shape[-1] != width:
            raise DimensionError(f"predicate expects a {width}-dimensional state, got {samples.shape[-1]}")
        return predicate.value(samples[..., columns])

    return evaluate


class RobustnessEvaluator:
    """
    Recursive robustness on one trajectory.

    Predicate values are computed once per predicate over all samples and
    reused across the recursion.
    """

    def __init__(self, trajectory: Trajectory, bindings: Mapping[str, PredicateBinding]):
        self.trajectory = trajectory
        self.bindings = bindings
        self._cache: Dict[str, np.ndarray] = {}

    def _predicate_values(self, name: str) -> np.ndarray:
        if name not in self._cache:
            if name not in self.bindings:
                raise FragmentError(f"no binding for predicate {name!r}")
            values = np.asarray(self.bindings[name](self.trajectory.samples), dtype=float).reshape(-1)
            if values.shape != (len(self.trajectory),):
                raise DimensionError(f"predicate {name!r} returned {values.shape} values")
            self._cache[name] = values
        return self._cache[name]

    def index_of(self, t: float) -> int:
        """Sample index at time t, which must lie on the grid."""
        x = self.trajectory
        position = (t - x.start) / x.dt
        index = int(round(position))
        if abs(position - index) > AppConstants.GRID_SNAP_TOLERANCE * max(1.0, abs(position)):
            raise HorizonError(f"time {t} is not on the sample grid (dt={x.dt}, start={x.start})")
        if not 0 <= index < len(x):
            raise HorizonError(f"time {t} lies outside [{x.start}, {x.end}]")
        return index

    def at(self, formula: StlFormula, t: float) -> float:
        return self._rho(formula, self.index_of(t))

    def at_index(self, formula: StlFormula, k: int) -> float:
        return self._rho(formula, k)

    def _window(self, k: int, interval: TimeInterval) -> range:
        t = self.trajectory.time_of(k)
        return self.trajectory.window(t + interval.a, t + interval.b)

    def _rho(self, formula: StlFormula, k: int) -> float:
        if isinstance(formula, TrueFormula):
            return math.inf
        if isinstance(formula, Predicate):
            value = float(self._predicate_values(formula.name)[k])
            return -value if formula.negated else value
        if isinstance(formula, Conjunction):
            return min(self._rho(child, k) for child in formula.children)
        if isinstance(formula, Always):
            return min(self._rho(formula.child, j) for j in self._window(k, formula.interval))
        if isinstance(formula, Eventually):
            return max(self._rho(formula.child, j) for j in self._window(k, formula.interval))
        if isinstance(formula, Until):
            return self._until(formula, k)
        raise FragmentError(f"cannot evaluate {type(formula).__name__}")

    def _until(self, formula: Until, k: int) -> float:
        """
        max over t1 in [t + a, t + b] of min(rho(right, t1), min over [t + a, t1] of rho(left)).

        The left operand is required from the window start t + a, not from t.
        For a > 0 this is weaker than requiring left on [t, t1], so `check`
        can report a larger robustness for a raw until formula than the
        from-t reading would. Rewritten untils (G[a,t*] left and F[t*,t*]
        right) are unaffected.
        """
        window = self._window(k, formula.interval)
        best = -math.inf
        running = math.inf
        for j in window:
            running = min(running, self._rho(formula.left, j))
            best = max(best, min(self._rho(formula.right, j), running))
        return best


def robustness(
    formula: StlFormula, trajectory: Trajectory, t: float, bindings: Mapping[str, PredicateBinding]
) -> float:
    """
    rho(formula, x, t) on the sample grid.

    Args:
        formula: Fragment formula (until allowed)
        trajectory: Sampled signal
        t: Evaluation time (a grid time)
        bindings: Predicate name -> evaluator on sample stacks

    Returns:
        Robustness value; the formula is satisfied when it is > 0

    Raises:
        HorizonError: When a window leaves the sampled horizon
        DimensionError: When a predicate does not fit the trajectory
    """
    return RobustnessEvaluator(trajectory, bindings).at(formula, t)


def robustness_signal(
    formula: StlFormula, trajectory: Trajectory, bindings: Mapping[str, PredicateBinding]
) -> np.ndarray:
    """rho(formula, x, t_k) for every sample; NaN where the horizon is too short."""
    evaluator = RobustnessEvaluator(trajectory, bindings)
    trace = np.full(len(trajectory), np.nan)
    for k in range(len(trajectory)):
        try:
            trace[k] = evaluator.at_index(formula, k)
        except HorizonError:
            continue
    return trace


def compile_global_formula(
    text: str,
    predicates: Mapping[str, PredicateFunction],
    until_instants: Optional[Mapping[int, float]] = None,
    horizon: Optional[float] = None,
) -> StlFormula:
    """
    Parse, rewrite untils and validate a global formula.

    Args:
        text: Formula text
        predicates: Predicate table the names must resolve against
        until_instants: Split times of until conjuncts, by 1-based position
        horizon: When given, every conjunct interval must end by it

    Returns:
        Fragment formula ready for decomposition

    Raises:
        FormulaSyntaxError, UnknownPredicateError, IntervalError, FragmentError
        HorizonError: When a conjunct reaches past the horizon
    """
    formula = rewrite_untils(parse_formula(text, predicates), until_instants)
    validate_fragment(formula).raise_if_invalid()
    if horizon is not None:
        tol = AppConstants.GRID_SNAP_TOLERANCE
        for position, conjunct in enumerate(conjuncts(formula), start=1):
            if conjunct.interval.b > horizon + tol:
                raise HorizonError(
                    f"conjunct {position} ends at {conjunct.interval.b}, after the horizon {horizon}",
                    AppConstants.STAGE_INPUT,
                )
    return formula
