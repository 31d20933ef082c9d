"""Local (per-team) STL tasks produced by the synthesis step."""

from dataclasses import dataclass, field
from typing import Any, Dict, Mapping, Optional, Tuple

from common.config.constants import AppConstants
from domain.exceptions import InputError
from domain.models.formula import Always, Conjunction, Eventually, Predicate, StlFormula, TimeInterval
from domain.models.hypercube import HypercubePredicate


@dataclass(frozen=True)
class TimingPolicy:
    """
    How eventually-conjuncts are localized.

    `point` emits F[t_i, t_i]; `interval` emits G[a_q, b_q]. Overrides map a
    1-based global conjunct index to an instant (point mode) or a
    (start, end) pair (interval mode); anything not overridden uses the
    deterministic defaults below.
    """

    mode: str = AppConstants.TIMING_POINT
    overrides: Mapping[int, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in AppConstants.TIMING_MODES:
            raise InputError(f"unknown timing mode {self.mode!r}")
        object.__setattr__(self, "overrides", {int(k): v for k, v in dict(self.overrides).items()})

    @property
    def is_point(self) -> bool:
        return self.mode == AppConstants.TIMING_POINT

    def instant_for(self, index: int, interval: TimeInterval) -> float:
        """t_i; default is the interval midpoint."""
        if index in self.overrides:
            return float(self.overrides[index])
        return 0.5 * (interval.a + interval.b)

    def window_for(self, index: int, interval: TimeInterval) -> TimeInterval:
        """[a_q, b_q]; default is the centred third of [a_i, b_i]."""
        if index in self.overrides:
            start, end = self.overrides[index]
            return TimeInterval(start, end)
        third = interval.length / 3.0
        return TimeInterval(interval.a + third, interval.b - third)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "overrides": {str(k): v for k, v in sorted(self.overrides.items())},
        }


@dataclass(frozen=True)
class LocalConjunct:
    """One conjunct of a team's local task: operator, interval and cube."""

    team: int
    source: int
    operator: str
    interval: TimeInterval
    cube: HypercubePredicate
    margin: float

    @property
    def name(self) -> str:
        """Predicate name used in the formula text."""
        return f"box_{self.source}_{self.team}"

    def formula(self) -> StlFormula:
        atom = Predicate(self.name)
        if self.operator == AppConstants.OPERATOR_EVENTUALLY:
            return Eventually(self.interval, atom)
        return Always(self.interval, atom)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "source": self.source,
            "operator": self.operator,
            "interval": [self.interval.a, self.interval.b],
            "margin": self.margin,
            "predicate": self.cube.to_dict(),
        }

    @classmethod
    def from_dict(cls, team: int, data: Dict[str, Any]) -> "LocalConjunct":
        a, b = data["interval"]
        return cls(
            team=team,
            source=int(data["source"]),
            operator=data["operator"],
            interval=TimeInterval(a, b),
            cube=HypercubePredicate.from_dict(data["predicate"]),
            margin=float(data["margin"]),
        )


@dataclass(frozen=True)
class LocalTaskSet:
    """phi_l: conjunction of one team's local conjuncts, in source order."""

    team: int
    conjuncts: Tuple[LocalConjunct, ...]
    mode: str
    margin: float

    def __post_init__(self):
        object.__setattr__(self, "conjuncts", tuple(self.conjuncts))

    def formula(self) -> Optional[StlFormula]:
        """The team formula, or None for a team without tasks."""
        if not self.conjuncts:
            return None
        return Conjunction(tuple(c.formula() for c in self.conjuncts))

    def predicates(self) -> Dict[str, HypercubePredicate]:
        return {c.name: c.cube for c in self.conjuncts}

    def conjunct_for(self, source: int) -> Optional[LocalConjunct]:
        for conjunct in self.conjuncts:
            if conjunct.source == source:
                return conjunct
        return None

    def horizon(self) -> float:
        """Latest time any conjunct refers to."""
        return max((c.interval.b for c in self.conjuncts), default=0.0)
