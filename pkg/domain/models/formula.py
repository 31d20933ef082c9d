"""STL abstract syntax tree.

Formulas are immutable values; structural equality is dataclass equality, so
`parse(format(f)) == f` is a plain `==` check.
"""

import math
from dataclasses import dataclass
from typing import Iterator, Tuple, Union

from domain.exceptions import IntervalError


@dataclass(frozen=True)
class TimeInterval:
    """Closed interval [a, b] with 0 <= a <= b < inf (seconds)."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)):
            raise IntervalError(f"interval [{self.a}, {self.b}] must be finite")
        if a < 0:
            raise IntervalError(f"interval [{self.a}, {self.b}] has a negative bound")
        if a > b:
            raise IntervalError(f"interval [{self.a}, {self.b}] has a > b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def contains(self, t: float) -> bool:
        return self.a <= t <= self.b

    def includes(self, other: "TimeInterval") -> bool:
        """True when `other` is a subinterval of this interval."""
        return self.a <= other.a and other.b <= self.b

    @property
    def length(self) -> float:
        return self.b - self.a


@dataclass(frozen=True)
class TrueFormula:
    """The constant true."""


@dataclass(frozen=True)
class Predicate:
    """Reference to a named predicate function, optionally negated."""

    name: str
    negated: bool = False


@dataclass(frozen=True)
class Always:
    interval: TimeInterval
    child: "StlFormula"


@dataclass(frozen=True)
class Eventually:
    interval: TimeInterval
    child: "StlFormula"


@dataclass(frozen=True)
class Until:
    interval: TimeInterval
    left: "StlFormula"
    right: "StlFormula"


@dataclass(frozen=True)
class Conjunction:
    children: Tuple["StlFormula", ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


StlFormula = Union[TrueFormula, Predicate, Always, Eventually, Until, Conjunction]

TemporalFormula = Union[Always, Eventually]


def iter_subformulas(formula: StlFormula) -> Iterator[StlFormula]:
    """Pre-order traversal of a formula."""
    yield formula
    if isinstance(formula, (Always, Eventually)):
        yield from iter_subformulas(formula.child)
    elif isinstance(formula, Until):
        yield from iter_subformulas(formula.left)
        yield from iter_subformulas(formula.right)
    elif isinstance(formula, Conjunction):
        for child in formula.children:
            yield from iter_subformulas(child)


def predicate_names(formula: StlFormula) -> Tuple[str, ...]:
    """Distinct predicate names in order of first appearance."""
    seen = []
    for node in iter_subformulas(formula):
        if isinstance(node, Predicate) and node.name not in seen:
            seen.append(node.name)
    return tuple(seen)


def conjuncts(formula: StlFormula) -> Tuple[StlFormula, ...]:
    """Top-level conjuncts (a non-conjunction counts as a single conjunct)."""
    if isinstance(formula, Conjunction):
        return formula.children
    return (formula,)
