"""Hypercube predicates and the per-formula decomposition program/result."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np

from domain.exceptions import DimensionError, InputError
from domain.models.predicate import PredicateFunction
from domain.models.team import SelectionMatrix


@dataclass(frozen=True)
class TeamFootprint:
    """
    What one team contributes to a global predicate.

    `selection` is B_i^l (d_i^l x n_l); its columns are J_q^l. `positions`
    are the slots of the footprint vector y filled by this team, in the same
    order as the selection rows.
    """

    team: int
    selection: SelectionMatrix
    positions: Tuple[int, ...]

    @property
    def size(self) -> int:
        """d_i^l."""
        return self.selection.rows

    @property
    def coordinates(self) -> Tuple[int, ...]:
        """J_q^l as 0-based indices into z_l."""
        return self.selection.columns


@dataclass(frozen=True)
class HypercubePredicate:
    """
    h(z) = r - || B (z - c) ||_inf over team coordinates J.

    Only the centre entries at J affect h; the remaining ones are fixed to
    the domain midpoint so serialized results are deterministic.
    """

    team: int
    center: Tuple[float, ...]
    radius: float
    coordinates: Tuple[int, ...]
    source: int

    def __post_init__(self):
        if self.radius < 0:
            raise InputError(f"hypercube radius must be >= 0, got {self.radius}")
        center = tuple(float(v) for v in self.center)
        coordinates = tuple(int(c) for c in self.coordinates)
        if any(c < 0 or c >= len(center) for c in coordinates):
            raise DimensionError(f"cube coordinates {coordinates} out of range for a {len(center)}-vector")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "coordinates", coordinates)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        """n_l, the length of the team state the cube lives in."""
        return len(self.center)

    def value(self, z: np.ndarray) -> np.ndarray:
        """h(z) for one team state or a stack of them (last axis n_l)."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.dim:
            raise DimensionError(f"cube over {self.dim} coordinates got {z.shape[-1]}")
        idx = list(self.coordinates)
        gap = np.abs(z[..., idx] - np.asarray(self.center)[idx])
        return self.radius - gap.max(axis=-1)

    def bounds(self) -> Tuple[np.ndarray, np.ndarray]:
        """Per-coordinate [c - r, c + r] over J."""
        c = np.asarray(self.center)[list(self.coordinates)]
        return c - self.radius, c + self.radius

    def shrink(self, margin: float) -> "HypercubePredicate":
        """Same cube with radius r - margin (never below zero)."""
        return HypercubePredicate(
            self.team, self.center, max(self.radius - margin, 0.0), self.coordinates, self.source
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            "team": self.team,
            "center": list(self.center),
            "radius": self.radius,
            "coordinates": list(self.coordinates),
            "source": self.source,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "HypercubePredicate":
        return cls(
            team=int(data["team"]),
            center=tuple(data["center"]),
            radius=float(data["radius"]),
            coordinates=tuple(data["coordinates"]),
            source=int(data["source"]),
        )


@dataclass(frozen=True, eq=False)
class DecompositionProblem:
    """
    Program for one global conjunct i.

    Decision vector layout: for each involved team in order, its d_i^l
    centre coordinates followed by its radius.
    """

    source: int
    predicate: PredicateFunction
    teams: Tuple[TeamFootprint, ...]
    lower: Tuple[np.ndarray, ...]
    upper: Tuple[np.ndarray, ...]
    team_dims: Tuple[int, ...]

    @property
    def involved_teams(self) -> Tuple[int, ...]:
        """V_i."""
        return tuple(fp.team for fp in self.teams)

    @property
    def footprint_size(self) -> int:
        """d_i = sum of d_i^l."""
        return sum(fp.size for fp in self.teams)

    @property
    def variable_count(self) -> int:
        return self.footprint_size + len(self.teams)

    @property
    def constraint_count(self) -> int:
        """Number of vertex constraints, 2^{d_i}."""
        return 2 ** self.footprint_size

    def variable_slices(self) -> Tuple[Tuple[slice, int], ...]:
        """(centre slice, radius index) per team in the decision vector."""
        out = []
        offset = 0
        for fp in self.teams:
            out.append((slice(offset, offset + fp.size), offset + fp.size))
            offset += fp.size + 1
        return tuple(out)

    def footprint_bounds(self, position: int) -> Tuple[np.ndarray, np.ndarray]:
        """Domain bounds of the footprint coordinates of the position-th team."""
        fp = self.teams[position]
        cols = list(fp.coordinates)
        return self.lower[position][cols], self.upper[position][cols]


@dataclass(frozen=True)
class DecompositionResult:
    """Per-team cubes for one global conjunct plus solver diagnostics."""

    source: int
    cubes: Tuple[HypercubePredicate, ...]
    objective: float
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    @property
    def degenerate(self) -> bool:
        return bool(self.diagnostics.get("degenerate", False))

    def cube_for(self, team: int) -> Optional[HypercubePredicate]:
        for cube in self.cubes:
            if cube.team == team:
                return cube
        return None

    def to_dict(self, margin: float = 0.0) -> Dict[str, Any]:
        """Serializable form with one entry per team."""
        return {
            "formula_index": self.source,
            "objective": self.objective,
            "diagnostics": dict(self.diagnostics),
            "teams": [
                {
                    "team": cube.team,
                    "center": list(cube.center),
                    "radius": cube.radius,
                    "margin_adjusted_radius": max(cube.radius - margin, 0.0),
                    "coordinates": list(cube.coordinates),
                }
                for cube in self.cubes
            ],
        }
