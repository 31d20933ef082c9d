"""Team partition and 0/1 selection matrices."""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from domain.exceptions import DimensionError, PartitionError


@dataclass(frozen=True)
class SelectionMatrix:
    """
    0/1 matrix stored as a row-to-column index map.

    Row i holds a single one, in column `columns[i]`. Columns are distinct,
    so column sums are at most one; a square selection is a permutation.
    """

    columns: Tuple[int, ...]
    cols: int

    def __post_init__(self):
        columns = tuple(int(c) for c in self.columns)
        if any(c < 0 or c >= self.cols for c in columns):
            raise DimensionError(f"selection columns {columns} out of range 0..{self.cols - 1}")
        if len(set(columns)) != len(columns):
            raise DimensionError(f"selection columns {columns} are not distinct")
        object.__setattr__(self, "columns", columns)

    @property
    def rows(self) -> int:
        return len(self.columns)

    @property
    def is_permutation(self) -> bool:
        return self.rows == self.cols

    def apply(self, x: np.ndarray) -> np.ndarray:
        """S @ x (works on the last axis of a stack)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.cols:
            raise DimensionError(f"selection expects {self.cols} coordinates, got {x.shape[-1]}")
        return x[..., list(self.columns)]

    def transpose_apply(self, y: np.ndarray) -> np.ndarray:
        """S^T @ y: scatter y back into a zero vector of length cols."""
        y = np.asarray(y, dtype=float)
        if y.shape[-1] != self.rows:
            raise DimensionError(f"selection transpose expects {self.rows} values, got {y.shape[-1]}")
        out = np.zeros(y.shape[:-1] + (self.cols,))
        out[..., list(self.columns)] = y
        return out

    def compose(self, other: "SelectionMatrix") -> "SelectionMatrix":
        """self @ other, by index composition."""
        if self.cols != other.rows:
            raise DimensionError(f"cannot compose {self.rows}x{self.cols} with {other.rows}x{other.cols}")
        return SelectionMatrix(tuple(other.columns[c] for c in self.columns), other.cols)

    def inverse(self) -> "SelectionMatrix":
        """Transpose of a permutation (its inverse)."""
        if not self.is_permutation:
            raise DimensionError("only a permutation can be inverted")
        inverse = [0] * self.cols
        for row, column in enumerate(self.columns):
            inverse[column] = row
        return SelectionMatrix(tuple(inverse), self.cols)

    def to_dense(self) -> np.ndarray:
        dense = np.zeros((self.rows, self.cols))
        dense[np.arange(self.rows), list(self.columns)] = 1.0
        return dense

    @staticmethod
    def identity(size: int) -> "SelectionMatrix":
        return SelectionMatrix(tuple(range(size)), size)

    @staticmethod
    def stack(parts: Sequence["SelectionMatrix"]) -> "SelectionMatrix":
        """Vertical stack of selections sharing their column count."""
        if not parts:
            raise DimensionError("nothing to stack")
        cols = parts[0].cols
        if any(part.cols != cols for part in parts):
            raise DimensionError("stacked selections must share their column count")
        return SelectionMatrix(tuple(c for part in parts for c in part.columns), cols)


class TeamPartition:
    """
    Agents with their state dimensions, split into disjoint covering teams.

    Agents are kept in ascending id order; that order defines the global
    state x. Teams are 1-indexed in the order given; agents inside a team are
    sorted by id.
    """

    def __init__(self, agents: Sequence[Tuple[int, int]], teams: Sequence[Sequence[int]]):
        """
        Initialize partition.

        Args:
            agents: (agent id, state dimension) pairs
            teams: Agent-id lists, one per team

        Raises:
            PartitionError: On overlapping, non-covering or unknown teams
        """
        agents = sorted((int(agent), int(dim)) for agent, dim in agents)
        ids = [agent for agent, _ in agents]
        if not agents:
            raise PartitionError("partition needs at least one agent")
        if len(set(ids)) != len(ids):
            raise PartitionError(f"agent ids {ids} are not unique")
        if any(dim < 1 for _, dim in agents):
            raise PartitionError("agent state dimensions must be >= 1")
        if not teams:
            raise PartitionError("partition needs at least one team")

        seen: Dict[int, int] = {}
        normalized: List[Tuple[int, ...]] = []
        for index, team in enumerate(teams, start=1):
            members = tuple(sorted(int(agent) for agent in team))
            if not members:
                raise PartitionError(f"team {index} is empty")
            for agent in members:
                if agent not in ids:
                    raise PartitionError(f"team {index} references unknown agent {agent}")
                if agent in seen:
                    raise PartitionError(
                        f"agent {agent} belongs to teams {seen[agent]} and {index}"
                    )
                seen[agent] = index
            normalized.append(members)
        missing = sorted(set(ids) - set(seen))
        if missing:
            raise PartitionError(f"agents {missing} are not covered by any team")

        self.agents: Tuple[Tuple[int, int], ...] = tuple(agents)
        self.teams: Tuple[Tuple[int, ...], ...] = tuple(normalized)
        self._dims = dict(agents)
        self._team_of = seen

        self._offsets: Dict[int, int] = {}
        offset = 0
        for agent, dim in agents:
            self._offsets[agent] = offset
            offset += dim

    @property
    def state_dim(self) -> int:
        """n = sum of agent dimensions."""
        return sum(dim for _, dim in self.agents)

    @property
    def team_count(self) -> int:
        return len(self.teams)

    @property
    def agent_ids(self) -> Tuple[int, ...]:
        return tuple(agent for agent, _ in self.agents)

    def agent_dim(self, agent: int) -> int:
        return self._dims[agent]

    def team_of(self, agent: int) -> int:
        """1-based index of the agent's team."""
        return self._team_of[agent]

    def team_dim(self, team: int) -> int:
        """n_l = sum of the team's agent dimensions."""
        return sum(self._dims[agent] for agent in self.members(team))

    def members(self, team: int) -> Tuple[int, ...]:
        if not 1 <= team <= self.team_count:
            raise PartitionError(f"team index {team} out of range 1..{self.team_count}")
        return self.teams[team - 1]

    def global_index(self, agent: int, component: int) -> int:
        """0-based position of (agent, component) in x."""
        if agent not in self._dims:
            raise DimensionError(f"unknown agent {agent}")
        if not 0 <= component < self._dims[agent]:
            raise DimensionError(
                f"agent {agent} has {self._dims[agent]} state components, got component {component}"
            )
        return self._offsets[agent] + component

    def team_index(self, team: int, agent: int, component: int) -> int:
        """0-based position of (agent, component) in z_l."""
        offset = 0
        for member in self.members(team):
            if member == agent:
                if not 0 <= component < self._dims[agent]:
                    raise DimensionError(f"agent {agent} has no component {component}")
                return offset + component
            offset += self._dims[member]
        raise DimensionError(f"agent {agent} is not in team {team}")

    def team_coordinates(self, team: int) -> Tuple[Tuple[int, int], ...]:
        """(agent, component) pairs of z_l, in order."""
        return tuple(
            (agent, component)
            for agent in self.members(team)
            for component in range(self._dims[agent])
        )

    def __repr__(self) -> str:
        return f"TeamPartition(agents={list(self.agents)}, teams={[list(t) for t in self.teams]})"
