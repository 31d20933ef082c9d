"""Selection and permutation algebra between x, the team states z_l and footprints y."""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from domain.exceptions import DimensionError, PartitionError
from domain.models.hypercube import TeamFootprint
from domain.models.predicate import PredicateFunction
from domain.models.team import SelectionMatrix, TeamPartition


@dataclass(frozen=True)
class FootprintSelection:
    """Per-team footprint selections of one predicate, in team order (V_i)."""

    teams: Tuple[TeamFootprint, ...]

    @property
    def involved_teams(self) -> Tuple[int, ...]:
        return tuple(fp.team for fp in self.teams)

    @property
    def sizes(self) -> Dict[int, int]:
        """team -> d_i^l."""
        return {fp.team: fp.size for fp in self.teams}

    @property
    def total_size(self) -> int:
        """d_i."""
        return sum(fp.size for fp in self.teams)

    def assemble(self, team_states: Dict[int, np.ndarray]) -> np.ndarray:
        """
        Footprint vector y from the team states z_l (stacks allowed).

        Args:
            team_states: team -> z_l (last axis n_l)

        Returns:
            y with its last axis in footprint order
        """
        parts = {fp.team: fp.selection.apply(team_states[fp.team]) for fp in self.teams}
        first = next(iter(parts.values()))
        y = np.zeros(first.shape[:-1] + (self.total_size,))
        for fp in self.teams:
            y[..., list(fp.positions)] = parts[fp.team]
        return y


def selection_for_team(partition: TeamPartition, team: int) -> SelectionMatrix:
    """
    E_l: z_l = E_l x, team coordinates in agent-id order.

    Raises:
        PartitionError: On an invalid team index
    """
    if not 1 <= team <= partition.team_count:
        raise PartitionError(f"team index {team} out of range 1..{partition.team_count}")
    columns = tuple(
        partition.global_index(agent, component) for agent, component in partition.team_coordinates(team)
    )
    return SelectionMatrix(columns, partition.state_dim)


def global_permutation(partition: TeamPartition) -> SelectionMatrix:
    """A with x = A z, z = (z_1, ..., z_v); A @ stack(E_l) is the identity."""
    stacked = SelectionMatrix.stack(
        [selection_for_team(partition, team) for team in range(1, partition.team_count + 1)]
    )
    return stacked.inverse()


def footprint_selection(predicate: PredicateFunction, partition: TeamPartition) -> FootprintSelection:
    """
    B_i^l, d_i^l and J_q^l for every team the predicate reads.

    Raises:
        DimensionError: When a footprint coordinate names an unknown agent or component
    """
    by_team: Dict[int, List[Tuple[int, int]]] = {}
    for position, (agent, component) in enumerate(predicate.footprint):
        if agent not in partition.agent_ids:
            raise DimensionError(f"footprint names unknown agent {agent}")
        team = partition.team_of(agent)
        by_team.setdefault(team, []).append((partition.team_index(team, agent, component), position))

    teams = []
    for team in sorted(by_team):
        entries = sorted(by_team[team])
        selection = SelectionMatrix(tuple(col for col, _ in entries), partition.team_dim(team))
        teams.append(TeamFootprint(team, selection, tuple(pos for _, pos in entries)))
    return FootprintSelection(tuple(teams))
