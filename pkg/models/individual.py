"""
Individual and Population models.
Decision/objective vectors are numpy float64 arrays at full precision.
"""
import itertools
from dataclasses import dataclass, field

import numpy as np


@dataclass
class Individual:
    """
    One candidate solution.

    Schema:
        x: np.ndarray - decision vector, length d, inside the problem bounds
        f: np.ndarray | None - objective vector (length M) or None while unevaluated
        rank: int | None - 1-based front index, set by non-dominated sorting
        crowding: float | None - crowding distance (may be inf), set after rank
        id: int - unique within a run
    """
    x: np.ndarray
    id: int
    f: np.ndarray | None = None
    rank: int | None = None
    crowding: float | None = None

    @property
    def evaluated(self) -> bool:
        return self.f is not None

    def copy(self) -> 'Individual':
        """Return an independent copy keeping the same id."""
        return Individual(
            x=self.x.copy(),
            id=self.id,
            f=None if self.f is None else self.f.copy(),
            rank=self.rank,
            crowding=self.crowding,
        )


@dataclass
class Population:
    """
    Ordered multiset of individuals plus evaluation bookkeeping.

    Populations derived from one another (offspring, merged union, survivors)
    share a single id counter so ids stay unique for the whole run.
    """
    members: list[Individual]
    generation: int = 0
    evaluations_used: int = 0
    id_counter: itertools.count = field(default_factory=itertools.count, repr=False)

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, index: int) -> Individual:
        return self.members[index]

    def spawn(self, x: np.ndarray) -> Individual:
        """
        Create a fresh unevaluated individual with the next run-unique id.

        Args:
            x: Decision vector

        Returns:
            Individual: New individual (not added to members)
        """
        return Individual(x=np.asarray(x, dtype=float), id=next(self.id_counter))

    def derive(self, members: list[Individual], **overrides) -> 'Population':
        """
        Build a population that shares this one's id counter and bookkeeping.

        Args:
            members: Members of the new population
            **overrides: generation / evaluations_used replacements

        Returns:
            Population: The derived population
        """
        return Population(
            members=list(members),
            generation=overrides.get('generation', self.generation),
            evaluations_used=overrides.get('evaluations_used', self.evaluations_used),
            id_counter=self.id_counter,
        )

    def decisions(self) -> np.ndarray:
        """Decision vectors stacked as an (n, d) array."""
        return np.vstack([member.x for member in self.members])

    def objectives(self) -> np.ndarray:
        """
        Objective vectors stacked as an (n, M) array.

        Raises:
            ValueError: If any member is unevaluated
        """
        if any(member.f is None for member in self.members):
            raise ValueError('population contains unevaluated members')
        return np.vstack([member.f for member in self.members])
