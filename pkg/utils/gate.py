"""
Adaptive LLM gate.
Scores the population with an auxiliary function and decides per generation
whether the LLM operator is invoked.
"""
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from models.individual import Population
from utils.nsga2 import FrontPartition

logger = logging.getLogger(__name__)

AuxiliaryFunction = Callable[[Population, FrontPartition], float]


def auxiliary_score(pop: Population, partition: FrontPartition) -> float:
    """
    Default auxiliary score: negated mean finite crowding plus mean front index.

    Returns -inf when no member has a finite crowding distance, which the gate
    treats as "do not invoke".

    Args:
        pop: Ranked and crowded population
        partition: Its front partition

    Returns:
        float: The score S, or -inf
    """
    crowding = np.array([member.crowding for member in pop.members], dtype=float)
    finite = crowding[np.isfinite(crowding)]
    if finite.size == 0:
        return -math.inf
    ranks = partition.ranks(len(pop))
    return float(-finite.mean() + ranks.mean())


@dataclass
class GateRecord:
    """One generation's gate outcome."""
    generation: int
    score: float
    delta: float
    invoked: bool


@dataclass
class GateState:
    """
    Gate memory for one run.

    Schema:
        delta: float - decision threshold (math.inf disables the LLM)
        prev_score: float - previous generation's score, 0.0 before the first
        history: list[GateRecord] - one record per elapsed generation
        auxiliary: AuxiliaryFunction - pluggable scoring function
    """
    delta: float
    prev_score: float = 0.0
    history: list[GateRecord] = field(default_factory=list)
    auxiliary: AuxiliaryFunction = auxiliary_score

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError(f'delta must be positive, got {self.delta}')

    def score(self, pop: Population, partition: FrontPartition) -> float:
        """Apply the configured auxiliary function."""
        return self.auxiliary(pop, partition)

    def would_invoke(self, score: float) -> bool:
        """Decision for a score without recording it."""
        if not (math.isfinite(score) and math.isfinite(self.prev_score)):
            return False
        return score - self.prev_score >= self.delta

    @property
    def invocations(self) -> int:
        return sum(1 for record in self.history if record.invoked)


def should_invoke_llm(state: GateState, score: float, generation: int | None = None) -> bool:
    """
    Threshold test S_t - S_{t-1} >= delta, then record and roll the score forward.

    Args:
        state: Gate state (updated in place)
        score: Current generation's auxiliary score
        generation: Generation number for the history record (defaults to its length + 1)

    Returns:
        bool: True if the LLM operator should be used this generation
    """
    invoked = state.would_invoke(score)
    record = GateRecord(
        generation=len(state.history) + 1 if generation is None else generation,
        score=score,
        delta=state.delta,
        invoked=invoked,
    )
    state.history.append(record)
    logger.debug(
        'Gate generation %s: score=%s prev=%s delta=%s invoked=%s',
        record.generation, score, state.prev_score, state.delta, invoked,
    )
    state.prev_score = score
    return invoked
