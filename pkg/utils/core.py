"""
Core primitives.
Seeded randomness, Pareto dominance, population initialization and evaluation.
"""
import logging

import numpy as np

from models.individual import Population
from models.problem import ProblemSpec
from utils.errors import EvaluationError

logger = logging.getLogger(__name__)


class RngStream:
    """
    Seedable 64-bit random stream owned by exactly one run.

    Identical seed plus identical draw sequence gives bit-identical output.
    """

    def __init__(self, seed: int):
        self.seed = int(seed)
        self._generator = np.random.Generator(np.random.PCG64(self.seed))

    def random(self, size=None):
        """Uniform draws on [0, 1)."""
        return self._generator.random(size)

    def uniform_open(self, size=None):
        """
        Uniform draws on the open interval (0, 1).

        Exact 0.0 draws are rejected and redrawn.
        """
        values = np.atleast_1d(self._generator.random(size))
        while np.any(values == 0.0):
            zeros = values == 0.0
            values[zeros] = self._generator.random(int(zeros.sum()))
        return values if size is not None else float(values[0])

    def integers(self, high: int, size=None):
        """Uniform integers on [0, high)."""
        return self._generator.integers(0, high, size=size)


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """
    Pareto dominance for minimization.

    Args:
        a: Objective vector
        b: Objective vector of the same length

    Returns:
        bool: True iff a is no worse than b everywhere and strictly better somewhere

    Raises:
        ValueError: If the vectors differ in length
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f'objective length mismatch: {a.shape} vs {b.shape}')
    return bool(np.all(a <= b) and np.any(a < b))


def initialize_population(spec: ProblemSpec, N: int, rng: RngStream) -> Population:  # pylint: disable=invalid-name
    """
    Uniform random initial population: x_ki = l_i + (u_i - l_i) * r_ki, r_ki in (0, 1).

    Args:
        spec: Problem definition
        N: Population size (>= 2)
        rng: The run's random stream

    Returns:
        Population: N unevaluated individuals, generation 0
    """
    if N < 2:
        raise ValueError(f'population size must be at least 2, got {N}')
    r = rng.uniform_open((N, spec.d))
    decisions = spec.lower + (spec.upper - spec.lower) * r
    population = Population(members=[])
    population.members = [population.spawn(x) for x in decisions]
    return population


def evaluate(spec: ProblemSpec, pop: Population, charge: bool = True) -> Population:
    """
    Evaluate every member that has no objective vector yet.

    Already-evaluated members are left untouched and are not recounted.

    Args:
        spec: Problem definition
        pop: Population to evaluate (members are updated in place)
        charge: Whether new evaluations count against the budget

    Returns:
        Population: The same population with evaluations_used updated

    Raises:
        EvaluationError: If the evaluator returns a non-finite value
    """
    fresh = 0
    for member in pop.members:
        if member.evaluated:
            continue
        values = np.asarray(spec.evaluator(member.x), dtype=float)
        if values.shape != (spec.M,) or not np.all(np.isfinite(values)):
            raise EvaluationError(
                f'{spec.name}: evaluator returned {values!r} for individual {member.id}',
                individual_id=member.id,
            )
        member.f = values
        fresh += 1
    if charge:
        pop.evaluations_used += fresh
    return pop
