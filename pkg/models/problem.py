"""
Problem model.
Box-constrained multi-objective minimization problems.
"""
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np

Evaluator = Callable[[np.ndarray], np.ndarray]
PfSampler = Callable[[int], np.ndarray]


@dataclass(frozen=True)
class ProblemSpec:
    """
    Problem definition.

    Schema:
        name: str - canonical problem name (e.g. "ZDT1")
        d: int - number of decision variables
        M: int - number of objectives
        lower: np.ndarray - lower bounds, length d
        upper: np.ndarray - upper bounds, length d
        evaluator: x -> F(x), deterministic
        pf_sampler: count -> (n, M) array of true Pareto-front points
    """
    name: str
    d: int
    M: int  # pylint: disable=invalid-name
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Evaluator
    pf_sampler: PfSampler

    def __post_init__(self):
        if self.d < 1 or self.M < 1:
            raise ValueError(f'{self.name}: d and M must be positive')
        if self.lower.shape != (self.d,) or self.upper.shape != (self.d,):
            raise ValueError(f'{self.name}: bounds must have length {self.d}')
        if not np.all(self.lower < self.upper):
            raise ValueError(f'{self.name}: lower bounds must be strictly below upper bounds')

    def clip(self, x: np.ndarray) -> np.ndarray:
        """Clip a decision vector into the box."""
        return np.clip(x, self.lower, self.upper)

    def contains(self, x: np.ndarray) -> bool:
        """True if every component lies within bounds."""
        return bool(np.all(x >= self.lower) and np.all(x <= self.upper))
