"""
NSGA-II backbone.
Non-dominated sorting, crowding distance, tournament selection, SBX,
polynomial mutation and environmental selection.
"""
from dataclasses import dataclass

import numpy as np

from models.individual import Individual, Population
from models.problem import ProblemSpec
from utils.core import RngStream


@dataclass(frozen=True)
class VariationParams:
    """
    Variation operator settings.

    Schema:
        sbx_eta: float - SBX distribution index
        mutation_prob_scale: float - per-variable mutation probability is this over d
        pm_eta: float - polynomial mutation distribution index
        crossover_prob: float - probability a parent pair undergoes crossover
        sbx_var_prob: float - per-variable crossover probability inside a pair
    """
    sbx_eta: float = 20.0
    mutation_prob_scale: float = 1.0
    pm_eta: float = 20.0
    crossover_prob: float = 1.0
    sbx_var_prob: float = 0.5

    def __post_init__(self):
        if self.sbx_eta <= 0 or self.pm_eta <= 0:
            raise ValueError('distribution indices must be positive')
        if self.mutation_prob_scale < 0:
            raise ValueError('mutation_prob_scale must be non-negative')
        if not 0.0 <= self.crossover_prob <= 1.0:
            raise ValueError('crossover_prob must be in [0, 1]')


@dataclass
class FrontPartition:
    """Fronts F_1..F_c as lists of member indices, best front first."""
    fronts: list[list[int]]

    def __len__(self) -> int:
        return len(self.fronts)

    def ranks(self, size: int) -> np.ndarray:
        """1-based front index per member."""
        ranks = np.zeros(size, dtype=int)
        for position, front in enumerate(self.fronts, start=1):
            ranks[front] = position
        return ranks


def domination_matrix(objectives: np.ndarray) -> np.ndarray:
    """
    Pairwise dominance: result[i, j] is True iff row i dominates row j.

    Args:
        objectives: (n, M) array

    Returns:
        np.ndarray: (n, n) boolean matrix
    """
    left = objectives[:, None, :]
    right = objectives[None, :, :]
    return np.all(left <= right, axis=2) & np.any(left < right, axis=2)


def fast_nondominated_sort(pop: Population) -> FrontPartition:
    """
    Partition the population into non-domination fronts and set each rank.

    Args:
        pop: Fully evaluated population

    Returns:
        FrontPartition: Fronts in order, each listing member indices ascending

    Raises:
        ValueError: If any member is unevaluated
    """
    objectives = pop.objectives()
    dominance = domination_matrix(objectives)
    domination_count = dominance.sum(axis=0)
    fronts = []
    current = np.flatnonzero(domination_count == 0)
    while current.size:
        fronts.append(current.tolist())
        domination_count = domination_count - dominance[current].sum(axis=0)
        domination_count[current] = -1
        current = np.flatnonzero(domination_count == 0)

    for position, front in enumerate(fronts, start=1):
        for index in front:
            pop.members[index].rank = position
    return FrontPartition(fronts=fronts)


def crowding_distance(pop: Population, partition: FrontPartition) -> Population:
    """
    Per-front crowding distance.

    Boundary members per objective get +inf. An objective whose values are all
    equal within a front contributes 0 to interior members.

    Args:
        pop: Ranked population (updated in place)
        partition: Its front partition

    Returns:
        Population: The same population with crowding set
    """
    objectives = pop.objectives()
    for front in partition.fronts:
        front_values = objectives[front]
        distance = np.zeros(len(front))
        for m in range(front_values.shape[1]):
            order = np.argsort(front_values[:, m], kind='stable')
            column = front_values[order, m]
            distance[order[0]] = np.inf
            distance[order[-1]] = np.inf
            span = column[-1] - column[0]
            if len(front) > 2 and span > 0:
                distance[order[1:-1]] += (column[2:] - column[:-2]) / span
        for index, value in zip(front, distance):
            pop.members[index].crowding = float(value)
    return pop


def rank_and_crowd(pop: Population) -> FrontPartition:
    """Sort the population and assign crowding; returns the partition."""
    partition = fast_nondominated_sort(pop)
    crowding_distance(pop, partition)
    return partition


def _better(a: Individual, b: Individual) -> Individual:
    """Crowded comparison: lower rank, then larger crowding, then lower id."""
    if a.rank != b.rank:
        return a if a.rank < b.rank else b
    if a.crowding != b.crowding:
        return a if a.crowding > b.crowding else b
    return a if a.id < b.id else b


def binary_tournament_select(pop: Population, rng: RngStream) -> Individual:
    """
    Binary tournament with replacement using the crowded comparison.

    Args:
        pop: Ranked and crowded population
        rng: Random stream

    Returns:
        Individual: The winning member
    """
    first, second = rng.integers(len(pop), size=2)
    return _better(pop.members[first], pop.members[second])


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    params: VariationParams,
    bounds: tuple[np.ndarray, np.ndarray],
    rng: RngStream,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Simulated binary crossover.

    Args:
        p1: First parent decision vector
        p2: Second parent decision vector
        params: Variation settings
        bounds: (lower, upper) arrays
        rng: Random stream

    Returns:
        tuple: Two children, clipped to bounds
    """
    lower, upper = bounds
    c1 = np.array(p1, dtype=float)
    c2 = np.array(p2, dtype=float)
    d = c1.size
    if rng.random() >= params.crossover_prob:
        return c1, c2

    u = rng.uniform_open(d)
    beta = np.where(
        u <= 0.5,
        np.power(2.0 * u, 1.0 / (params.sbx_eta + 1.0)),
        np.power(1.0 / (2.0 * (1.0 - u)), 1.0 / (params.sbx_eta + 1.0)),
    )
    crossed = rng.random(d) < params.sbx_var_prob
    swapped = rng.random(d) < 0.5

    mean = 0.5 * (c1 + c2)
    half_gap = 0.5 * (c1 - c2)
    child1 = np.where(crossed, mean + beta * half_gap, c1)
    child2 = np.where(crossed, mean - beta * half_gap, c2)
    child1, child2 = np.where(swapped, child2, child1), np.where(swapped, child1, child2)
    return np.clip(child1, lower, upper), np.clip(child2, lower, upper)


def polynomial_mutation(
    x: np.ndarray,
    params: VariationParams,
    bounds: tuple[np.ndarray, np.ndarray],
    rng: RngStream,
) -> np.ndarray:
    """
    Bounded polynomial mutation, each variable with probability tau / d.

    Args:
        x: Decision vector
        params: Variation settings
        bounds: (lower, upper) arrays
        rng: Random stream

    Returns:
        np.ndarray: Mutated copy, clipped to bounds
    """
    lower, upper = bounds
    y = np.array(x, dtype=float)
    d = y.size
    probability = params.mutation_prob_scale / d
    mutate = rng.random(d) < probability
    u = rng.random(d)
    if not mutate.any():
        return y

    span = upper - lower
    delta1 = (y - lower) / span
    delta2 = (upper - y) / span
    power = 1.0 / (params.pm_eta + 1.0)
    low_side = u < 0.5
    val_low = 2.0 * u + (1.0 - 2.0 * u) * np.power(1.0 - delta1, params.pm_eta + 1.0)
    val_high = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * np.power(1.0 - delta2, params.pm_eta + 1.0)
    delta_q = np.where(
        low_side,
        np.power(val_low, power) - 1.0,
        1.0 - np.power(val_high, power),
    )
    y = np.where(mutate, y + delta_q * span, y)
    return np.clip(y, lower, upper)


def reproduce(
    pool: list[Individual],
    pop: Population,
    spec: ProblemSpec,
    params: VariationParams,
    rng: RngStream,
) -> Population:
    """
    Pairwise SBX + polynomial mutation over a mating pool.

    Consecutive pool slots are paired; an odd final slot is paired with the
    first. Exactly len(pool) unevaluated children are produced.

    Args:
        pool: Mating pool
        pop: Parent population (supplies ids and bookkeeping)
        spec: Problem definition
        params: Variation settings
        rng: Random stream

    Returns:
        Population: Offspring population Q_t
    """
    bounds = (spec.lower, spec.upper)
    size = len(pool)
    children = []
    for start in range(0, size, 2):
        mate = pool[start + 1] if start + 1 < size else pool[0]
        c1, c2 = sbx_crossover(pool[start].x, mate.x, params, bounds, rng)
        children.append(polynomial_mutation(c1, params, bounds, rng))
        children.append(polynomial_mutation(c2, params, bounds, rng))
    return pop.derive([pop.spawn(x) for x in children[:size]])


def environmental_selection(union: Population, N: int) -> Population:  # pylint: disable=invalid-name
    """
    Survivor selection of N members from the merged population.

    Whole fronts are kept while they fit; the split front is cut by crowding
    descending, then lower id.

    Args:
        union: Evaluated merged population P_t + Q_t
        N: Survivor count

    Returns:
        Population: N survivors sharing the union's bookkeeping
    """
    partition = rank_and_crowd(union)
    survivors: list[Individual] = []
    for front in partition.fronts:
        members = [union.members[index] for index in front]
        if len(survivors) + len(members) <= N:
            survivors.extend(members)
            continue
        members.sort(key=lambda member: (-member.crowding, member.id))
        survivors.extend(members[:N - len(survivors)])
        break
    return union.derive(survivors)
