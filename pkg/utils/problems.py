"""
Benchmark suite.
ZDT and UF (CEC 2009 unconstrained) problem definitions with true Pareto-front samplers.
"""
import logging
import math
from collections.abc import Callable
from dataclasses import dataclass
from functools import partial

import numpy as np

from models.problem import ProblemSpec
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

DEFAULT_PF_SAMPLES = 10000

ZDT3_SEGMENTS = (
    (0.0, 0.0830015349),
    (0.1822287280, 0.2577623634),
    (0.4093136748, 0.4538821041),
    (0.6183967944, 0.6525117038),
    (0.8233317983, 0.8518328654),
)
# Segment starts sit where the curve crosses back below the previous minimum.
ZDT3_SEGMENT_NUDGE = 1e-6
ZDT6_MIN_F1 = 0.2807753191


@dataclass(frozen=True)
class SuiteEntry:
    """
    Registered problem.

    Schema:
        name: str - canonical name
        default_d: int - decision dimension used when none is given
        M: int - objective count
        min_d: int - smallest dimension the definition supports
        build: (d) -> ProblemSpec
    """
    name: str
    default_d: int
    M: int  # pylint: disable=invalid-name
    min_d: int
    build: Callable[[int], ProblemSpec]

    def to_json(self) -> dict:
        return {'name': self.name, 'd': self.default_d, 'M': self.M}


# ZDT

def _zdt_g(x: np.ndarray) -> float:
    return 1.0 + 9.0 * float(np.sum(x[1:])) / (x.size - 1)


def zdt1(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    g = _zdt_g(x)
    return np.array([f1, g * (1.0 - math.sqrt(f1 / g))])


def zdt2(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    g = _zdt_g(x)
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


def zdt3(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    g = _zdt_g(x)
    h = 1.0 - math.sqrt(f1 / g) - (f1 / g) * math.sin(10.0 * math.pi * f1)
    return np.array([f1, g * h])


def zdt4(x: np.ndarray) -> np.ndarray:
    f1 = x[0]
    tail = x[1:]
    g = 1.0 + 10.0 * tail.size + float(np.sum(tail ** 2 - 10.0 * np.cos(4.0 * math.pi * tail)))
    return np.array([f1, g * (1.0 - math.sqrt(f1 / g))])


def zdt6(x: np.ndarray) -> np.ndarray:
    f1 = 1.0 - math.exp(-4.0 * x[0]) * math.sin(6.0 * math.pi * x[0]) ** 6
    g = 1.0 + 9.0 * (float(np.sum(x[1:])) / (x.size - 1)) ** 0.25
    return np.array([f1, g * (1.0 - (f1 / g) ** 2)])


def _convex_front(n: int) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, n)
    return np.column_stack([f1, 1.0 - np.sqrt(f1)])


def _concave_front(n: int, start: float = 0.0) -> np.ndarray:
    f1 = np.linspace(start, 1.0, n)
    return np.column_stack([f1, 1.0 - f1 ** 2])


def _linear_front(n: int) -> np.ndarray:
    f1 = np.linspace(0.0, 1.0, n)
    return np.column_stack([f1, 1.0 - f1])


def _split_counts(lengths: list[float], n: int) -> list[int]:
    """Share n points across segments in proportion to their lengths, at least one each."""
    n = max(n, len(lengths))
    total = sum(lengths)
    counts = [max(1, int(round(n * length / total))) for length in lengths]
    counts[int(np.argmax(lengths))] += n - sum(counts)
    return counts


def _zdt3_front(n: int) -> np.ndarray:
    segments = [
        (start + (ZDT3_SEGMENT_NUDGE if index else 0.0), end)
        for index, (start, end) in enumerate(ZDT3_SEGMENTS)
    ]
    counts = _split_counts([end - start for start, end in segments], n)
    f1 = np.concatenate([np.linspace(start, end, count) for (start, end), count in zip(segments, counts)])
    return np.column_stack([f1, 1.0 - np.sqrt(f1) - f1 * np.sin(10.0 * math.pi * f1)])


def _zdt_spec(name: str, evaluator, pf_sampler, d: int, tail_bound: float = 1.0) -> ProblemSpec:
    lower = np.zeros(d)
    upper = np.ones(d)
    if tail_bound != 1.0:
        lower[1:] = -tail_bound
        upper[1:] = tail_bound
    return ProblemSpec(name, d, 2, lower, upper, evaluator, pf_sampler)


# UF (CEC 2009)

def _uf_index_sets(d: int, objectives: int) -> list[np.ndarray]:
    """0-based positions of the variable index sets J_1..J_M (1-based j, grouped by parity or residue mod 3)."""
    j = np.arange(1, d + 1)
    if objectives == 2:
        return [np.flatnonzero((j >= 2) & (j % 2 == 1)), np.flatnonzero((j >= 2) & (j % 2 == 0))]
    return [
        np.flatnonzero((j >= 3) & ((j - 1) % 3 == 0)),
        np.flatnonzero((j >= 3) & ((j - 2) % 3 == 0)),
        np.flatnonzero((j >= 3) & (j % 3 == 0)),
    ]


def _uf_shift(x: np.ndarray) -> np.ndarray:
    """y_j = x_j - sin(6 pi x_1 + j pi / n)."""
    d = x.size
    j = np.arange(1, d + 1)
    return x - np.sin(6.0 * math.pi * x[0] + j * math.pi / d)


def _uf3d_shift(x: np.ndarray) -> np.ndarray:
    """y_j = x_j - 2 x_2 sin(2 pi x_1 + j pi / n)."""
    d = x.size
    j = np.arange(1, d + 1)
    return x - 2.0 * x[1] * np.sin(2.0 * math.pi * x[0] + j * math.pi / d)


def _squares(y: np.ndarray, index: np.ndarray) -> float:
    return 2.0 * float(np.mean(y[index] ** 2))


def _cosine_product_term(y: np.ndarray, index: np.ndarray) -> float:
    """2/|J| (4 sum y^2 - 2 prod cos(20 y pi / sqrt(j)) + 2)."""
    values = y[index]
    j = index + 1
    total = 4.0 * np.sum(values ** 2) - 2.0 * np.prod(np.cos(20.0 * values * math.pi / np.sqrt(j))) + 2.0
    return 2.0 * float(total) / index.size


def uf1(x: np.ndarray) -> np.ndarray:
    j1, j2 = _uf_index_sets(x.size, 2)
    y = _uf_shift(x)
    return np.array([x[0] + _squares(y, j1), 1.0 - math.sqrt(x[0]) + _squares(y, j2)])


def uf2(x: np.ndarray) -> np.ndarray:
    d = x.size
    j1, j2 = _uf_index_sets(d, 2)
    j = np.arange(1, d + 1)
    x1 = x[0]
    amplitude = 0.3 * x1 ** 2 * np.cos(24.0 * math.pi * x1 + 4.0 * j * math.pi / d) + 0.6 * x1
    angle = 6.0 * math.pi * x1 + j * math.pi / d
    y = np.where(j % 2 == 1, x - amplitude * np.cos(angle), x - amplitude * np.sin(angle))
    return np.array([x1 + _squares(y, j1), 1.0 - math.sqrt(x1) + _squares(y, j2)])


def uf3(x: np.ndarray) -> np.ndarray:
    d = x.size
    j1, j2 = _uf_index_sets(d, 2)
    j = np.arange(1, d + 1)
    y = x.copy()
    y[1:] = x[1:] - x[0] ** (0.5 * (1.0 + 3.0 * (j[1:] - 2) / (d - 2)))
    return np.array([
        x[0] + _cosine_product_term(y, j1),
        1.0 - math.sqrt(x[0]) + _cosine_product_term(y, j2),
    ])


def uf4(x: np.ndarray) -> np.ndarray:
    j1, j2 = _uf_index_sets(x.size, 2)
    y = _uf_shift(x)
    h = np.abs(y) / (1.0 + np.exp(2.0 * np.abs(y)))
    return np.array([
        x[0] + 2.0 * float(np.mean(h[j1])),
        1.0 - x[0] ** 2 + 2.0 * float(np.mean(h[j2])),
    ])


UF5_SEGMENTS = 10
UF6_SEGMENTS = 2
UF_EPSILON = 0.1


def uf5(x: np.ndarray) -> np.ndarray:
    j1, j2 = _uf_index_sets(x.size, 2)
    y = _uf_shift(x)
    h = 2.0 * y ** 2 - np.cos(4.0 * math.pi * y) + 1.0
    ripple = (0.5 / UF5_SEGMENTS + UF_EPSILON) * abs(math.sin(2.0 * UF5_SEGMENTS * math.pi * x[0]))
    return np.array([
        x[0] + ripple + 2.0 * float(np.mean(h[j1])),
        1.0 - x[0] + ripple + 2.0 * float(np.mean(h[j2])),
    ])


def uf6(x: np.ndarray) -> np.ndarray:
    j1, j2 = _uf_index_sets(x.size, 2)
    y = _uf_shift(x)
    ripple = max(0.0, 2.0 * (0.5 / UF6_SEGMENTS + UF_EPSILON) * math.sin(2.0 * UF6_SEGMENTS * math.pi * x[0]))
    return np.array([
        x[0] + ripple + _cosine_product_term(y, j1),
        1.0 - x[0] + ripple + _cosine_product_term(y, j2),
    ])


def uf7(x: np.ndarray) -> np.ndarray:
    j1, j2 = _uf_index_sets(x.size, 2)
    y = _uf_shift(x)
    root = x[0] ** 0.2
    return np.array([root + _squares(y, j1), 1.0 - root + _squares(y, j2)])


def uf8(x: np.ndarray) -> np.ndarray:
    j1, j2, j3 = _uf_index_sets(x.size, 3)
    y = _uf3d_shift(x)
    a = 0.5 * math.pi * x[0]
    b = 0.5 * math.pi * x[1]
    return np.array([
        math.cos(a) * math.cos(b) + _squares(y, j1),
        math.cos(a) * math.sin(b) + _squares(y, j2),
        math.sin(a) + _squares(y, j3),
    ])


def uf9(x: np.ndarray) -> np.ndarray:
    j1, j2, j3 = _uf_index_sets(x.size, 3)
    y = _uf3d_shift(x)
    bump = max(0.0, (1.0 + UF_EPSILON) * (1.0 - 4.0 * (2.0 * x[0] - 1.0) ** 2))
    return np.array([
        0.5 * (bump + 2.0 * x[0]) * x[1] + _squares(y, j1),
        0.5 * (bump - 2.0 * x[0] + 2.0) * x[1] + _squares(y, j2),
        1.0 - x[1] + _squares(y, j3),
    ])


def uf10(x: np.ndarray) -> np.ndarray:
    j1, j2, j3 = _uf_index_sets(x.size, 3)
    y = _uf3d_shift(x)
    h = 4.0 * y ** 2 - np.cos(8.0 * math.pi * y) + 1.0
    a = 0.5 * math.pi * x[0]
    b = 0.5 * math.pi * x[1]
    return np.array([
        math.cos(a) * math.cos(b) + 2.0 * float(np.mean(h[j1])),
        math.cos(a) * math.sin(b) + 2.0 * float(np.mean(h[j2])),
        math.sin(a) + 2.0 * float(np.mean(h[j3])),
    ])


def _uf5_front(n: int) -> np.ndarray:  # pylint: disable=unused-argument
    """The 2N + 1 isolated points; the front has no more to offer."""
    f1 = np.arange(2 * UF5_SEGMENTS + 1) / (2 * UF5_SEGMENTS)
    return np.column_stack([f1, 1.0 - f1])


def _uf6_front(n: int) -> np.ndarray:
    segments = [
        ((2 * i - 1) / (2 * UF6_SEGMENTS), (2 * i) / (2 * UF6_SEGMENTS))
        for i in range(1, UF6_SEGMENTS + 1)
    ]
    counts = _split_counts([end - start for start, end in segments], n - 1)
    f1 = np.concatenate([[0.0]] + [np.linspace(start, end, count) for (start, end), count in zip(segments, counts)])
    return np.column_stack([f1, 1.0 - f1])


def _simplex_lattice(divisions: int) -> np.ndarray:
    """All (i, j, k) / H with i + j + k = H."""
    points = [
        (i, j, divisions - i - j)
        for i in range(divisions + 1)
        for j in range(divisions + 1 - i)
    ]
    return np.array(points, dtype=float) / divisions


def _closest_lattice(n: int, keep=None) -> np.ndarray:
    """Simplex lattice whose (optionally filtered) size is closest to n."""
    best = None
    divisions = 1
    while True:
        lattice = _simplex_lattice(divisions)
        if keep is not None:
            lattice = lattice[keep(lattice)]
        if best is None or abs(len(lattice) - n) < abs(len(best) - n):
            best = lattice
        if len(lattice) >= n:
            return best
        divisions += 1


def _sphere_front(n: int) -> np.ndarray:
    lattice = _closest_lattice(n)
    return lattice / np.linalg.norm(lattice, axis=1, keepdims=True)


def _uf9_keep(lattice: np.ndarray) -> np.ndarray:
    # f1 / (f1 + f2) in [0, 1/4] or [3/4, 1]
    f1, f2 = lattice[:, 0], lattice[:, 1]
    return (3.0 * f1 <= f2 + 1e-12) | (f1 >= 3.0 * f2 - 1e-12)


def _uf9_front(n: int) -> np.ndarray:
    return _closest_lattice(n, keep=_uf9_keep)


def _uf_spec(name: str, evaluator, pf_sampler, d: int, objectives: int, lower_tail: float, upper_tail: float) -> ProblemSpec:
    lower = np.full(d, lower_tail)
    upper = np.full(d, upper_tail)
    lower[:objectives - 1] = 0.0
    upper[:objectives - 1] = 1.0
    return ProblemSpec(name, d, objectives, lower, upper, evaluator, pf_sampler)


SUITE: dict[str, SuiteEntry] = {
    entry.name: entry for entry in (
        SuiteEntry('ZDT1', 30, 2, 2, lambda d: _zdt_spec('ZDT1', zdt1, _convex_front, d)),
        SuiteEntry('ZDT2', 30, 2, 2, lambda d: _zdt_spec('ZDT2', zdt2, _concave_front, d)),
        SuiteEntry('ZDT3', 30, 2, 2, lambda d: _zdt_spec('ZDT3', zdt3, _zdt3_front, d)),
        SuiteEntry('ZDT4', 10, 2, 2, lambda d: _zdt_spec('ZDT4', zdt4, _convex_front, d, tail_bound=5.0)),
        SuiteEntry('ZDT6', 10, 2, 2, lambda d: _zdt_spec(
            'ZDT6', zdt6, partial(_concave_front, start=ZDT6_MIN_F1), d)),
        SuiteEntry('UF1', 30, 2, 3, lambda d: _uf_spec('UF1', uf1, _convex_front, d, 2, -1.0, 1.0)),
        SuiteEntry('UF2', 30, 2, 3, lambda d: _uf_spec('UF2', uf2, _convex_front, d, 2, -1.0, 1.0)),
        SuiteEntry('UF3', 30, 2, 3, lambda d: _uf_spec('UF3', uf3, _convex_front, d, 2, 0.0, 1.0)),
        SuiteEntry('UF4', 30, 2, 3, lambda d: _uf_spec(
            'UF4', uf4, _concave_front, d, 2, -2.0, 2.0)),
        SuiteEntry('UF5', 30, 2, 3, lambda d: _uf_spec('UF5', uf5, _uf5_front, d, 2, -1.0, 1.0)),
        SuiteEntry('UF6', 30, 2, 3, lambda d: _uf_spec('UF6', uf6, _uf6_front, d, 2, -1.0, 1.0)),
        SuiteEntry('UF7', 30, 2, 3, lambda d: _uf_spec('UF7', uf7, _linear_front, d, 2, -1.0, 1.0)),
        SuiteEntry('UF8', 30, 3, 5, lambda d: _uf_spec('UF8', uf8, _sphere_front, d, 3, -2.0, 2.0)),
        SuiteEntry('UF9', 30, 3, 5, lambda d: _uf_spec('UF9', uf9, _uf9_front, d, 3, -2.0, 2.0)),
        SuiteEntry('UF10', 30, 3, 5, lambda d: _uf_spec('UF10', uf10, _sphere_front, d, 3, -2.0, 2.0)),
    )
}


def suite_names() -> list[str]:
    """Registered problem names in canonical order."""
    return list(SUITE)


def _entry(name: str) -> SuiteEntry:
    entry = SUITE.get(str(name).strip().upper())
    if entry is None:
        raise ConfigurationError(
            f"Unknown problem '{name}'. Must be one of: {', '.join(suite_names())}"
        )
    return entry


def make_problem(name: str, d: int | None = None) -> ProblemSpec:
    """
    Build a suite problem by name (case-insensitive).

    Args:
        name: Problem name, e.g. "zdt1" or "UF10"
        d: Decision dimension, defaults to the suite convention

    Returns:
        ProblemSpec: The problem

    Raises:
        ConfigurationError: If the name is unknown or d is too small
    """
    entry = _entry(name)
    dimension = entry.default_d if d is None else int(d)
    if dimension < entry.min_d:
        raise ConfigurationError(f'{entry.name} needs at least {entry.min_d} decision variables, got {dimension}')
    return entry.build(dimension)


def true_pf_samples(name: str, n: int = DEFAULT_PF_SAMPLES) -> np.ndarray:
    """
    Sample the analytic Pareto front.

    Two-objective fronts are spaced evenly in f1 (disconnected fronts share
    points by segment length); three-objective fronts use the simplex lattice
    whose size is closest to n. UF5's front is its 21 isolated points.

    Args:
        name: Problem name
        n: Requested sample count (>= 2)

    Returns:
        np.ndarray: (k, M) mutually non-dominated objective vectors
    """
    if n < 2:
        raise ValueError(f'need at least 2 front samples, got {n}')
    entry = _entry(name)
    return entry.build(entry.min_d).pf_sampler(n)
