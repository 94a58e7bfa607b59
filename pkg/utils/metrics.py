"""
Quality indicators.
Normalized hypervolume (exact for two and three objectives), a Monte-Carlo
hypervolume estimate, and inverted generational distance.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from utils.core import RngStream

REF_MULTIPLIER = 1.1


@dataclass(frozen=True)
class MetricContext:
    """
    Normalization frame for hypervolume.

    Schema:
        ideal: np.ndarray - per-objective minimum of the true front sample
        nadir: np.ndarray - per-objective maximum of the true front sample
        ref_multiplier: float - reference point coordinate in normalized space
    """
    ideal: np.ndarray
    nadir: np.ndarray
    ref_multiplier: float = REF_MULTIPLIER

    def __post_init__(self):
        if self.ideal.shape != self.nadir.shape:
            raise ValueError('ideal and nadir must have the same length')
        if not np.all(self.ideal < self.nadir):
            raise ValueError(f'ideal {self.ideal} must lie strictly below nadir {self.nadir}')

    @classmethod
    def from_pf(cls, pf: np.ndarray, ref_multiplier: float = REF_MULTIPLIER) -> 'MetricContext':
        pf = np.asarray(pf, dtype=float)
        return cls(ideal=pf.min(axis=0), nadir=pf.max(axis=0), ref_multiplier=ref_multiplier)

    @property
    def M(self) -> int:  # pylint: disable=invalid-name
        return int(self.ideal.size)

    @property
    def reference(self) -> np.ndarray:
        return np.full(self.M, self.ref_multiplier)

    def normalize(self, points: np.ndarray) -> np.ndarray:
        return (np.asarray(points, dtype=float) - self.ideal) / (self.nadir - self.ideal)


def nondominated(points: np.ndarray) -> np.ndarray:
    """
    Non-dominated subset, duplicates collapsed, first-occurrence order kept.

    Args:
        points: (n, M) objective vectors

    Returns:
        np.ndarray: (k, M) mutually non-dominated vectors
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        return points.reshape(0, points.shape[-1] if points.ndim == 2 else 0)
    _, first = np.unique(points, axis=0, return_index=True)
    points = points[np.sort(first)]
    no_worse = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    better = np.any(points[:, None, :] < points[None, :, :], axis=2)
    dominated = np.any(no_worse & better, axis=0)
    return points[~dominated]


def _area_2d(points: np.ndarray, reference: np.ndarray) -> float:
    """Exact dominated area of points strictly inside the reference box."""
    if len(points) == 0:
        return 0.0
    front = nondominated(points)
    front = front[np.argsort(front[:, 0], kind='stable')]
    right = np.append(front[1:, 0], reference[0])
    return float(np.sum((right - front[:, 0]) * (reference[1] - front[:, 1])))


def _volume_3d(points: np.ndarray, reference: np.ndarray) -> float:
    """Slab sweep along the third objective over exact 2D areas."""
    if len(points) == 0:
        return 0.0
    front = nondominated(points)
    levels = np.unique(front[:, 2])
    bounds = np.append(levels[1:], reference[2])
    volume = 0.0
    for level, upper in zip(levels, bounds):
        active = front[front[:, 2] <= level]
        volume += _area_2d(active[:, :2], reference[:2]) * (upper - level)
    return volume


def _surviving(points: np.ndarray, ctx: MetricContext) -> np.ndarray:
    points = np.asarray(points, dtype=float).reshape(-1, ctx.M)
    normalized = ctx.normalize(points)
    return normalized[np.all(normalized < ctx.reference, axis=1)]


def hypervolume(points: np.ndarray, ctx: MetricContext) -> float:
    """
    Normalized hypervolume.

    Points are mapped to (p - ideal) / (nadir - ideal); those not strictly
    dominating the reference point (1.1, ..., 1.1) are dropped, and the
    dominated volume is divided by the reference box volume 1.1^M.

    Args:
        points: (n, M) objective vectors
        ctx: Normalization frame

    Returns:
        float: HV in [0, 1] for points inside the ideal/reference box; 0.0 when none survive
    """
    if ctx.M not in (2, 3):
        raise ValueError(f'exact hypervolume supports 2 or 3 objectives, got {ctx.M}')
    normalized = _surviving(points, ctx)
    reference = ctx.reference
    if ctx.M == 2:
        volume = _area_2d(normalized, reference)
    else:
        volume = _volume_3d(normalized, reference)
    return volume / ctx.ref_multiplier ** ctx.M


def hypervolume_monte_carlo(
    points: np.ndarray,
    ctx: MetricContext,
    samples: int = 1_000_000,
    rng: RngStream | None = None,
) -> float:
    """
    Monte-Carlo estimate of the same normalized hypervolume.

    Samples uniformly from the box spanned by min(0, points) and the reference
    point and counts draws dominated by at least one surviving point.
    """
    rng = rng or RngStream(0)
    normalized = _surviving(points, ctx)
    if len(normalized) == 0:
        return 0.0
    reference = ctx.reference
    low = np.minimum(normalized.min(axis=0), 0.0)
    box_volume = float(np.prod(reference - low))
    hits = 0
    chunk = 100_000
    remaining = samples
    while remaining > 0:
        size = min(chunk, remaining)
        draws = low + (reference - low) * rng.random((size, ctx.M))
        covered = np.zeros(size, dtype=bool)
        for point in normalized:
            covered |= np.all(draws >= point, axis=1)
        hits += int(covered.sum())
        remaining -= size
    return box_volume * hits / samples / ctx.ref_multiplier ** ctx.M


def igd(points: np.ndarray, pf: np.ndarray) -> float:
    """
    Inverted generational distance: mean distance from each front sample to its
    nearest obtained point, in raw objective space.

    Args:
        points: (n, M) obtained objective vectors
        pf: (k, M) reference front sample, k >= 1

    Returns:
        float: IGD, or math.inf when there are no points
    """
    pf = np.asarray(pf, dtype=float)
    if len(pf) == 0:
        raise ValueError('reference front sample is empty')
    points = np.asarray(points, dtype=float).reshape(-1, pf.shape[1])
    if len(points) == 0:
        return math.inf
    return float(np.mean(np.min(cdist(pf, points), axis=1)))
