"""Counting upcrossings of real sequences."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_RADIUS_GRID = (0, 1, 2, 3, 4, 6, 8, 12, 16)


@dataclass(frozen=True)
class UpcrossingQuery:
    """Interval, upcrossing count, fill parameter and search caps.

    The radius sequence is ``S_{B(g, i)}`` for ``i = start_radius..l``;
    fill witnesses are searched for radii up to ``n_max`` using candidate
    sub-balls with radii from ``radius_grid``.  ``n_max=None`` disables the
    fill search.
    """

    alpha: float
    beta: float
    k: int = 1
    delta: float = 0.1
    l: int = 10
    n_max: int | None = None
    start_radius: int = 1
    radius_grid: tuple[int, ...] = field(default=DEFAULT_RADIUS_GRID)

    def __post_init__(self) -> None:
        problems = []
        if not self.alpha < self.beta:
            problems.append(f"alpha={self.alpha} must be below beta={self.beta}")
        if self.k < 1:
            problems.append("k must be at least 1")
        if not 0 < self.delta < 1:
            problems.append("delta must lie in (0, 1)")
        if self.l < self.start_radius:
            problems.append("l must be at least the first radius")
        if self.n_max is not None and self.n_max <= self.k:
            problems.append(f"n_max={self.n_max} must exceed k={self.k}")
        if any(r < 0 for r in self.radius_grid):
            problems.append("radius grid entries must be nonnegative")
        if problems:
            raise ValueError("; ".join(problems))
        object.__setattr__(self, "radius_grid", tuple(sorted(set(int(r) for r in self.radius_grid))))

    def with_k(self, k: int) -> UpcrossingQuery:
        return UpcrossingQuery(self.alpha, self.beta, k, self.delta, self.l, self.n_max, self.start_radius, self.radius_grid)

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "k": self.k,
            "delta": self.delta,
            "l": self.l,
            "n_max": self.n_max,
            "start_radius": self.start_radius,
            "radius_grid": list(self.radius_grid),
        }


def _check_interval(alpha: float, beta: float) -> None:
    if not alpha < beta:
        raise ValueError(f"need alpha < beta, got ({alpha}, {beta})")


def count_upcrossings(seq: Sequence[float], alpha: float, beta: float) -> int:
    """Number of upcrossings of ``(alpha, beta)``: a value below ``alpha``
    followed later by a value above ``beta``.  Both inequalities are strict.
    """
    _check_interval(alpha, beta)
    count = 0
    low = False
    for a in seq:
        if not low:
            low = a < alpha
        elif a > beta:
            count += 1
            low = False
    return count


def count_upcrossings_batch(rows: np.ndarray, alpha: float, beta: float) -> np.ndarray:
    """:func:`count_upcrossings` for every row of a 2-d array."""
    _check_interval(alpha, beta)
    rows = np.atleast_2d(np.asarray(rows, dtype=np.float64))
    count = np.zeros(len(rows), dtype=np.int64)
    low = np.zeros(len(rows), dtype=bool)
    for col in rows.T:
        up = low & (col > beta)
        count += up
        low = (low & ~up) | (~low & (col < alpha))
    return count
