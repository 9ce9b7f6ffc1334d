"""The upcrossing event Q, the fill event R and the transference density."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..covering import Ball, BallCollection, find_delta_fill
from ..covering.spaces import as_space
from ..errors import WindowError
from ..processes import Field, ProcessSpec, profiles_at
from .counting import UpcrossingQuery, count_upcrossings, count_upcrossings_batch


@dataclass(frozen=True)
class FillEvent:
    """``B(g, n)`` has ``S > beta`` and is delta-filled by disjoint balls with ``S < alpha``."""

    center: tuple[int, ...]
    n: int
    fill: BallCollection


def radius_sequence(f: Field, spec: ProcessSpec, g: Sequence[int], first: int, last: int) -> np.ndarray:
    """``S_{B(g, i)}`` for ``i = first..last``."""
    return profiles_at(spec, f, np.asarray([g]), last)[0, first:]


def detect_Q(f: Field, spec: ProcessSpec, g: Sequence[int], query: UpcrossingQuery) -> bool:
    """Whether ``(S_{B(g, i)})_{i = start..l}`` has at least ``k`` upcrossings."""
    seq = radius_sequence(f, spec, g, query.start_radius, query.l)
    return count_upcrossings(seq, query.alpha, query.beta) >= query.k


def fill_ruled_out(spec: ProcessSpec, value: float, query: UpcrossingQuery, site_bound: float) -> bool:
    """Whether ``S_B = value`` already rules out a fill, by subadditivity.

    For a normalized subadditive statistic with ``0 <= S_{B(h,0)} <= site_bound``,
    a delta-fill by balls with ``S < alpha`` forces ``S_B < alpha + delta * site_bound``.
    """
    return spec.normalize and query.alpha >= 0 and value >= query.alpha + query.delta * site_bound


def _site_bound(f: Field, spec: ProcessSpec) -> float:
    return 1.0 if spec.base == "distinct" else f.dist.upper


def fill_candidates(f: Field, spec: ProcessSpec, g: Sequence[int], n: int, query: UpcrossingQuery) -> list[Ball]:
    """Balls ``B(h, r) ⊆ B(g, n)`` with ``S < alpha`` and ``r`` from the radius grid.

    Centers range over ``B(g, n - r)``, which keeps every candidate inside ``B(g, n)``.
    """
    table = f.table
    out = []
    for r in query.radius_grid:
        if r > n:
            break
        centers = table.coords[table.translate(n - r, g)]
        values = profiles_at(spec, f, centers, r)[:, r]
        out.extend(Ball(tuple(int(x) for x in c), r) for c in centers[values < query.alpha])
    return out


def _fill_at(f: Field, spec: ProcessSpec, g, n: int, value: float, query: UpcrossingQuery, prune: bool) -> FillEvent | None:
    if not value > query.beta:
        return None
    if prune and fill_ruled_out(spec, value, query, _site_bound(f, spec)):
        return None
    cands = fill_candidates(f, spec, g, n, query)
    fill = find_delta_fill(Ball(g, n), cands, query.delta, as_space(f.table))
    return None if fill is None else FillEvent(tuple(g), n, fill)


def _check_reach(f: Field, g, n_max: int) -> None:
    if f.table.norm(g) + n_max > f.window_radius:
        raise WindowError(f"fill search around {tuple(g)} up to radius {n_max} leaves the field window B({f.window_radius})")


def detect_R(f: Field, spec: ProcessSpec, g: Sequence[int], query: UpcrossingQuery, *, prune: bool = True) -> FillEvent | None:
    """First ``n`` in ``k+1..n_max`` where ``B(g, n)`` has ``S > beta`` and a found delta-fill.

    ``None`` means no fill was found; the search is greedy, so a fill may
    exist even then.  ``prune`` skips radii where a fill is impossible
    (see :func:`fill_ruled_out`); it never changes the result.
    """
    if query.n_max is None:
        raise ValueError("query has no fill search radius n_max")
    g = f.model.check(g)
    _check_reach(f, g, query.n_max)
    values = radius_sequence(f, spec, g, 0, query.n_max)
    for n in range(query.k + 1, query.n_max + 1):
        hit = _fill_at(f, spec, g, n, values[n], query, prune)
        if hit is not None:
            return hit
    return None


def largest_fill_radius(f: Field, spec: ProcessSpec, g: Sequence[int], query: UpcrossingQuery, *, prune: bool = True) -> int:
    """Largest ``n <= n_max`` with a found fill event at ``B(g, n)``, or 0.

    ``R^k`` holds exactly when this exceeds ``k``, so one search serves every ``k``.
    """
    g = f.model.check(g)
    _check_reach(f, g, query.n_max)
    values = radius_sequence(f, spec, g, 0, query.n_max)
    for n in range(query.n_max, 1, -1):
        if _fill_at(f, spec, g, n, values[n], query, prune) is not None:
            return n
    return 0


def transference_density(f: Field, spec: ProcessSpec, M: int, query: UpcrossingQuery, *, prune: bool = True) -> float:
    """Fraction of ``g`` in ``B(M)`` where Q holds and no fill event is found."""
    table = f.table
    reach = query.l if query.n_max is None else max(query.l, query.n_max)
    if M + reach > f.window_radius:
        raise WindowError(f"M + {reach} = {M + reach} exceeds the field window {f.window_radius}")
    centers = table.coords[: table.size(M)]
    seqs = profiles_at(spec, f, centers, query.l)[:, query.start_radius :]
    q_hit = count_upcrossings_batch(seqs, query.alpha, query.beta) >= query.k
    count = 0
    for c in centers[q_hit]:
        g = tuple(int(x) for x in c)
        if query.n_max is None or detect_R(f, spec, g, query, prune=prune) is None:
            count += 1
    return count / len(centers)


