"""Thinning an upcrossing ball chain into a pair of towers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from ..covering import Ball, Tower
from ..covering.constants import D_constant, radius_ratio_bound
from ..covering.spaces import as_space
from ..errors import PreconditionError


@dataclass(frozen=True)
class SpacedTowers:
    """Towers from every ``D``-th level of a chain after skipping ``k_skip`` levels."""

    U: Tower
    V: Tower
    D: int
    k_skip: int
    height: int
    ratio_bound: float


def upcrossing_radius_spacing(
    chain: Sequence[tuple[Ball, Ball]],
    q: float,
    delta: float,
    space,
    *,
    s_1: float = 0,
) -> SpacedTowers | None:
    """Turn ``U_1 ⊊ V_1 ⊊ ... ⊊ U_k ⊊ V_k`` (pairs ``(U_i, V_i)``, one center) into towers.

    Checks, on point sets: strictly growing cardinalities, radius steps of
    at least 2 between consecutive ``U`` (and ``V``) balls, and, on the kept
    levels, ``|V_i| / |U_i| > 1 + delta`` with the matching radius-ratio bound.
    Skips ``k' = max(ceil(s_1), ceil(k/2))`` levels and keeps
    ``U~_i = U_{k' + D(i-1) + 1}`` and ``V~_i = V_{k' + D i - 1}``.
    Returns ``None`` when fewer than one full block of ``D`` levels remains.
    """
    space = as_space(space)
    k = len(chain)
    if k == 0:
        raise PreconditionError("empty chain")
    centers = {b.center for pair in chain for b in pair}
    if len(centers) != 1:
        raise PreconditionError("chain balls must share one center")
    flat = [b for pair in chain for b in pair]
    sizes = [space.ball_size(b) for b in flat]
    failed = []
    for i in range(len(flat) - 1):
        if not sizes[i] < sizes[i + 1]:
            failed.append(f"|ball {i + 1}| = {sizes[i]} is not below |ball {i + 2}| = {sizes[i + 1]}")
    for i in range(k - 1):
        for j in (0, 1):
            if chain[i + 1][j].int_radius < chain[i][j].int_radius + 2:
                failed.append(f"radius step below 2 at level {i + 1}")
    if failed:
        raise PreconditionError("chain is not strictly increasing", failed)
    k_skip = max(math.ceil(s_1), math.ceil(k / 2))
    bound = radius_ratio_bound(delta, q)
    for i in range(k_skip, k):
        u, v = chain[i]
        if not space.ball_size(v) > (1 + delta) * space.ball_size(u):
            failed.append(f"|V_{i + 1}| / |U_{i + 1}| <= 1 + delta, so U_{i + 1} delta-fills V_{i + 1}")
        elif u.radius > 0 and not v.radius / u.radius > bound:
            failed.append(f"radius ratio at level {i + 1} not above {bound:.6f}")
    if failed:
        raise PreconditionError("chain violates the spacing argument", failed)
    D = D_constant(delta, q)
    height = (k - k_skip) // D
    if height < 1:
        return None
    g = next(iter(centers))
    u_chain = tuple(chain[k_skip + D * (i - 1)][0] for i in range(1, height + 1))
    v_chain = tuple(chain[k_skip + D * i - 2][1] for i in range(1, height + 1))
    return SpacedTowers(Tower({g: u_chain}), Tower({g: v_chain}), D, k_skip, height, bound)
