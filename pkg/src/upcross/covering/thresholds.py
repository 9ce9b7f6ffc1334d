"""Radius thresholds found by scanning ball sizes.

Each threshold is the least integer radius ``s`` from which an inequality
between ball sizes holds at every scanned radius.  Radii are real numbers
but balls only see ``floor(r)``, so each check is written for the whole
interval ``[n, n + 1)`` of real radii with ``floor(r) = n``:

``s_prime``
    ``|B(3r)| < 3^(q+1) |B(r)|``, checked as ``|B(3n + 2)| < 3^(q+1) |B(n)|``.
``s_exp``
    ``|B(r)| >= (1 - eps/2) |B((1 + delta_v) r)|`` with ``delta_v = eps/(9q)``,
    checked against the largest integer below ``(1 + delta_v)(n + 1)``.
``s_star``
    some pair in ``B(r)`` at distance above ``2r/3``, checked as
    ``diam(B(n)) >= 2(n + 1)/3`` with a certified diameter lower bound.
``s_bang``
    ``|B(r1)| / |B(r2)| > 1 + t`` forces ``r1 / r2 > ((1+t)/(1+2t/3))^(1/q)``,
    checked in the worst case ``r1 = n1``, ``r2 -> n2 + 1``.

A threshold is left as ``None`` when the inequality still fails at the
last scanned radius, and its name is added to ``uncertified``.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from .balls import _as_exact
from .constants import radius_ratio_bound


@dataclass(frozen=True)
class ThresholdTable:
    group: str
    q: float
    eps: float
    delta: float
    scan_limit: int
    s_prime: int | None
    s_exp: int | None
    s_star: int | None
    s_bang: int | None
    uncertified: tuple[str, ...] = field(default=())

    @property
    def s_0(self) -> int | None:
        if self.s_prime is None or self.s_exp is None:
            return None
        return max(self.s_prime, self.s_exp)

    @property
    def s_1(self) -> int | None:
        parts = (self.s_0, self.s_star, self.s_bang)
        return None if None in parts else max(parts)

    @property
    def certified(self) -> bool:
        return not self.uncertified

    def as_dict(self) -> dict:
        out = asdict(self)
        out["uncertified"] = list(self.uncertified)
        out.update(s_0=self.s_0, s_1=self.s_1)
        return out


def _least_from(ok: np.ndarray, start: int) -> int | None:
    """Least ``s >= start`` with ``ok`` true on ``s..end``; ``ok[i]`` is radius ``start + i``."""
    if len(ok) == 0 or not ok[-1]:
        return None
    bad = np.flatnonzero(~ok)
    return start if len(bad) == 0 else start + int(bad[-1]) + 1


def vitali_threshold(space, q: float) -> int | None:
    """Least ``s`` with ``|B(3n + 2)| < 3^(q+1) |B(n)|`` for all scanned ``n >= s``."""
    top = (space.scan_limit - 2) // 3
    if top < 1:
        return None
    sizes = [int(v) for v in space.radius_sizes(space.scan_limit)]
    bound = 3 ** (q + 1)
    ok = np.array([sizes[3 * n + 2] < bound * sizes[n] for n in range(1, top + 1)])
    return _least_from(ok, 1)


def expansion_threshold(space, q: float, eps: float) -> int | None:
    """Threshold for ``(1 - eps/2)``-control of ``eps/(9q)``-expansions."""
    sizes = [int(v) for v in space.radius_sizes(space.scan_limit)]
    grow = 1 + _as_exact(eps) / (9 * Fraction(_as_exact(q)))
    keep = 1 - _as_exact(eps) / 2
    ok = []
    n = 1
    while True:
        m = math.ceil(grow * (n + 1)) - 1
        if m > space.scan_limit:
            break
        ok.append(keep * sizes[m] <= sizes[n])
        n += 1
    return _least_from(np.array(ok, dtype=bool), 1)


def distant_points_threshold(space) -> int | None:
    ok = np.array([3 * space.diameter_lower_bound(n) >= 2 * (n + 1) for n in range(1, space.scan_limit + 1)])
    return _least_from(ok, 1)


def radius_ratio_threshold(space, q: float, t: float) -> int | None:
    """Threshold below which a volume ratio above ``1 + t`` may come with too small a radius ratio."""
    N = space.scan_limit
    sizes = [int(v) for v in space.radius_sizes(N)]
    bound = radius_ratio_bound(t, q)
    grow = 1 + Fraction(_as_exact(t))
    ok = []
    for n2 in range(1, N):
        # smallest n1 whose ball is more than (1 + t) times B(n2); sizes are nondecreasing
        n1 = bisect.bisect_right(sizes, grow * sizes[n2])
        ok.append(n1 > N or n1 / (n2 + 1) >= bound)
    return _least_from(np.array(ok, dtype=bool), 1)


def compute_thresholds(space, q: float, eps: float, delta: float) -> ThresholdTable:
    """Scan the geometry for all thresholds at degree ``q``."""
    from .spaces import as_space

    space = as_space(space)
    values = {
        "s_prime": vitali_threshold(space, q),
        "s_exp": expansion_threshold(space, q, eps),
        "s_star": distant_points_threshold(space),
        "s_bang": radius_ratio_threshold(space, q, delta),
    }
    group = space.model.label if hasattr(space, "model") else f"Z^{space.dim}-box"
    return ThresholdTable(
        group=group,
        q=q,
        eps=eps,
        delta=delta,
        scan_limit=space.scan_limit,
        uncertified=tuple(k for k, v in values.items() if v is None),
        **values,
    )
