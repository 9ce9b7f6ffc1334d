"""Greedy Vitali selection and the effective Vitali covering of towers."""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable

from ..errors import DisjointnessError, GuaranteeError, PreconditionError, UncertifiedWarning
from .balls import Ball, BallCollection, Tower, _as_exact, delta_expansion, delta_interior, is_delta_expanding
from .constants import min_vitali_height, vitali_fraction
from .spaces import as_space
from .thresholds import expansion_threshold, vitali_threshold


def _collection(balls: Iterable[Ball]) -> BallCollection:
    return balls if isinstance(balls, BallCollection) else BallCollection(balls)


def require_disjoint(balls: BallCollection, space, what: str = "balls") -> None:
    if not space.pairwise_disjoint(balls):
        raise DisjointnessError(f"{what} are not pairwise disjoint")


def boundary_measure(balls: Iterable[Ball], delta: Real, space) -> tuple[int, int, int]:
    """Measures of the delta-interiors, the delta-boundaries and the union.

    The balls must be pairwise disjoint, so every measure is a sum over balls.
    """
    space = as_space(space)
    balls = _collection(balls)
    require_disjoint(balls, space)
    union = sum(space.ball_size(b) for b in balls)
    inner = sum(space.ball_size(delta_interior(b, delta)) for b in balls)
    return inner, union - inner, union


def maximal_balls(balls: Iterable[Ball], space) -> BallCollection:
    """The inclusion-maximal balls, in greedy order.

    Balls with identical point sets are kept once (the first in greedy order).
    """
    space = as_space(space)
    order = sorted(_collection(balls), key=lambda b: (-space.ball_size(b), b.sort_key()))
    kept: list[Ball] = []
    for b in order:
        # anything containing b is at least as large, so it was seen already
        if not any(space.contains(b, k) for k in kept):
            kept.append(b)
    return BallCollection(kept).sorted()


def finitary_vitali(balls: Iterable[Ball], space) -> BallCollection:
    """Greedy disjoint subcollection whose 3-fold enlargements cover every input ball.

    Balls are visited by radius descending, then by center; a ball is taken
    when it misses everything taken so far.
    """
    space = as_space(space)
    packer = space.packer()
    chosen = []
    for b in _collection(balls).sorted():
        if packer.fits(b):
            packer.add(b)
            chosen.append(b)
    return BallCollection(chosen)


@functools.lru_cache(maxsize=64)
def _s_prime(space, q) -> int | None:
    return vitali_threshold(space, q)


@functools.lru_cache(maxsize=64)
def _s_exp(space, q, eps) -> int | None:
    return expansion_threshold(space, q, eps)


def measured_vitali(balls: Iterable[Ball], q: float, space) -> BallCollection:
    """:func:`finitary_vitali`, with its ``3^-(q+1)`` coverage checked when it is guaranteed.

    The guarantee needs every radius to be at least the scanned threshold
    ``s'``; otherwise an :class:`UncertifiedWarning` is issued and coverage
    is not checked.
    """
    space = as_space(space)
    balls = _collection(balls)
    chosen = finitary_vitali(balls, space)
    if not balls:
        return chosen
    s_prime = _s_prime(space, q)
    if s_prime is None or balls.rad < s_prime:
        warnings.warn(
            f"radius {balls.rad} below the Vitali threshold {s_prime}; coverage not guaranteed",
            UncertifiedWarning,
            stacklevel=2,
        )
        return chosen
    covered = sum(space.ball_size(b) for b in chosen)
    total = space.measure(balls)
    if covered < vitali_fraction(q) * total:
        raise GuaranteeError(f"greedy selection covers {covered}/{total} < 3^-(q+1) at radius >= {s_prime}")
    return chosen


def vitali_cover_check(balls: Iterable[Ball], chosen: Iterable[Ball], space) -> list[Ball]:
    """Input balls not covered by the 3-fold enlargements of ``chosen`` (empty when the cover holds)."""
    space = as_space(space)
    big = [b.scale(3) for b in chosen]
    return [b for b in balls if space.intersection_measure(b, big) < space.ball_size(b)]


@dataclass(frozen=True)
class VitaliHypotheses:
    expanding: bool
    height: bool
    radius: bool | None
    nested: bool

    def failed(self) -> list[str]:
        out = []
        if not self.expanding:
            out.append("tower is not (1 + 36q/eps)-expanding")
        if not self.height:
            out.append("height below 1 + log_C(2/eps)")
        if not self.nested:
            out.append("chains are not nested towers")
        return out


def check_vitali_hypotheses(tower: Tower, eps: Real, q: float, space) -> VitaliHypotheses:
    space = as_space(space)
    factor = 1 + 36 * Fraction(_as_exact(q)) / _as_exact(eps)
    s_prime = _s_prime(space, q)
    s_exp = _s_exp(space, q, eps)
    s_0 = None if s_prime is None or s_exp is None else max(s_prime, s_exp)
    return VitaliHypotheses(
        expanding=is_delta_expanding(tower, factor, space),
        height=tower.height >= min_vitali_height(eps, q),
        radius=None if s_0 is None else tower.rad >= s_0,
        nested=not tower.validate(space),
    )


def effective_vitali(tower: Tower, eps: Real, q: float, space, *, check: bool = True) -> BallCollection:
    """Disjoint balls from ``tower`` covering at least ``1 - eps`` of the first-level union.

    Works from the top level down.  At each level the maximal balls that
    miss everything selected so far are passed to :func:`measured_vitali`.
    With ``check`` the expansion and height hypotheses are verified first;
    the coverage is asserted afterwards only if every radius also clears
    the scanned threshold ``s_0``.
    """
    space = as_space(space)
    guaranteed = False
    if check:
        hyp = check_vitali_hypotheses(tower, eps, q, space)
        if hyp.failed():
            raise PreconditionError("effective Vitali hypotheses fail", hyp.failed())
        guaranteed = bool(hyp.radius)
        if not guaranteed:
            warnings.warn("tower radius not above the certified threshold s_0", UncertifiedWarning, stacklevel=2)
    packer = space.packer()
    selected: list[Ball] = []
    with warnings.catch_warnings():
        if not check:
            warnings.simplefilter("ignore", UncertifiedWarning)
        for i in range(tower.height, 0, -1):
            free = [b for b in maximal_balls(tower.level(i), space) if packer.fits(b)]
            for b in measured_vitali(free, q, space):
                packer.add(b)
                selected.append(b)
    out = BallCollection(selected)
    if guaranteed:
        covered = sum(space.ball_size(b) for b in out)
        base = space.measure(tower.level(1))
        if covered < (1 - _as_exact(eps)) * base:
            raise GuaranteeError(f"effective Vitali selection covers {covered} < (1 - {eps}) * {base}")
    return out


def coverage_fraction(selected: Iterable[Ball], target: Iterable[Ball], space) -> Fraction:
    """``mu(union selected) / mu(union target)`` as an exact fraction."""
    space = as_space(space)
    return Fraction(space.measure(selected), space.measure(target))


def absorption_violations(tower: Tower, eps: Real, space) -> list[tuple[Ball, Ball]]:
    """Pairs ``(U, V)``, ``U`` on a lower level and ``V`` maximal on a higher one,
    where ``U`` meets ``V`` but is not inside the ``eps``-expansion of ``V``.

    Empty for every ``(1 + 4/eps)``-expanding tower.
    """
    space = as_space(space)
    bad = []
    tops = {j: maximal_balls(tower.level(j), space) for j in range(2, tower.height + 1)}
    for i in range(1, tower.height):
        for U in tower.level(i):
            for j in range(i + 1, tower.height + 1):
                for V in tops[j]:
                    if space.intersects(U, V) and not space.contains(U, delta_expansion(V, eps)):
                        bad.append((U, V))
    return bad

