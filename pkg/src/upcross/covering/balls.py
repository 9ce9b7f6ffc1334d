"""Balls with explicit centers and radii, ball collections and towers.

A :class:`Ball` is always the pair (center, radius), never a bare point
set: interiors, expansions and scalings depend on the representation.
Radii may be ``int``, ``Fraction`` or ``float``; the interior/expansion
calculus runs in exact rational arithmetic (floats are read as the decimal
they print as), so no intermediate radius is rounded.  This matters for
towers whose radii grow by factors of several hundred per level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Iterable, Iterator, Mapping, Sequence

from ..errors import PreconditionError

Element = tuple[int, ...]


def _as_exact(x: Real) -> Real:
    # floats are read as the decimal they print as, so 0.2 means 1/5
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x}")
        return Fraction(repr(x))
    return x


def scale_radius(radius: Real, factor: Real) -> Real:
    """``factor * radius`` in exact rational arithmetic."""
    out = Fraction(_as_exact(factor)) * Fraction(_as_exact(radius))
    return out.numerator if out.denominator == 1 else out


@dataclass(frozen=True)
class Ball:
    center: Element
    radius: Real

    def __post_init__(self) -> None:
        object.__setattr__(self, "center", tuple(int(c) for c in self.center))
        if self.radius < 0:
            raise ValueError(f"negative radius {self.radius}")

    @property
    def int_radius(self) -> int:
        """Integer radius with the same point set (word norms are integers)."""
        return math.floor(self.radius)

    def interior(self, delta: Real) -> Ball:
        return delta_interior(self, delta)

    def expand(self, delta: Real) -> Ball:
        return delta_expansion(self, delta)

    def scale(self, t: Real) -> Ball:
        if t < 0:
            raise ValueError("scale factor must be nonnegative")
        return Ball(self.center, scale_radius(self.radius, t))

    def sort_key(self) -> tuple:
        """Radius descending, then lexicographic center."""
        return (-self.radius, self.center)

    def __repr__(self) -> str:
        return f"B({self.center}, {self.radius})"


def delta_interior(b: Ball, delta: Real) -> Ball:
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    return Ball(b.center, scale_radius(b.radius, 1 - _as_exact(delta)))


def delta_expansion(b: Ball, delta: Real) -> Ball:
    if delta < 0:
        raise ValueError(f"delta must be nonnegative, got {delta}")
    if delta == 0:
        return b
    return Ball(b.center, scale_radius(b.radius, 1 + _as_exact(delta)))


class BallCollection(Sequence[Ball]):
    """A finite, ordered list of balls with ``rad`` and ``core``."""

    def __init__(self, balls: Iterable[Ball] = ()):
        self._balls = tuple(balls)

    def __getitem__(self, i):
        if isinstance(i, slice):
            return BallCollection(self._balls[i])
        return self._balls[i]

    def __len__(self) -> int:
        return len(self._balls)

    def __iter__(self) -> Iterator[Ball]:
        return iter(self._balls)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, BallCollection):
            return self._balls == other._balls
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._balls)

    def __repr__(self) -> str:
        return f"BallCollection({list(self._balls)!r})"

    @property
    def rad(self) -> Real:
        if not self._balls:
            return math.inf
        return min(b.radius for b in self._balls)

    @property
    def core(self) -> set[Element]:
        return {b.center for b in self._balls}

    def sorted(self) -> BallCollection:
        return BallCollection(sorted(self._balls, key=Ball.sort_key))

    def interior(self, delta: Real) -> BallCollection:
        return BallCollection(b.interior(delta) for b in self._balls)

    def expand(self, delta: Real) -> BallCollection:
        return BallCollection(b.expand(delta) for b in self._balls)

    def scale(self, t: Real) -> BallCollection:
        return BallCollection(b.scale(t) for b in self._balls)


@dataclass(frozen=True)
class Tower:
    """Nested chains ``U_1(x) ⊆ ... ⊆ U_n(x)`` indexed by base points ``x``.

    Levels are numbered from 1.  Containment and ``x ∈ U_i(x)`` are not
    checked here because they need a geometry; see :meth:`validate`.
    """

    chains: Mapping[Element, tuple[Ball, ...]]
    base: tuple[Element, ...] = field(init=False)

    def __post_init__(self) -> None:
        chains = {tuple(int(c) for c in x): tuple(ch) for x, ch in self.chains.items()}
        heights = {len(ch) for ch in chains.values()}
        if len(heights) > 1:
            raise PreconditionError("tower chains have unequal heights", [f"heights {sorted(heights)}"])
        if heights == {0}:
            raise PreconditionError("tower chains are empty")
        object.__setattr__(self, "chains", chains)
        object.__setattr__(self, "base", tuple(sorted(chains)))

    @classmethod
    def centered(cls, radii: Mapping[Sequence[int], Sequence[Real]]) -> Tower:
        return cls({tuple(x): tuple(Ball(tuple(x), r) for r in rs) for x, rs in radii.items()})

    @property
    def height(self) -> int:
        if not self.chains:
            return 0
        return len(next(iter(self.chains.values())))

    @property
    def is_centered(self) -> bool:
        return all(b.center == x for x, ch in self.chains.items() for b in ch)

    def ball(self, x: Sequence[int], i: int) -> Ball:
        return self.chains[tuple(x)][i - 1]

    def level(self, i: int) -> BallCollection:
        if not 1 <= i <= self.height:
            raise IndexError(f"level {i} outside 1..{self.height}")
        return BallCollection(self.chains[x][i - 1] for x in self.base)

    def balls(self) -> BallCollection:
        return BallCollection(b for x in self.base for b in self.chains[x])

    @property
    def rad(self) -> Real:
        return self.balls().rad

    def upto(self, i: int) -> Tower:
        """The first ``i`` levels."""
        return Tower({x: ch[:i] for x, ch in self.chains.items()})

    def from_level(self, i: int) -> Tower:
        """Levels ``i..n``, renumbered from 1."""
        return Tower({x: ch[i - 1 :] for x, ch in self.chains.items()})

    def restrict(self, base: Iterable[Sequence[int]]) -> Tower:
        keep = {tuple(x) for x in base}
        return Tower({x: ch for x, ch in self.chains.items() if x in keep})

    def validate(self, space) -> list[str]:
        """Tower axioms checked on point sets; returns the violated clauses."""
        problems = []
        for x in self.base:
            chain = self.chains[x]
            for i, b in enumerate(chain, start=1):
                if not space.contains_point(b, x):
                    problems.append(f"{x} not in U_{i}({x})")
            for i in range(len(chain) - 1):
                if not space.contains(chain[i], chain[i + 1]):
                    problems.append(f"U_{i + 1}({x}) not inside U_{i + 2}({x})")
        return problems


def is_delta_expanding(tower: Tower, delta: Real, space=None) -> bool:
    """Whether ``U_i(x)^delta ⊆ U_{i+1}(x)`` for all x and i.

    Centered towers use the radius test ``(1 + delta) r_i <= r_{i+1}``;
    other towers need ``space`` for a point-set check.
    """
    if tower.is_centered:
        factor = 1 + _as_exact(delta)
        for chain in tower.chains.values():
            for lo, hi in zip(chain, chain[1:]):
                if scale_radius(lo.radius, factor) > hi.radius:
                    return False
        return True
    if space is None:
        raise ValueError("a non-centered tower needs a geometry to test expansion")
    for chain in tower.chains.values():
        for lo, hi in zip(chain, chain[1:]):
            if not space.contains(delta_expansion(lo, delta), hi):
                return False
    return True
