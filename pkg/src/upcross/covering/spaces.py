"""Exact point-set geometry for balls.

Two interchangeable backends answer the same questions (sizes, inclusion,
intersection, union measure) exactly:

``CayleySpace``
    Enumerates ball point sets from a :class:`~upcross.cayley.NormTable`.
    Works for every group model, but only inside the tabulated window.

``BoxSpace``
    Z^d with the box generating set, where ``B(x, n)`` is exactly the
    integer box ``x + [-n, n]^d``.  Balls are handled as boxes, so radii can
    be arbitrarily large (towers meeting the effective Vitali hypotheses
    need radii far beyond any enumerable window).

Neither backend uses the triangle inequality as a shortcut: inclusion and
disjointness are decided on the actual point sets.
"""

from __future__ import annotations

import functools
from typing import Iterable, Sequence

import numpy as np

from ..cayley import ZD_BOX, NormTable
from .balls import Ball

_CACHE_LIMIT = 200_000


class CayleySpace:
    """Ball geometry backed by an enumerated norm table."""

    def __init__(self, table: NormTable):
        self.table = table
        self.model = table.model
        self.dim = table.model.dim
        self._points: dict[tuple, np.ndarray] = {}

    def __repr__(self) -> str:
        return f"CayleySpace({self.table!r})"

    @property
    def scan_limit(self) -> int:
        return self.table.max_radius

    def radius_sizes(self, upto: int) -> np.ndarray:
        """|B(n)| for n = 0..upto."""
        return self.table.ball_sizes[: upto + 1]

    def ball_size(self, b: Ball) -> int:
        return self.table.size(b.int_radius)

    def points(self, b: Ball) -> np.ndarray:
        """Sorted table indices of the ball's points."""
        key = (b.center, b.int_radius)
        pts = self._points.get(key)
        if pts is None:
            if len(self._points) > _CACHE_LIMIT:
                self._points.clear()
            pts = np.sort(self.table.translate(b.int_radius, b.center))
            pts.setflags(write=False)
            self._points[key] = pts
        return pts

    def contains_point(self, b: Ball, x: Sequence[int]) -> bool:
        rel = self.model.multiply(x, self.model.inverse(b.center))
        idx = self.table.lookup(np.asarray([rel]))[0]
        return idx >= 0 and self.table.norms[idx] <= b.radius

    def contains(self, inner: Ball, outer: Ball) -> bool:
        if self.ball_size(inner) > self.ball_size(outer):
            return False
        return bool(np.isin(self.points(inner), self.points(outer), assume_unique=True).all())

    def contained(self, balls: Sequence[Ball], outer: Ball) -> np.ndarray:
        """:meth:`contains` for many balls at once.

        ``d(x, y) + r <= s`` settles ``B(x, r) ⊆ B(y, s)`` without point
        sets; the remaining balls get the exact point-set test.
        """
        out = np.zeros(len(balls), dtype=bool)
        if not len(balls):
            return out
        centers = np.array([b.center for b in balls], dtype=np.int64)
        inv = np.array([self.model.inverse(outer.center)], dtype=np.int64)
        idx = self.table.lookup(self.model.mul_rows(centers, np.repeat(inv, len(centers), axis=0)))
        radii = np.array([b.int_radius for b in balls], dtype=np.int64)
        near = idx >= 0
        out[near] = self.table.norms[idx[near]] + radii[near] <= outer.int_radius
        for i in np.flatnonzero(~out):
            out[i] = self.contains(balls[i], outer)
        return out

    def intersects(self, a: Ball, b: Ball) -> bool:
        return bool(np.isin(self.points(a), self.points(b), assume_unique=True).any())

    def measure(self, balls: Iterable[Ball]) -> int:
        arrays = [self.points(b) for b in balls]
        if not arrays:
            return 0
        return len(np.unique(np.concatenate(arrays)))

    def intersection_measure(self, a: Ball, balls: Iterable[Ball]) -> int:
        """|a ∩ ∪balls|."""
        arrays = [self.points(b) for b in balls]
        if not arrays:
            return 0
        return int(np.isin(self.points(a), np.concatenate(arrays)).sum())

    def pairwise_disjoint(self, balls: Sequence[Ball]) -> bool:
        return sum(self.ball_size(b) for b in balls) == self.measure(balls)

    def packer(self) -> _MaskPacker:
        return _MaskPacker(self)

    def diameter_lower_bound(self, n: int) -> int:
        """A certified lower bound on max d(y1, y2) over y1, y2 in B(n)."""
        if n == 0:
            return 0
        best = n  # the identity and any element of the sphere S(n)
        if 2 * n <= self.table.max_radius:
            sphere = self.table.coords[self.table.size(n - 1) : self.table.size(n)]
            # d(g, g^-1) = |g g|
            sq = self.table.lookup(self.model.mul_rows(sphere, sphere))
            best = max(best, int(self.table.norms[sq[sq >= 0]].max(initial=0)))
        return best


class _MaskPacker:
    """Greedy disjoint packing with an occupancy mask over the table."""

    def __init__(self, space: CayleySpace):
        self.space = space
        self.mask = np.zeros(len(space.table), dtype=bool)
        self.covered = 0

    def fits(self, b: Ball) -> bool:
        return not self.mask[self.space.points(b)].any()

    def add(self, b: Ball) -> None:
        pts = self.space.points(b)
        self.mask[pts] = True
        self.covered += len(pts)


class BoxSpace:
    """Z^d with the box generators; balls are integer boxes of any size."""

    def __init__(self, dim: int, scan_limit: int = 2000):
        if dim < 1:
            raise ValueError("dimension must be positive")
        self.dim = dim
        self.scan_limit = scan_limit

    def __repr__(self) -> str:
        return f"BoxSpace(dim={self.dim})"

    def _check(self, b: Ball) -> None:
        if len(b.center) != self.dim:
            raise ValueError(f"ball center {b.center} is not in Z^{self.dim}")

    def box(self, b: Ball) -> tuple[tuple[int, ...], tuple[int, ...]]:
        self._check(b)
        n = b.int_radius
        return tuple(c - n for c in b.center), tuple(c + n for c in b.center)

    def radius_sizes(self, upto: int) -> np.ndarray:
        n = np.arange(upto + 1, dtype=np.int64)
        return (2 * n + 1) ** self.dim

    def ball_size(self, b: Ball) -> int:
        self._check(b)
        return (2 * b.int_radius + 1) ** self.dim

    def contains_point(self, b: Ball, x: Sequence[int]) -> bool:
        self._check(b)
        return max(abs(int(a) - c) for a, c in zip(x, b.center)) <= b.radius

    def contains(self, inner: Ball, outer: Ball) -> bool:
        (ilo, ihi), (olo, ohi) = self.box(inner), self.box(outer)
        return all(o <= i for i, o in zip(ilo, olo)) and all(i <= o for i, o in zip(ihi, ohi))

    def contained(self, balls: Sequence[Ball], outer: Ball) -> np.ndarray:
        return np.array([self.contains(b, outer) for b in balls], dtype=bool)

    def intersects(self, a: Ball, b: Ball) -> bool:
        (alo, ahi), (blo, bhi) = self.box(a), self.box(b)
        return all(max(x, y) <= min(u, v) for x, y, u, v in zip(alo, blo, ahi, bhi))

    def measure(self, balls: Iterable[Ball]) -> int:
        return _union_volume([self.box(b) for b in balls], self.dim)

    def intersection_measure(self, a: Ball, balls: Iterable[Ball]) -> int:
        alo, ahi = self.box(a)
        clipped = []
        for b in balls:
            lo, hi = self.box(b)
            lo = tuple(max(x, y) for x, y in zip(lo, alo))
            hi = tuple(min(x, y) for x, y in zip(hi, ahi))
            if all(x <= y for x, y in zip(lo, hi)):
                clipped.append((lo, hi))
        return _union_volume(clipped, self.dim)

    def pairwise_disjoint(self, balls: Sequence[Ball]) -> bool:
        balls = list(balls)
        for i in range(len(balls)):
            for j in range(i + 1, len(balls)):
                if self.intersects(balls[i], balls[j]):
                    return False
        return True

    def packer(self) -> _BoxPacker:
        return _BoxPacker(self)

    def diameter_lower_bound(self, n: int) -> int:
        return 2 * n


class _BoxPacker:
    def __init__(self, space: BoxSpace):
        self.space = space
        self.placed: list[Ball] = []
        self.covered = 0

    def fits(self, b: Ball) -> bool:
        return not any(self.space.intersects(b, p) for p in self.placed)

    def add(self, b: Ball) -> None:
        self.placed.append(b)
        self.covered += self.space.ball_size(b)


def _union_volume(boxes: list[tuple[tuple[int, ...], tuple[int, ...]]], dim: int) -> int:
    """Number of lattice points in a union of closed integer boxes (coordinate compression)."""
    if not boxes:
        return 0
    axes = []
    for k in range(dim):
        cuts = sorted({lo[k] for lo, _ in boxes} | {hi[k] + 1 for _, hi in boxes})
        axes.append(cuts)
    shape = tuple(len(c) - 1 for c in axes)
    grid = np.zeros(shape, dtype=bool)
    pos = [{v: i for i, v in enumerate(c)} for c in axes]
    for lo, hi in boxes:
        grid[tuple(slice(pos[k][lo[k]], pos[k][hi[k] + 1]) for k in range(dim))] = True
    # object dtype keeps cell volumes exact for huge boxes
    vol = np.array([b - a for a, b in zip(axes[0], axes[0][1:])], dtype=object)
    for c in axes[1:]:
        vol = np.multiply.outer(vol, np.array([b - a for a, b in zip(c, c[1:])], dtype=object))
    return int(vol[grid].sum())


@functools.lru_cache(maxsize=32)
def _space_for_table(table: NormTable) -> CayleySpace:
    return CayleySpace(table)


def as_space(obj) -> CayleySpace | BoxSpace:
    """Accept a norm table or a ready geometry."""
    if isinstance(obj, (CayleySpace, BoxSpace)):
        return obj
    if isinstance(obj, NormTable):
        return _space_for_table(obj)
    raise TypeError(f"expected a NormTable or a ball geometry, got {type(obj).__name__}")


def box_space_for(model, scan_limit: int = 2000) -> BoxSpace:
    """Closed-form geometry for a Z^d box model (or Z^1 with either generating set)."""
    if model.kind == ZD_BOX or (model.dim == 1 and set(model.generators) == {(1,), (-1,)}):
        return BoxSpace(model.dim, scan_limit)
    raise ValueError(f"{model.label} balls are not boxes")
