"""Independent oracles and instance builders shared by the tests."""

from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np

from upcross.covering import Tower
from upcross.covering.constants import min_vitali_height


def brute_upcrossings(seq, alpha, beta) -> int:
    """Largest n with indexes i_1 < j_1 < ... < i_n < j_n, a_i < alpha, a_j > beta.

    Enumerates index subsequences directly.  Entries that are neither below
    alpha nor above beta can never be used, so they are dropped first.
    """
    marks = [("L" if a < alpha else "H") for a in seq if a < alpha or a > beta]
    for n in range(len(marks) // 2, 0, -1):
        for idx in itertools.combinations(range(len(marks)), 2 * n):
            if all(marks[i] == ("L" if t % 2 == 0 else "H") for t, i in enumerate(idx)):
                return n
    return 0


def z1_exact_probability(p: float, l: int, alpha: float, beta: float, k: int, start: int = 1) -> float:
    """P(at least k upcrossings) for running averages of bernoulli(p) over [-i, i], by enumeration."""
    width = 2 * l + 1
    total = 0.0
    for bits in itertools.product((0, 1), repeat=width):
        # bits[j] is the value at site j - l
        seq = [sum(bits[l - i : l + i + 1]) / (2 * i + 1) for i in range(start, l + 1)]
        if brute_upcrossings(seq, alpha, beta) >= k:
            ones = sum(bits)
            total += p**ones * (1 - p) ** (width - ones)
    return total


def expanding_tower(rng: np.random.Generator, dim: int, n_base: int, eps, q: int, r_min: int, spread: int) -> Tower:
    """Centered tower meeting the effective Vitali hypotheses.

    The tower is ``(1 + 36q/eps)``-expanding, so each radius is at least
    ``2 + 36q/eps`` times the one below; the height is the least admissible.
    """
    factor = 2 + Fraction(36 * q) / Fraction(eps)
    height = math.ceil(min_vitali_height(eps, q))
    base = set()
    while len(base) < n_base:
        base.add(tuple(int(v) for v in rng.integers(-spread, spread + 1, dim)))
    radii = {}
    for x in sorted(base):
        r = int(rng.integers(r_min, r_min + 20))
        chain = [r]
        for _ in range(height - 1):
            r = math.ceil(factor * r) + int(rng.integers(0, 3))
            chain.append(r)
        radii[x] = chain
    return Tower.centered(radii)


def random_decomposition(rng: np.random.Generator, space, center, n: int, tries: int = 30):
    """Random disjoint balls inside ``B(center, n)`` and the table indices of the leftover points.

    ``space`` must be a table-backed geometry (its ``points`` are table indices).
    """
    from upcross.covering import Ball

    target = Ball(center, n)
    idx = space.points(target)
    packer = space.packer()
    balls = []
    for _ in range(tries):
        c = tuple(int(v) for v in space.table.coords[idx[int(rng.integers(len(idx)))]])
        b = Ball(c, int(rng.integers(0, max(1, n // 2) + 1)))
        if space.contains(b, target) and packer.fits(b):
            packer.add(b)
            balls.append(b)
    used = np.concatenate([space.points(b) for b in balls]) if balls else np.array([], dtype=np.int64)
    return balls, np.setdiff1d(idx, used)
