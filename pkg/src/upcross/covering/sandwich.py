"""Delta-fills and the tower-sandwich dichotomy."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Iterable

from ..errors import GuaranteeError, PreconditionError, UncertifiedWarning
from .balls import Ball, BallCollection, Tower, _as_exact, delta_expansion
from .constants import Delta_constant, min_sandwich_length
from .spaces import as_space
from .vitali import _collection, effective_vitali, maximal_balls, measured_vitali, require_disjoint


def check_delta_fill(target: Ball, parts: Iterable[Ball], delta: Real, space) -> bool:
    """Whether disjoint ``parts`` lie inside ``target`` and leave less than ``delta`` of it uncovered."""
    space = as_space(space)
    parts = _collection(parts)
    require_disjoint(parts, space, "fill parts")
    if not space.contained(list(parts), target).all():
        return False
    size = space.ball_size(target)
    uncovered = size - sum(space.ball_size(p) for p in parts)
    return uncovered < Fraction(_as_exact(delta)) * size


def find_delta_fill(target: Ball, candidates: Iterable[Ball], delta: Real, space) -> BallCollection | None:
    """Search for a disjoint subcollection of ``candidates`` that delta-fills ``target``.

    Greedy: largest candidates first, then a second pass adding smaller
    ones into whatever is left.  ``None`` means the search failed, not that
    no fill exists.
    """
    space = as_space(space)
    cands = list(_collection(candidates))
    inside = [c for c, ok in zip(cands, space.contained(cands, target)) if ok]
    if not inside:
        return None
    inside.sort(key=lambda b: (-space.ball_size(b), b.sort_key()))
    packer = space.packer()
    chosen: list[Ball] = []
    for b in inside:
        if packer.fits(b):
            packer.add(b)
            chosen.append(b)
    fill = BallCollection(chosen)
    if check_delta_fill(target, fill, delta, space):
        return fill
    taken = set(chosen)
    for b in reversed(inside):
        if b not in taken and packer.fits(b):
            packer.add(b)
            chosen.append(b)
    fill = BallCollection(chosen)
    return fill if check_delta_fill(target, fill, delta, space) else None


@dataclass(frozen=True)
class FillWitness:
    """A top ball and disjoint tower balls that fill it up to ``delta``."""

    ball: Ball
    parts: BallCollection
    delta: Real


@dataclass(frozen=True)
class GrowthCertificate:
    """``union_v >= required * union_u1`` established by exact counting."""

    union_v: int
    union_u1: int
    ratio: Fraction
    required: float


def sandwich_hypotheses(U: Tower, V: Tower, eps: Real, q: float, space) -> list[str]:
    """Violated hypotheses of the tower sandwich, as readable clauses."""
    space = as_space(space)
    failed = []
    if not (U.is_centered and V.is_centered):
        failed.append("towers must be centered")
    if U.base != V.base:
        failed.append("towers have different bases")
        return failed
    if U.height != V.height:
        failed.append(f"heights differ ({U.height} vs {V.height})")
        return failed
    L = U.height - 1
    if L < min_sandwich_length(eps, q):
        failed.append(f"L={L} < 2 log_C(4/eps)={min_sandwich_length(eps, q):.3f}")
    growth = Delta_constant(q) / Fraction(_as_exact(eps))
    for x in U.base:
        chain = [b for pair in zip(U.chains[x], V.chains[x]) for b in pair]
        if any(not space.contains(a, b) for a, b in zip(chain, chain[1:])):
            failed.append(f"U/V chains at {x} are not interleaved")
        if any(not space.contains(delta_expansion(u, 1 + growth), v) for u, v in zip(U.chains[x], V.chains[x])):
            failed.append(f"U_i(x) expanded by 1 + Delta/eps not inside V_i(x) at {x}")
    return failed


def verify_sandwich(U: Tower, V: Tower, eps: Real, q: float, space, *, s_1: int | None = None):
    """Find a 4eps-filled top ball or certify growth of the union by ``1 + eps/3^(q+1)``.

    Follows the proof: take a measured Vitali selection of the maximal top
    ``V`` balls; for each selected ball ``W`` that the level ``floor(L/2)``
    of ``U`` covers up to ``eps``, run the effective Vitali covering on the
    upper half of the ``U`` chains that end inside ``W``.  If no ball gets
    filled, the growth inequality is checked by counting.  Both outcomes can
    hold at once; the first one established is returned.
    """
    space = as_space(space)
    if not U.base or not V.base:
        raise PreconditionError("empty tower")
    failed = sandwich_hypotheses(U, V, eps, q, space)
    if failed:
        raise PreconditionError("tower sandwich hypotheses fail", failed)
    if s_1 is None or min(U.rad, V.rad) < s_1:
        warnings.warn("tower radii not above a certified s_1", UncertifiedWarning, stacklevel=2)
    eps_x = Fraction(_as_exact(eps))
    L = U.height - 1
    half = L // 2
    middle = U.level(half)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UncertifiedWarning)
        tops = measured_vitali(maximal_balls(V.level(L + 1), space), q, space)
        for W in tops:
            size = space.ball_size(W)
            if size - space.intersection_measure(W, middle) >= eps_x * size:
                continue
            inner = [x for x in U.base if space.contains(U.ball(x, L), W)]
            if not inner:
                continue
            upper = U.restrict(inner).upto(L).from_level(half)
            parts = effective_vitali(upper, eps, q, space, check=False)
            if check_delta_fill(W, parts, 4 * eps_x, space):
                return FillWitness(W, parts, 4 * eps_x)
    union_v = space.measure(V.level(L + 1))
    union_u1 = space.measure(U.level(1))
    power = Fraction(3) ** int(q + 1) if float(q).is_integer() else Fraction(3 ** (q + 1))
    required = 1 + eps_x / power
    ratio = Fraction(union_v, union_u1)
    if ratio >= required:
        return GrowthCertificate(union_v, union_u1, ratio, float(required))
    raise GuaranteeError(f"neither a 4eps-fill nor growth: ratio {float(ratio):.6f} < {float(required):.6f}")
