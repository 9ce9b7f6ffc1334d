"""JSON-ready dictionaries for balls, collections and towers."""

from __future__ import annotations

from fractions import Fraction
from numbers import Real

from .balls import Ball, BallCollection, Tower


def radius_to_json(r: Real):
    # exact rationals keep their exact value as "p/q"
    if isinstance(r, Fraction):
        return str(r) if r.denominator != 1 else r.numerator
    return r


def radius_from_json(r) -> Real:
    return Fraction(r) if isinstance(r, str) else r


def ball_to_json(b: Ball) -> dict:
    return {"center": list(b.center), "radius": radius_to_json(b.radius)}


def ball_from_json(d: dict) -> Ball:
    return Ball(tuple(d["center"]), radius_from_json(d["radius"]))


def collection_to_json(balls) -> list[dict]:
    return [ball_to_json(b) for b in balls]


def collection_from_json(items: list[dict]) -> BallCollection:
    return BallCollection(ball_from_json(d) for d in items)


def tower_to_json(t: Tower) -> dict:
    return {"base": [list(x) for x in t.base], "chains": [collection_to_json(t.chains[x]) for x in t.base]}


def tower_from_json(d: dict) -> Tower:
    return Tower({tuple(x): tuple(ball_from_json(b) for b in ch) for x, ch in zip(d["base"], d["chains"])})
