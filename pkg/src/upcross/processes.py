"""Ball-indexed processes built from i.i.d. random fields on a group window.

A :class:`Field` assigns an independent value to every element of
``B(window_radius)``.  Values come from a counter-based hash of
``(seed, element coordinates)``, so the value of an element does not depend
on how the window is enumerated and a translated field is just a re-indexed
lookup.  A :class:`ProcessSpec` turns a field into ``S_{B(g, r)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .cayley import HEISENBERG, Element, GroupModel, NormTable, build_norm_table
from .errors import ModelMismatchError, WindowError

ADDITIVE_AVERAGE = "additive-average"
ADDITIVE_SUM = "additive-sum"
MAX_VALUE = "max-value"
DISTINCT_COLORS = "distinct-colors"
DISTINCT_COLORS_NORMALIZED = "distinct-colors-normalized"
PROCESS_KINDS = (ADDITIVE_AVERAGE, ADDITIVE_SUM, MAX_VALUE, DISTINCT_COLORS, DISTINCT_COLORS_NORMALIZED)

UNIFORM = "uniform"
BERNOULLI = "bernoulli"
COLORS = "colors"

_MASK64 = (1 << 64) - 1


# -- counter-based randomness -------------------------------------------------

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer; uint64 arithmetic wraps modulo 2^64
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def hash_uniform(seed: int, coords: np.ndarray) -> np.ndarray:
    """Uniform ``[0, 1)`` doubles keyed by ``(seed, row of coords)``."""
    coords = np.asarray(coords, dtype=np.int64)
    if coords.ndim == 1:
        coords = coords[None, :]
    with np.errstate(over="ignore"):
        h = np.full(len(coords), _mix(np.uint64(seed & _MASK64) + _GAMMA), dtype=np.uint64)
        for j in range(coords.shape[1]):
            h = _mix(h + _GAMMA + coords[:, j].astype(np.uint64))
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


# -- distributions and process kinds ------------------------------------------


@dataclass(frozen=True)
class Distribution:
    """Law of a single site value: ``uniform(0, c_bound)``, ``bernoulli(p)`` or ``colors(k)``."""

    kind: str
    c_bound: float = 1.0
    p: float = 0.5
    k: int = 8

    def __post_init__(self) -> None:
        if self.kind not in (UNIFORM, BERNOULLI, COLORS):
            raise ValueError(f"unknown distribution {self.kind!r}")
        if self.kind == UNIFORM and not self.c_bound > 0:
            raise ValueError("uniform bound must be positive")
        if self.kind == BERNOULLI and not 0 <= self.p <= 1:
            raise ValueError("bernoulli p must lie in [0, 1]")
        if self.kind == COLORS and self.k < 1:
            raise ValueError("need at least one color")

    @classmethod
    def uniform(cls, c_bound: float = 1.0) -> Distribution:
        return cls(UNIFORM, c_bound=c_bound)

    @classmethod
    def bernoulli(cls, p: float) -> Distribution:
        return cls(BERNOULLI, p=p)

    @classmethod
    def colors(cls, k: int = 8) -> Distribution:
        return cls(COLORS, k=k)

    @property
    def upper(self) -> float:
        """Almost-sure bound on a single value."""
        return {UNIFORM: self.c_bound, BERNOULLI: 1.0, COLORS: float(self.k - 1)}[self.kind]

    @property
    def mean(self) -> float:
        return {UNIFORM: self.c_bound / 2, BERNOULLI: self.p, COLORS: (self.k - 1) / 2}[self.kind]

    def transform(self, u: np.ndarray) -> np.ndarray:
        if self.kind == UNIFORM:
            return self.c_bound * u
        if self.kind == BERNOULLI:
            return (u < self.p).astype(np.float64)
        return np.minimum(np.floor(u * self.k), self.k - 1).astype(np.int64)

    def as_dict(self) -> dict:
        if self.kind == UNIFORM:
            return {"kind": UNIFORM, "c_bound": self.c_bound}
        if self.kind == BERNOULLI:
            return {"kind": BERNOULLI, "p": self.p}
        return {"kind": COLORS, "k": self.k}


@dataclass(frozen=True)
class ProcessSpec:
    """Which statistic of the field over a ball defines ``S_B``.

    ``normalize`` divides by ``|B|``; the ``*-average`` and ``*-normalized``
    kinds set it implicitly.
    """

    kind: str
    normalize: bool = False

    def __post_init__(self) -> None:
        if self.kind not in PROCESS_KINDS:
            raise ValueError(f"unknown process kind {self.kind!r}")
        if self.kind in (ADDITIVE_AVERAGE, DISTINCT_COLORS_NORMALIZED):
            object.__setattr__(self, "normalize", True)

    @property
    def base(self) -> str:
        """The underlying unnormalized statistic: ``sum``, ``max`` or ``distinct``."""
        if self.kind in (ADDITIVE_AVERAGE, ADDITIVE_SUM):
            return "sum"
        if self.kind == MAX_VALUE:
            return "max"
        return "distinct"

    @property
    def subadditive(self) -> bool:
        return not self.normalize

    @property
    def needs_colors(self) -> bool:
        return self.base == "distinct"

    def as_dict(self) -> dict:
        return {"kind": self.kind, "normalize": self.normalize}


# -- fields ---------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Field:
    """Values on ``B(window_radius)``, stored in the table's layer order.

    ``offset`` is the right translation applied to the sampled field, so the
    value at ``g`` is the sampled value at ``g . offset``.
    """

    table: NormTable
    window_radius: int
    dist: Distribution
    seed: int
    values: np.ndarray = field(repr=False)
    offset: Element | None = None

    @property
    def model(self) -> GroupModel:
        return self.table.model

    def __len__(self) -> int:
        return len(self.values)

    def value(self, g: Sequence[int]) -> float:
        i = self.table.index(g)
        if i >= len(self.values):
            raise WindowError(f"{tuple(g)} lies outside the field window B({self.window_radius})")
        return self.values[i].item()

    def items(self) -> Iterable[tuple[Element, float]]:
        for c, v in zip(self.table.coords[: len(self.values)], self.values):
            yield tuple(int(x) for x in c), v.item()

    def as_dict(self) -> dict:
        """Audit dump: element coordinates and values, plus how to regenerate them."""
        return {
            "group": self.model.label,
            "window_radius": self.window_radius,
            "distribution": self.dist.as_dict(),
            "seed": self.seed,
            "offset": list(self.offset) if self.offset else None,
            "elements": self.table.coords[: len(self.values)].tolist(),
            "values": self.values.tolist(),
        }


def _window_table(model_or_table, window_radius: int) -> NormTable:
    if isinstance(model_or_table, NormTable):
        if model_or_table.max_radius < window_radius:
            raise WindowError(f"window {window_radius} exceeds table radius {model_or_table.max_radius}")
        return model_or_table
    return build_norm_table(model_or_table, window_radius)


def sample_field(model, window_radius: int, dist: Distribution, seed: int, table: NormTable | None = None) -> Field:
    """I.i.d. field on ``B(window_radius)`` reproducible from ``seed``."""
    table = _window_table(table if table is not None else model, window_radius)
    if table.model != (model.model if isinstance(model, NormTable) else model):
        raise ModelMismatchError("table built for another group")
    n = table.size(window_radius)
    values = dist.transform(hash_uniform(seed, table.coords[:n]))
    values.setflags(write=False)
    return Field(table, window_radius, dist, seed, values)


def field_from_values(table: NormTable, window_radius: int, values: dict | Sequence, dist: Distribution | None = None) -> Field:
    """A field with explicit values (a mapping from elements, or a sequence in layer order)."""
    n = table.size(window_radius)
    if isinstance(values, dict):
        arr = np.array([values[tuple(int(x) for x in c)] for c in table.coords[:n]])
    else:
        arr = np.asarray(values)
        if len(arr) != n:
            raise ValueError(f"expected {n} values, got {len(arr)}")
    arr = arr.copy()
    arr.setflags(write=False)
    return Field(table, window_radius, dist or Distribution.uniform(max(1.0, float(np.max(arr)))), -1, arr)


def translate_field(f: Field, h: Sequence[int]) -> Field:
    """The view ``g -> f(g . h)`` on the largest window it is defined on."""
    model = f.model
    h = model.check(h)
    hn = f.table.norm(h)
    radius = f.window_radius - hn
    if radius < 0:
        raise WindowError(f"translation by {h} leaves no part of the window B({f.window_radius})")
    idx = f.table.translate(radius, h)
    values = f.values[idx]
    values.setflags(write=False)
    offset = h if f.offset is None else model.multiply(h, f.offset)
    return Field(f.table, radius, f.dist, f.seed, values, offset)


# -- evaluation -----------------------------------------------------------------


def _check_window(f: Field, idx: np.ndarray, center, radius) -> None:
    if len(idx) and idx.max() >= len(f.values):
        raise WindowError(f"B({tuple(center)}, {radius}) leaves the field window B({f.window_radius})")


def ball_values(f: Field, center: Sequence[int], radius: float) -> np.ndarray:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    n = math.floor(radius)
    try:
        idx = f.table.translate(n, center)
    except WindowError as e:
        raise WindowError(f"B({tuple(center)}, {radius}) leaves the field window B({f.window_radius})") from e
    _check_window(f, idx, center, radius)
    return f.values[idx]


def _aggregate(spec: ProcessSpec, vals: np.ndarray) -> float:
    if spec.base == "sum":
        s = float(vals.sum())
    elif spec.base == "max":
        s = float(vals.max())
    else:
        s = float(len(np.unique(vals)))
    return s / len(vals) if spec.normalize else s


def evaluate(spec: ProcessSpec, f: Field, center: Sequence[int], radius: float) -> float:
    """``S_{B(center, radius)}`` for the field ``f``."""
    return _aggregate(spec, ball_values(f, center, radius))


def evaluate_set(spec: ProcessSpec, f: Field, elements: Iterable[Sequence[int]]) -> float:
    """The same statistic over an arbitrary finite set of elements."""
    idx = f.table.index_of(np.asarray(list(elements), dtype=np.int64))
    _check_window(f, idx, (), "set")
    return _aggregate(spec, f.values[idx])


def radial_profiles(spec: ProcessSpec, values: np.ndarray, sizes: np.ndarray) -> np.ndarray:
    """``S_{B(g, r)}`` for ``r = 0..R`` from per-center values in layer order.

    ``values`` has shape ``(centers, |B(R)|)`` with row ``j`` holding the
    field on ``B(g_j, R)`` listed so that ``B(g_j, r)`` is the first
    ``sizes[r]`` entries.  Returns shape ``(centers, R + 1)``.
    """
    values = np.atleast_2d(values)
    ends = np.asarray(sizes, dtype=np.int64) - 1
    if spec.base == "sum":
        out = np.cumsum(values, axis=1, dtype=np.float64)[:, ends]
    elif spec.base == "max":
        out = np.maximum.accumulate(values, axis=1).astype(np.float64)[:, ends]
    else:
        out = _distinct_profiles(values.astype(np.int64), ends)
    if spec.normalize:
        out = out / np.asarray(sizes, dtype=np.float64)
    return out


def _distinct_profiles(values: np.ndarray, ends: np.ndarray) -> np.ndarray:
    m, n = values.shape
    colors = int(values.max()) + 1 if values.size else 1
    # position of the first occurrence of each color in each row
    first = np.full((m, colors), n, dtype=np.int64)
    rows = np.repeat(np.arange(m), n)
    pos = np.tile(np.arange(n), m)
    np.minimum.at(first, (rows, values.ravel()), pos)
    return (first[:, None, :] <= ends[None, :, None]).sum(axis=2).astype(np.float64)


def translate_indices(table: NormTable, radius: int, centers: np.ndarray) -> np.ndarray:
    """Table indices of ``B(g, radius)`` for every row ``g`` of ``centers``, in layer order."""
    centers = np.asarray(centers, dtype=np.int64).reshape(-1, table.model.dim)
    base = table.coords[: table.size(radius)]
    model = table.model
    out = base[None, :, :] + centers[:, None, :]
    if model.kind == HEISENBERG:
        out[:, :, 2] += base[None, :, 0] * centers[:, None, 1]
    return table.index_of(out.reshape(-1, model.dim)).reshape(len(centers), len(base))


def profiles_at(spec: ProcessSpec, f: Field, centers: np.ndarray, radius: int) -> np.ndarray:
    """``S_{B(g, r)}`` for each center row and ``r = 0..radius``."""
    idx = translate_indices(f.table, radius, centers)
    if idx.size and idx.max() >= len(f.values):
        raise WindowError(f"balls of radius {radius} around the centers leave the field window B({f.window_radius})")
    return radial_profiles(spec, f.values[idx], f.table.ball_sizes[: radius + 1])
