"""Concrete groups of polynomial growth and their exact word metrics.

Elements are plain integer tuples: ``(x_1, ..., x_d)`` for the abelian
models and ``(a, b, c)`` for the integer Heisenberg group, where the
triple stands for the upper unitriangular matrix with entries a, b on the
superdiagonal and c in the corner.

Word norms have no closed form in general, so every norm is computed by
breadth-first layering of the Cayley graph from the identity and stored in
a :class:`NormTable`.  Balls use the right-invariant metric
``d(x, y) = |x y^-1|``; consequently ``B(x, r) = B(r) . x``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ModelMismatchError, PreconditionError, WindowError

Element = tuple[int, ...]

ZD_STANDARD = "zd-standard"
ZD_BOX = "zd-box"
HEISENBERG = "heisenberg"
ZD_CUSTOM = "zd-custom"
KINDS = (ZD_STANDARD, ZD_BOX, HEISENBERG, ZD_CUSTOM)

TABLE_FORMAT_VERSION = 1


def _box_generators(d: int) -> tuple[Element, ...]:
    gens = [v for v in itertools.product((-1, 0, 1), repeat=d) if any(v)]
    return tuple(sorted(gens))


def _standard_generators(d: int) -> tuple[Element, ...]:
    gens = []
    for i in range(d):
        for s in (1, -1):
            v = [0] * d
            v[i] = s
            gens.append(tuple(v))
    return tuple(gens)


@dataclass(frozen=True)
class GroupModel:
    """A finitely generated group together with a fixed symmetric generating set."""

    kind: str
    dim: int
    generators: tuple[Element, ...]
    degree_hint: int | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown group kind {self.kind!r}; expected one of {KINDS}")
        if self.dim < 1:
            raise ValueError("dimension must be positive")
        if self.kind == HEISENBERG and self.dim != 3:
            raise ValueError("the Heisenberg model has exactly three coordinates")
        if not self.generators:
            raise ValueError("generator list is empty")
        gens = set()
        for g in self.generators:
            if len(g) != self.dim:
                raise ModelMismatchError(f"generator {g} has the wrong length for dimension {self.dim}")
            if not any(g):
                raise ValueError("the identity cannot be a generator")
            gens.add(tuple(g))
        if len(gens) != len(self.generators):
            raise ValueError("duplicate generators")
        for g in self.generators:
            if self.inverse(g) not in gens:
                raise ValueError(f"generator set is not closed under inverses (missing inverse of {g})")
        if self.kind == ZD_BOX and gens != set(_box_generators(self.dim)):
            raise ValueError("zd-box generators must be all nonzero vectors in {-1,0,1}^d")

    @classmethod
    def zd_standard(cls, d: int) -> GroupModel:
        return cls(ZD_STANDARD, d, _standard_generators(d))

    @classmethod
    def zd_box(cls, d: int) -> GroupModel:
        return cls(ZD_BOX, d, _box_generators(d))

    @classmethod
    def heisenberg(cls) -> GroupModel:
        return cls(HEISENBERG, 3, ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)), degree_hint=4)

    @classmethod
    def zd_custom(cls, d: int, generators: Iterable[Sequence[int]], degree_hint: int | None = None) -> GroupModel:
        """Z^d with an arbitrary generating set; inverses are added when missing."""
        gens: list[Element] = []
        for g in generators:
            g = tuple(int(x) for x in g)
            for h in (g, tuple(-x for x in g)):
                if h not in gens:
                    gens.append(h)
        return cls(ZD_CUSTOM, d, tuple(gens), degree_hint)

    @property
    def identity(self) -> Element:
        return (0,) * self.dim

    @property
    def degree(self) -> int:
        """Integer degree of polynomial growth (Bass: 4 for the Heisenberg group, d for Z^d)."""
        if self.degree_hint is not None:
            return self.degree_hint
        return 4 if self.kind == HEISENBERG else self.dim

    @property
    def label(self) -> str:
        if self.kind == HEISENBERG:
            return "H3(Z)"
        suffix = {ZD_STANDARD: "standard", ZD_BOX: "box", ZD_CUSTOM: "custom"}[self.kind]
        return f"Z^{self.dim}-{suffix}"

    def check(self, g: Sequence[int]) -> Element:
        g = tuple(int(x) for x in g)
        if len(g) != self.dim:
            raise ModelMismatchError(f"element {g} does not belong to {self.label}")
        return g

    def multiply(self, g: Sequence[int], h: Sequence[int]) -> Element:
        g, h = self.check(g), self.check(h)
        if self.kind == HEISENBERG:
            return (g[0] + h[0], g[1] + h[1], g[2] + h[2] + g[0] * h[1])
        return tuple(a + b for a, b in zip(g, h))

    def inverse(self, g: Sequence[int]) -> Element:
        g = self.check(g)
        if self.kind == HEISENBERG:
            a, b, c = g
            return (-a, -b, -c + a * b)
        return tuple(-x for x in g)

    def mul_rows(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """Row-wise products ``a[i] . b[i]``."""
        out = a + b
        if self.kind == HEISENBERG:
            out[:, 2] += a[:, 0] * b[:, 1]
        return out

    def mul_right(self, arr: np.ndarray, h: Sequence[int]) -> np.ndarray:
        """Row-wise ``arr[i] . h`` for an ``(n, dim)`` integer array."""
        h = self.check(h)
        out = arr + np.asarray(h, dtype=np.int64)
        if self.kind == HEISENBERG:
            out[:, 2] += arr[:, 0] * h[1]
        return out

    def mul_left(self, h: Sequence[int], arr: np.ndarray) -> np.ndarray:
        """Row-wise ``h . arr[i]``."""
        h = self.check(h)
        out = arr + np.asarray(h, dtype=np.int64)
        if self.kind == HEISENBERG:
            out[:, 2] += h[0] * arr[:, 1]
        return out

    def coord_bounds(self, radius: int) -> tuple[int, ...]:
        """Bounds on |coordinate| for every element of word norm at most ``radius``."""
        step = [max(abs(g[i]) for g in self.generators) for i in range(self.dim)]
        if self.kind == HEISENBERG:
            # each letter changes c by at most |a| <= radius
            return (radius, radius, radius * radius)
        return tuple(radius * s for s in step)


def multiply(g: Sequence[int], h: Sequence[int], model: GroupModel) -> Element:
    return model.multiply(g, h)


def inverse(g: Sequence[int], model: GroupModel) -> Element:
    return model.inverse(g)


class _Codec:
    """Packs bounded integer coordinates into int64 keys whose order is lexicographic."""

    def __init__(self, bounds: Sequence[int]):
        self.bounds = np.asarray(bounds, dtype=np.int64)
        widths = 2 * self.bounds + 1
        strides = np.ones(len(bounds), dtype=np.int64)
        total = 1
        for i in range(len(bounds) - 1, -1, -1):
            strides[i] = total
            total *= int(widths[i])
        if total >= 2**62:
            raise PreconditionError("coordinate range too large to index; reduce max_radius")
        self.strides = strides

    def in_range(self, coords: np.ndarray) -> np.ndarray:
        return np.all(np.abs(coords) <= self.bounds, axis=-1)

    def encode(self, coords: np.ndarray) -> np.ndarray:
        return (coords + self.bounds) @ self.strides


class NormTable:
    """Exact word norms of all elements of ``B(max_radius)``.

    ``coords`` lists the elements layer by layer (sphere 0, sphere 1, ...),
    each sphere sorted lexicographically, so ``B(n)`` is always the prefix
    ``coords[:ball_sizes[n]]``.  The table is read-only after construction.
    """

    def __init__(self, model: GroupModel, max_radius: int, coords: np.ndarray, sphere_sizes: np.ndarray):
        self.model = model
        self.max_radius = int(max_radius)
        self.coords = np.ascontiguousarray(coords, dtype=np.int64)
        self.sphere_sizes = np.asarray(sphere_sizes, dtype=np.int64)
        self.ball_sizes = np.cumsum(self.sphere_sizes)
        self.norms = np.repeat(np.arange(self.max_radius + 1), self.sphere_sizes)
        self._codec = _Codec(model.coord_bounds(self.max_radius))
        keys = self._codec.encode(self.coords)
        self._perm = np.argsort(keys, kind="stable")
        self._sorted_keys = keys[self._perm]
        for arr in (self.coords, self.sphere_sizes, self.ball_sizes, self.norms, self._perm, self._sorted_keys):
            arr.setflags(write=False)

    @classmethod
    def build(cls, model: GroupModel, max_radius: int) -> NormTable:
        if max_radius < 0:
            raise ValueError("max_radius must be nonnegative")
        codec = _Codec(model.coord_bounds(max_radius))
        ident = np.zeros((1, model.dim), dtype=np.int64)
        layers = [ident]
        prev_keys = np.empty(0, dtype=np.int64)
        cur_keys = codec.encode(ident)
        for _ in range(max_radius):
            front = layers[-1]
            cand = np.concatenate([model.mul_right(front, g) for g in model.generators])
            keys, first = np.unique(codec.encode(cand), return_index=True)
            # neighbours of sphere n lie in spheres n-1, n, n+1
            fresh = ~(np.isin(keys, prev_keys, assume_unique=True) | np.isin(keys, cur_keys, assume_unique=True))
            layers.append(cand[first[fresh]])
            prev_keys, cur_keys = cur_keys, keys[fresh]
        coords = np.concatenate(layers)
        return cls(model, max_radius, coords, np.array([len(layer) for layer in layers]))

    def __len__(self) -> int:
        return len(self.coords)

    def __repr__(self) -> str:
        return f"NormTable({self.model.label}, max_radius={self.max_radius}, size={len(self)})"

    def lookup(self, coords: np.ndarray) -> np.ndarray:
        """Table indices of the given elements, -1 where outside the window."""
        coords = np.asarray(coords, dtype=np.int64).reshape(-1, self.model.dim)
        out = np.full(len(coords), -1, dtype=np.int64)
        ok = self._codec.in_range(coords)
        if ok.any():
            keys = self._codec.encode(coords[ok])
            pos = np.searchsorted(self._sorted_keys, keys)
            pos_c = np.minimum(pos, len(self._sorted_keys) - 1)
            hit = self._sorted_keys[pos_c] == keys
            idx = np.where(hit, self._perm[pos_c], -1)
            out[ok] = idx
        return out

    def index_of(self, coords: np.ndarray) -> np.ndarray:
        idx = self.lookup(coords)
        if (idx < 0).any():
            bad = np.asarray(coords).reshape(-1, self.model.dim)[idx < 0][0]
            raise WindowError(f"element {tuple(int(x) for x in bad)} lies outside B({self.max_radius})")
        return idx

    def index(self, g: Sequence[int]) -> int:
        return int(self.index_of(np.asarray([self.model.check(g)]))[0])

    def element(self, i: int) -> Element:
        return tuple(int(x) for x in self.coords[i])

    def norm(self, g: Sequence[int]) -> int:
        return int(self.norms[self.index(g)])

    @functools.cached_property
    def element_norms(self) -> dict[Element, int]:
        return {tuple(int(x) for x in c): int(n) for c, n in zip(self.coords, self.norms)}

    def size(self, n: int) -> int:
        """|B(n)| for an integer ``0 <= n <= max_radius``."""
        if n < 0:
            return 0
        if n > self.max_radius:
            raise WindowError(f"radius {n} exceeds table radius {self.max_radius}")
        return int(self.ball_sizes[n])

    def translate(self, n: int, h: Sequence[int]) -> np.ndarray:
        """Indices of ``B(h, n) = B(n) . h``, listed in the layer order of ``B(n)``."""
        h = self.model.check(h)
        hn = self.norm(h)
        if hn + n > self.max_radius:
            raise WindowError(f"B({h}, {n}) needs radius {hn + n} > table radius {self.max_radius}")
        base = self.coords[: self.size(n)]
        if not any(h):
            return np.arange(len(base))
        return self.index_of(self.model.mul_right(base, h))

    def save(self, path: str | Path) -> None:
        np.savez_compressed(
            path,
            version=TABLE_FORMAT_VERSION,
            kind=self.model.kind,
            dim=self.model.dim,
            generators=np.asarray(self.model.generators, dtype=np.int64),
            degree_hint=-1 if self.model.degree_hint is None else self.model.degree_hint,
            max_radius=self.max_radius,
            coords=self.coords,
            sphere_sizes=self.sphere_sizes,
        )

    @classmethod
    def load(cls, path: str | Path, model: GroupModel | None = None, max_radius: int | None = None) -> NormTable:
        with np.load(path, allow_pickle=False) as data:
            if int(data["version"]) != TABLE_FORMAT_VERSION:
                raise ValueError(f"norm table cache version {int(data['version'])} != {TABLE_FORMAT_VERSION}")
            hint = int(data["degree_hint"])
            stored = GroupModel(
                str(data["kind"]),
                int(data["dim"]),
                tuple(tuple(int(x) for x in g) for g in data["generators"]),
                None if hint < 0 else hint,
            )
            radius = int(data["max_radius"])
            if model is not None and model != stored:
                raise ModelMismatchError(f"cache holds {stored.label}, requested {model.label}")
            if max_radius is not None and max_radius != radius:
                raise ValueError(f"cache holds radius {radius}, requested {max_radius}")
            return cls(stored, radius, data["coords"], data["sphere_sizes"])


@functools.lru_cache(maxsize=16)
def build_norm_table(model: GroupModel, max_radius: int) -> NormTable:
    """Memoized :meth:`NormTable.build`; one table per (model, radius)."""
    return NormTable.build(model, max_radius)


def word_norm(g: Sequence[int], table: NormTable) -> int:
    return table.norm(g)


def distance(x: Sequence[int], y: Sequence[int], table: NormTable, model: GroupModel | None = None) -> int:
    """Right-invariant word distance ``|x y^-1|``."""
    model = model or table.model
    if model != table.model:
        raise ModelMismatchError("table and model disagree")
    return table.norm(model.multiply(x, model.inverse(y)))


def ball_indices(center: Sequence[int], radius: float, table: NormTable) -> np.ndarray:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return table.translate(math.floor(radius), center)


def ball(center: Sequence[int], radius: float, table: NormTable, model: GroupModel | None = None) -> set[Element]:
    """The closed ball ``{y : d(center, y) <= radius}`` as a set of elements."""
    if model is not None and model != table.model:
        raise ModelMismatchError("table and model disagree")
    idx = ball_indices(center, radius, table)
    return {tuple(int(x) for x in c) for c in table.coords[idx]}


def ball_size(radius: float, table: NormTable) -> int:
    if radius < 0:
        raise ValueError("radius must be nonnegative")
    return table.size(math.floor(radius))


@dataclass(frozen=True)
class GrowthEstimate:
    degree: int
    degree_hat: float
    pansu_hat: float
    per_n: tuple[tuple[int, int, float], ...]

    def rows(self) -> list[dict]:
        return [{"n": n, "ball_size": b, "ratio": r} for n, b, r in self.per_n]


def estimate_growth(table: NormTable, degree: int | None = None) -> GrowthEstimate:
    """Log-log slope of |B(n)| over the upper half of the table, and |B(n_max)| / n_max^d."""
    if table.max_radius < 10:
        raise PreconditionError("table too small for a growth estimate", [f"max_radius={table.max_radius} < 10"])
    d = table.model.degree if degree is None else int(degree)
    n = np.arange(1, table.max_radius + 1)
    sizes = table.ball_sizes[1:]
    upper = n >= math.ceil(table.max_radius / 2)
    slope = np.polyfit(np.log(n[upper]), np.log(sizes[upper].astype(float)), 1)[0]
    per_n = tuple((int(k), int(b), float(b) / float(k) ** d) for k, b in zip(n, sizes))
    return GrowthEstimate(d, float(slope), per_n[-1][2], per_n)
