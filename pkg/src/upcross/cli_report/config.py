"""Experiment configuration: TOML in, validated :class:`ExperimentConfig` out.

Schema (every key except those marked required has a default)::

    [group]
    kind = "zd-box"          # required: zd-standard | zd-box | heisenberg | zd-custom
    d = 2                    # rank of Z^d (ignored for heisenberg)
    generators = [[1, 2]]    # zd-custom only; inverses are added
    degree = 2               # zd-custom only; growth degree, default d
    max_radius = 100         # required: radius budget for every window

    [process]
    kind = "additive-average"
    normalize = false

    [distribution]
    kind = "uniform"         # uniform | bernoulli | colors
    c_bound = 1.0
    p = 0.5
    k = 8

    [query]
    alpha = 0.45             # required
    beta = 0.55              # required
    delta = 0.1
    l = 40                   # required
    k_max = 5
    n_max = 60               # optional: enables the fill search
    start_radius = 1
    radius_grid = [0, 1, 2, 3, 4, 6, 8, 12, 16]
    M = 3                    # optional: transference ball radius

    [run]
    trials = 10000           # required
    master_seed = 0
    workers = 1
    output_dir = "out"       # relative paths resolve against the config file
    level = 0.95
    transference_fields = 1

    [thresholds]
    eps = 0.025              # default delta / 4
    q = 2                    # default: the group's growth degree
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from ..cayley import HEISENBERG, KINDS, ZD_BOX, ZD_CUSTOM, ZD_STANDARD, GroupModel
from ..errors import ConfigError
from ..processes import BERNOULLI, COLORS, PROCESS_KINDS, UNIFORM, Distribution, ProcessSpec
from ..upcrossings import DEFAULT_RADIUS_GRID, UpcrossingQuery

REQUIRED = object()
RUNTIME_ONLY = ("workers", "output_dir")
OPTIONAL = object()


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (_is_int(v) or isinstance(v, float)) and math.isfinite(v)


def _int_list(v) -> bool:
    return isinstance(v, list) and all(_is_int(x) for x in v)


# section -> key -> (default, type check, type name)
SCHEMA: dict[str, dict[str, tuple[Any, Callable[[Any], bool], str]]] = {
    "group": {
        "kind": (REQUIRED, lambda v: v in KINDS, f"one of {', '.join(KINDS)}"),
        "d": (1, _is_int, "an integer"),
        "generators": (OPTIONAL, lambda v: isinstance(v, list) and all(_int_list(g) for g in v), "a list of integer vectors"),
        "degree": (OPTIONAL, _is_int, "an integer"),
        "max_radius": (REQUIRED, _is_int, "an integer"),
    },
    "process": {
        "kind": ("additive-average", lambda v: v in PROCESS_KINDS, f"one of {', '.join(PROCESS_KINDS)}"),
        "normalize": (False, lambda v: isinstance(v, bool), "a boolean"),
    },
    "distribution": {
        "kind": (UNIFORM, lambda v: v in (UNIFORM, BERNOULLI, COLORS), "one of uniform, bernoulli, colors"),
        "c_bound": (1.0, _is_num, "a number"),
        "p": (0.5, _is_num, "a number"),
        "k": (8, _is_int, "an integer"),
    },
    "query": {
        "alpha": (REQUIRED, _is_num, "a number"),
        "beta": (REQUIRED, _is_num, "a number"),
        "delta": (0.1, _is_num, "a number"),
        "l": (REQUIRED, _is_int, "an integer"),
        "k_max": (5, _is_int, "an integer"),
        "n_max": (OPTIONAL, _is_int, "an integer"),
        "start_radius": (1, _is_int, "an integer"),
        "radius_grid": (list(DEFAULT_RADIUS_GRID), _int_list, "a list of integers"),
        "M": (OPTIONAL, _is_int, "an integer"),
    },
    "run": {
        "trials": (REQUIRED, _is_int, "an integer"),
        "master_seed": (0, _is_int, "an integer"),
        "workers": (1, _is_int, "an integer"),
        "output_dir": ("out", lambda v: isinstance(v, str) and v != "", "a nonempty string"),
        "level": (0.95, _is_num, "a number"),
        "transference_fields": (1, _is_int, "an integer"),
    },
    "thresholds": {
        "eps": (OPTIONAL, _is_num, "a number"),
        "q": (OPTIONAL, _is_num, "a number"),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A validated experiment.  Build it with :func:`validate_config`."""

    group_kind: str
    d: int
    generators: tuple[tuple[int, ...], ...] | None
    degree: int | None
    max_radius: int
    process_kind: str
    normalize: bool
    dist_kind: str
    c_bound: float
    p: float
    colors: int
    alpha: float
    beta: float
    delta: float
    l: int
    k_max: int
    n_max: int | None
    start_radius: int
    radius_grid: tuple[int, ...]
    M: int | None
    trials: int
    master_seed: int
    workers: int
    output_dir: str
    level: float
    transference_fields: int
    eps: float
    q: float
    base_dir: str = "."

    @property
    def model(self) -> GroupModel:
        if self.group_kind == ZD_STANDARD:
            return GroupModel.zd_standard(self.d)
        if self.group_kind == ZD_BOX:
            return GroupModel.zd_box(self.d)
        if self.group_kind == HEISENBERG:
            return GroupModel.heisenberg()
        return GroupModel.zd_custom(self.d, self.generators, self.degree)

    @property
    def spec(self) -> ProcessSpec:
        return ProcessSpec(self.process_kind, self.normalize)

    @property
    def dist(self) -> Distribution:
        return Distribution(self.dist_kind, c_bound=self.c_bound, p=self.p, k=self.colors)

    def query(self, k: int = 1) -> UpcrossingQuery:
        return UpcrossingQuery(self.alpha, self.beta, k, self.delta, self.l, self.n_max, self.start_radius, self.radius_grid)

    @property
    def detect_r(self) -> bool:
        return self.n_max is not None

    @property
    def out_path(self) -> Path:
        return Path(os.path.normpath(Path(self.base_dir) / self.output_dir))

    def as_dict(self) -> dict:
        """Everything that determines the results (``base_dir`` excluded)."""
        out = asdict(self)
        out.pop("base_dir")
        out["generators"] = None if self.generators is None else [list(g) for g in self.generators]
        out["radius_grid"] = list(self.radius_grid)
        return out

    def results_dict(self) -> dict:
        return {k: v for k, v in self.as_dict().items() if k not in RUNTIME_ONLY}

    @property
    def config_hash(self) -> str:
        """sha256 of the keys that determine results; workers and output_dir are left out."""
        canon = json.dumps(self.results_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def parse_toml(text: str) -> dict:
    try:
        return tomllib.loads(text)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError([("<document>", f"not valid TOML: {e}")]) from e


def apply_overrides(raw: dict, overrides: dict[str, Any]) -> dict:
    """Set dotted keys such as ``run.trials`` on a parsed document."""
    out = {k: dict(v) if isinstance(v, dict) else v for k, v in raw.items()}
    for path, value in overrides.items():
        if value is None:
            continue
        section, key = path.split(".")
        out.setdefault(section, {})[key] = value
    return out


def _fill(raw: dict, errors: list[tuple[str, str]]) -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for section in raw:
        if section not in SCHEMA:
            errors.append((section, "unknown section"))
        elif not isinstance(raw[section], dict):
            errors.append((section, "must be a table"))
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            given = {}
        for key in given:
            if key not in keys:
                errors.append((f"{section}.{key}", "unknown key"))
        for key, (default, check, tname) in keys.items():
            path = f"{section}.{key}"
            if key in given:
                v = given[key]
                if not check(v):
                    errors.append((path, f"must be {tname}, got {v!r}"))
                    v = None
            elif default is REQUIRED:
                errors.append((path, "required key is missing"))
                v = None
            else:
                v = None if default is OPTIONAL else default
            flat[path] = v
    return flat


def _cross_check(c: dict[str, Any], errors: list[tuple[str, str]]) -> None:
    def err(path, msg):
        errors.append((path, msg))

    def have(*paths):
        return all(c[p] is not None for p in paths)

    kind = c["group.kind"]
    if have("group.d") and c["group.d"] < 1:
        err("group.d", "must be at least 1")
    if kind == ZD_CUSTOM and c["group.generators"] is None:
        err("group.generators", "required for zd-custom")
    if kind != ZD_CUSTOM and c["group.generators"] is not None:
        err("group.generators", "only allowed for zd-custom")
    if kind != ZD_CUSTOM and c["group.degree"] is not None:
        err("group.degree", "only allowed for zd-custom")
    if kind == ZD_CUSTOM and have("group.generators", "group.d"):
        try:
            GroupModel.zd_custom(c["group.d"], c["group.generators"], c["group.degree"])
        except ValueError as e:
            err("group.generators", str(e))
    if have("group.max_radius") and c["group.max_radius"] < 1:
        err("group.max_radius", "must be at least 1")

    if have("distribution.c_bound") and not c["distribution.c_bound"] > 0:
        err("distribution.c_bound", "must be positive")
    if have("distribution.p") and not 0 <= c["distribution.p"] <= 1:
        err("distribution.p", "must lie in [0, 1]")
    if have("distribution.k") and c["distribution.k"] < 1:
        err("distribution.k", "must be at least 1")
    distinct = c["process.kind"] in ("distinct-colors", "distinct-colors-normalized")
    if distinct and c["distribution.kind"] != COLORS:
        err("distribution.kind", "distinct-color processes need the colors distribution")

    if have("query.alpha", "query.beta") and not c["query.alpha"] < c["query.beta"]:
        err("query.alpha, query.beta", f"alpha={c['query.alpha']} must be below beta={c['query.beta']}")
    if have("query.delta") and not 0 < c["query.delta"] < 1:
        err("query.delta", "must lie in (0, 1)")
    if have("query.k_max") and c["query.k_max"] < 1:
        err("query.k_max", "must be at least 1")
    if have("query.start_radius") and c["query.start_radius"] < 0:
        err("query.start_radius", "must be nonnegative")
    if have("query.l", "query.start_radius") and c["query.l"] < c["query.start_radius"]:
        err("query.l", "must be at least query.start_radius")
    if have("query.n_max", "query.k_max") and c["query.n_max"] <= c["query.k_max"]:
        err("query.n_max", "must exceed query.k_max")
    if have("query.radius_grid") and any(r < 0 for r in c["query.radius_grid"]):
        err("query.radius_grid", "entries must be nonnegative")
    if have("query.M") and c["query.M"] < 0:
        err("query.M", "must be nonnegative")

    if have("run.trials") and c["run.trials"] < 1:
        err("run.trials", f"must be at least 1, got {c['run.trials']}")
    if have("run.workers") and c["run.workers"] < 1:
        err("run.workers", "must be at least 1")
    if have("run.master_seed") and not 0 <= c["run.master_seed"] < 2**128:
        err("run.master_seed", "must lie in [0, 2^128)")
    if have("run.level") and not 0 < c["run.level"] < 1:
        err("run.level", "must lie in (0, 1)")
    if have("run.transference_fields") and c["run.transference_fields"] < 1:
        err("run.transference_fields", "must be at least 1")
    if have("thresholds.eps") and not 0 < c["thresholds.eps"] < 1:
        err("thresholds.eps", "must lie in (0, 1)")
    if have("thresholds.q") and not c["thresholds.q"] > 0:
        err("thresholds.q", "must be positive")

    # window budget: every field window must fit in B(max_radius)
    if have("group.max_radius", "query.l"):
        R = c["group.max_radius"]
        reach = c["query.l"]
        if have("query.n_max"):
            reach = max(reach, c["query.n_max"])
            if c["query.l"] + c["query.n_max"] > R:
                err("query.l, query.n_max", f"l + n_max = {c['query.l'] + c['query.n_max']} exceeds group.max_radius = {R}")
        elif reach > R:
            err("query.l", f"l = {reach} exceeds group.max_radius = {R}")
        if have("query.M") and c["query.M"] + reach > R:
            err("query.M", f"M + max(l, n_max) = {c['query.M'] + reach} exceeds group.max_radius = {R}")


def validate_config(text: str, *, base_dir: str | Path = ".", overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    """Parse and cross-check a TOML experiment.

    Every violation is collected before raising :class:`ConfigError`,
    each tagged with the dotted path of the offending key.
    ``overrides`` maps dotted keys to values applied before validation.
    """
    raw = parse_toml(text)
    if overrides:
        raw = apply_overrides(raw, overrides)
    errors: list[tuple[str, str]] = []
    c = _fill(raw, errors)
    _cross_check(c, errors)
    if errors:
        raise ConfigError(errors)
    model_degree = {HEISENBERG: 4}.get(c["group.kind"], c["group.degree"] or c["group.d"])
    d = 3 if c["group.kind"] == HEISENBERG else c["group.d"]
    return ExperimentConfig(
        group_kind=c["group.kind"],
        d=d,
        generators=None if c["group.generators"] is None else tuple(tuple(g) for g in c["group.generators"]),
        degree=c["group.degree"],
        max_radius=c["group.max_radius"],
        process_kind=c["process.kind"],
        normalize=c["process.normalize"],
        dist_kind=c["distribution.kind"],
        c_bound=float(c["distribution.c_bound"]),
        p=float(c["distribution.p"]),
        colors=c["distribution.k"],
        alpha=float(c["query.alpha"]),
        beta=float(c["query.beta"]),
        delta=float(c["query.delta"]),
        l=c["query.l"],
        k_max=c["query.k_max"],
        n_max=c["query.n_max"],
        start_radius=c["query.start_radius"],
        radius_grid=tuple(sorted(set(c["query.radius_grid"]))),
        M=c["query.M"],
        trials=c["run.trials"],
        master_seed=c["run.master_seed"],
        workers=c["run.workers"],
        output_dir=c["run.output_dir"],
        level=float(c["run.level"]),
        transference_fields=c["run.transference_fields"],
        eps=float(c["thresholds.eps"]) if c["thresholds.eps"] is not None else float(c["query.delta"]) / 4,
        q=float(c["thresholds.q"]) if c["thresholds.q"] is not None else float(model_degree),
        base_dir=str(base_dir),
    )


def load_config(path: str | Path, overrides: dict[str, Any] | None = None) -> ExperimentConfig:
    path = Path(path)
    return validate_config(path.read_text(), base_dir=path.parent, overrides=overrides)
