"""Monte Carlo tails of upcrossing counts and exponential fits."""

from __future__ import annotations

import io
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from ..cayley import GroupModel, build_norm_table
from ..errors import InsufficientDataError, WindowError
from ..processes import Distribution, Field, ProcessSpec, hash_uniform, radial_profiles
from .counting import UpcrossingQuery, count_upcrossings_batch
from .events import largest_fill_radius

CSV_HEADER = "k,trials,hits,p_hat,ci_low,ci_high"
MIN_FIT_HITS = 5
_CHUNK_CELLS = 4_000_000


def trial_seed(master_seed: int, i: int) -> int:
    """64-bit seed of trial ``i``, independent of how trials are scheduled."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(i,)).generate_state(1, np.uint64)[0])


def binomial_ci(hits: int, trials: int, level: float = 0.95) -> tuple[float, float]:
    """Clopper-Pearson interval."""
    if trials == 0:
        return 0.0, 1.0
    ci = stats.binomtest(hits, trials).proportion_ci(confidence_level=level, method="exact")
    return float(ci.low), float(ci.high)


@dataclass(frozen=True)
class TailRow:
    k: int
    trials: int
    hits: int
    p_hat: float
    ci_low: float
    ci_high: float

    def csv(self) -> str:
        return f"{self.k},{self.trials},{self.hits},{self.p_hat!r},{self.ci_low!r},{self.ci_high!r}"


@dataclass(frozen=True)
class ExponentialFit:
    c_hat: float
    rho_hat: float
    r2: float
    ks: tuple[int, ...]

    @property
    def decays(self) -> bool:
        return self.rho_hat < 1

    def predict(self, k: int) -> float:
        return self.c_hat * self.rho_hat**k


@dataclass(frozen=True)
class TailTable:
    """Estimated ``P(at least k upcrossings)`` for ``k = 1..k_max``."""

    rows: tuple[TailRow, ...]
    fit: ExponentialFit | None = None
    level: float = 0.95

    @classmethod
    def from_hits(cls, hits: np.ndarray, trials: int, level: float = 0.95) -> TailTable:
        """``hits[k - 1]`` trials reached ``k``."""
        rows = []
        for k, h in enumerate(hits, start=1):
            lo, hi = binomial_ci(int(h), trials, level)
            rows.append(TailRow(k, trials, int(h), int(h) / trials, lo, hi))
        return cls(tuple(rows), level=level)

    @classmethod
    def from_counts(cls, counts: np.ndarray, k_max: int, level: float = 0.95) -> TailTable:
        counts = np.asarray(counts)
        hits = np.array([(counts >= k).sum() for k in range(1, k_max + 1)])
        return cls.from_hits(hits, len(counts), level)

    @property
    def c_hat(self) -> float | None:
        return None if self.fit is None else self.fit.c_hat

    @property
    def rho_hat(self) -> float | None:
        return None if self.fit is None else self.fit.rho_hat

    @property
    def fit_r2(self) -> float | None:
        return None if self.fit is None else self.fit.r2

    def row(self, k: int) -> TailRow:
        return self.rows[k - 1]

    def with_fit(self) -> TailTable:
        """Attach :func:`fit_exponential` when enough rows have hits, else return self unchanged."""
        try:
            return replace(self, fit=fit_exponential(self))
        except InsufficientDataError:
            return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(CSV_HEADER + "\n")
        for r in self.rows:
            buf.write(r.csv() + "\n")
        return buf.getvalue()

    def as_dict(self) -> dict:
        out = {"rows": [r.__dict__ for r in self.rows], "level": self.level}
        out["fit"] = None if self.fit is None else {**self.fit.__dict__, "ks": list(self.fit.ks), "decays": self.fit.decays}
        return out


def fit_exponential(table: TailTable) -> ExponentialFit:
    """Least squares of ``log p_hat`` on ``k`` over rows with at least 5 hits."""
    rows = [r for r in table.rows if r.hits >= MIN_FIT_HITS and r.p_hat > 0]
    if len(rows) < 2:
        raise InsufficientDataError(f"{len(rows)} rows with >= {MIN_FIT_HITS} hits; need 2 to fit c rho^k")
    k = np.array([r.k for r in rows], dtype=np.float64)
    y = np.log([r.p_hat for r in rows])
    slope, intercept = np.polyfit(k, y, 1)
    resid = y - (intercept + slope * k)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0 else 1.0 - float((resid**2).sum()) / ss_tot
    return ExponentialFit(math.exp(intercept), math.exp(slope), r2, tuple(int(x) for x in k))


# -- simulation -------------------------------------------------------------------


@dataclass(frozen=True)
class SimulationResult:
    """Per-trial upcrossing counts (and largest fill radii when searched)."""

    master_seed: int
    counts: np.ndarray
    fill_radius: np.ndarray | None = field(default=None)

    @property
    def trials(self) -> int:
        return len(self.counts)

    def q_table(self, k_max: int, level: float = 0.95) -> TailTable:
        return TailTable.from_counts(self.counts, k_max, level)

    def r_table(self, k_max: int, level: float = 0.95) -> TailTable:
        if self.fill_radius is None:
            raise ValueError("fill events were not searched")
        hits = np.array([(self.fill_radius > k).sum() for k in range(1, k_max + 1)])
        return TailTable.from_hits(hits, self.trials, level)

    def q_not_r_table(self, k_max: int, level: float = 0.95) -> TailTable:
        if self.fill_radius is None:
            raise ValueError("fill events were not searched")
        hits = np.array([((self.counts >= k) & ~(self.fill_radius > k)).sum() for k in range(1, k_max + 1)])
        return TailTable.from_hits(hits, self.trials, level)


def window_for(query: UpcrossingQuery, detect_r: bool) -> int:
    return max(query.l, query.n_max) if detect_r and query.n_max is not None else query.l


def _run_chunk(model: GroupModel, spec: ProcessSpec, dist: Distribution, query: UpcrossingQuery, seeds: list[int], detect_r: bool):
    window = window_for(query, detect_r)
    table = build_norm_table(model, window)
    n = table.size(window)
    coords = table.coords[:n]
    sizes = table.ball_sizes[: query.l + 1]
    values = np.stack([dist.transform(hash_uniform(s, coords)) for s in seeds])
    prof = radial_profiles(spec, values[:, : sizes[-1]], sizes)
    counts = count_upcrossings_batch(prof[:, query.start_radius :], query.alpha, query.beta)
    if not detect_r:
        return counts, None
    ident = model.identity
    radii = np.zeros(len(seeds), dtype=np.int64)
    for j, s in enumerate(seeds):
        vals = values[j]
        vals.setflags(write=False)
        f = Field(table, window, dist, s, vals)
        try:
            radii[j] = largest_fill_radius(f, spec, ident, query)
        except WindowError as e:
            raise WindowError(f"trial seed {s}: {e}") from e
    return counts, radii


def simulate(
    model: GroupModel,
    spec: ProcessSpec,
    dist: Distribution,
    query: UpcrossingQuery,
    trials: int,
    master_seed: int,
    *,
    detect_r: bool = False,
    workers: int = 1,
) -> SimulationResult:
    """Run ``trials`` independent fields and record the identity-centered statistics.

    Trial ``i`` always uses :func:`trial_seed` ``(master_seed, i)``, so the
    result does not depend on ``workers``.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if detect_r and query.n_max is None:
        raise ValueError("fill search needs n_max")
    seeds = [trial_seed(master_seed, i) for i in range(trials)]
    window = window_for(query, detect_r)
    size = build_norm_table(model, window).size(window)
    step = max(1, min(256, _CHUNK_CELLS // size))
    if workers > 1:
        # several chunks per worker; chunking never changes the results
        step = min(step, max(1, -(-trials // (4 * workers))))
    chunks = [seeds[i : i + step] for i in range(0, trials, step)]
    args = (model, spec, dist, query)
    if workers > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, *zip(*[(*args, c, detect_r) for c in chunks])))
    else:
        parts = [_run_chunk(*args, c, detect_r) for c in chunks]
    counts = np.concatenate([p[0] for p in parts])
    radii = np.concatenate([p[1] for p in parts]) if detect_r else None
    return SimulationResult(master_seed, counts, radii)


def tail_estimate(
    model: GroupModel,
    spec: ProcessSpec,
    query: UpcrossingQuery,
    trials: int,
    k_max: int,
    master_seed: int,
    dist: Distribution | None = None,
    *,
    workers: int = 1,
    level: float = 0.95,
) -> TailTable:
    """``P(at least k upcrossings at the identity)`` for ``k = 1..k_max``, with a fit when possible."""
    if trials < 100:
        raise ValueError("tail estimates need at least 100 trials")
    dist = dist or Distribution.uniform()
    res = simulate(model, spec, dist, query, trials, master_seed, workers=workers)
    return res.q_table(k_max, level).with_fit()


def replay_trial(model: GroupModel, spec: ProcessSpec, dist: Distribution, query: UpcrossingQuery, master_seed: int, i: int) -> dict:
    """Recompute trial ``i`` from scratch: its seed, radius sequence and count."""
    seed = trial_seed(master_seed, i)
    table = build_norm_table(model, query.l)
    coords = table.coords[: table.size(query.l)]
    values = dist.transform(hash_uniform(seed, coords))
    prof = radial_profiles(spec, values[None, :], table.ball_sizes[: query.l + 1])[0]
    seq = prof[query.start_radius :]
    return {
        "trial": i,
        "seed": seed,
        "sequence": seq.tolist(),
        "upcrossings": int(count_upcrossings_batch(seq[None, :], query.alpha, query.beta)[0]),
    }
