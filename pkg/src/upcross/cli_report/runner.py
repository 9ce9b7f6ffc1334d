"""Running a validated experiment and writing its artifacts."""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import __version__
from ..cayley import GrowthEstimate, build_norm_table, estimate_growth
from ..covering import CayleySpace, CoveringConstants, ThresholdTable, box_space_for, compute_thresholds
from ..processes import sample_field
from ..upcrossings import SimulationResult, TailTable, simulate, transference_density, trial_seed
from .config import ExperimentConfig

TAIL_CSV = "tail.csv"
REPORT_JSON = "report.json"
THRESHOLDS_JSON = "thresholds.json"
AUDIT_DIR = "audit"

FILL_CAVEAT = (
    "Fill events are found by a greedy search over sub-balls with radii from query.radius_grid. "
    "A miss does not show that no fill exists, so the R column underestimates P(R^k) "
    "and the Q-not-R column overestimates P(Q^k without R^k)."
)
PRUNING_NOTE = (
    "For normalized subadditive statistics with site values in [0, C], a delta-fill by balls with S < alpha "
    "forces S < alpha + delta * C on the filled ball, so radii with S >= alpha + delta * C are skipped."
)


def atomic_write(path: Path, text: str) -> None:
    """Write to a temporary file in the same directory, then rename over ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def aux_seed(master_seed: int, j: int) -> int:
    """Seed for auxiliary field ``j``; disjoint from the trial seeds."""
    return int(np.random.SeedSequence(master_seed, spawn_key=(1, j)).generate_state(1, np.uint64)[0])


def threshold_space(cfg: ExperimentConfig):
    """Closed-form geometry for box-shaped balls, the enumerated table otherwise."""
    model = cfg.model
    try:
        return box_space_for(model)
    except ValueError:
        return CayleySpace(build_norm_table(model, cfg.max_radius))


def thresholds_for(cfg: ExperimentConfig) -> ThresholdTable:
    return compute_thresholds(threshold_space(cfg), cfg.q, cfg.eps, cfg.delta)


def thresholds_payload(cfg: ExperimentConfig, table: ThresholdTable) -> dict:
    return {
        "config_hash": cfg.config_hash,
        "master_seed": cfg.master_seed,
        "version": __version__,
        "thresholds": table.as_dict(),
        "constants": CoveringConstants(cfg.q, cfg.eps, cfg.delta).as_dict(),
    }


def growth_for(cfg: ExperimentConfig) -> GrowthEstimate:
    return estimate_growth(build_norm_table(cfg.model, cfg.max_radius))


def inequality_rows(q_table: TailTable, r_table: TailTable) -> list[dict] | None:
    """``P(Q^k) <= c rho^k + P(R^k)`` checked with both interval slacks.

    The check passes when the lower end of the ``Q`` interval lies below
    the fitted term plus the upper end of the ``R`` interval.
    """
    if q_table.fit is None:
        return None
    rows = []
    for q, r in zip(q_table.rows, r_table.rows):
        fitted = q_table.fit.predict(q.k)
        rows.append(
            {
                "k": q.k,
                "q_hat": q.p_hat,
                "q_ci_low": q.ci_low,
                "fit_term": fitted,
                "r_hat": r.p_hat,
                "r_ci_high": r.ci_high,
                "rhs": fitted + r.p_hat,
                "holds": bool(q.ci_low <= fitted + r.ci_high),
            }
        )
    return rows


def _transference(cfg: ExperimentConfig) -> list[dict]:
    model, spec, dist = cfg.model, cfg.spec, cfg.dist
    reach = cfg.l if cfg.n_max is None else max(cfg.l, cfg.n_max)
    window = cfg.M + reach
    table = build_norm_table(model, window)
    out = []
    for k in range(1, cfg.k_max + 1):
        query = cfg.query(k)
        dens = []
        for j in range(cfg.transference_fields):
            f = sample_field(model, window, dist, aux_seed(cfg.master_seed, j), table=table)
            dens.append(transference_density(f, spec, cfg.M, query))
        out.append({"k": k, "M": cfg.M, "densities": dens, "mean": float(np.mean(dens))})
    return out


def _trials_csv(cfg: ExperimentConfig, sim: SimulationResult) -> str:
    lines = ["trial,seed,upcrossings,fill_radius"]
    for i, c in enumerate(sim.counts):
        fr = "" if sim.fill_radius is None else str(int(sim.fill_radius[i]))
        lines.append(f"{i},{trial_seed(cfg.master_seed, i)},{int(c)},{fr}")
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RunResult:
    out_dir: Path
    q_table: TailTable
    r_table: TailTable | None
    q_not_r_table: TailTable | None
    thresholds: ThresholdTable
    report: dict

    @property
    def files(self) -> list[Path]:
        a = self.out_dir / AUDIT_DIR
        return [self.out_dir / TAIL_CSV, self.out_dir / REPORT_JSON, self.out_dir / THRESHOLDS_JSON,
                a / "manifest.json", a / "config.toml", a / "trials.csv"]


def run_experiment(cfg: ExperimentConfig, *, config_text: str | None = None, out_dir: str | Path | None = None) -> RunResult:
    """Simulate, fit, compute thresholds and write every artifact.

    Nothing is written until all computation has finished, so a failure
    mid-run leaves the output directory untouched.
    """
    out = Path(out_dir) if out_dir is not None else cfg.out_path
    model, spec, dist = cfg.model, cfg.spec, cfg.dist
    query = cfg.query(1)

    sim = simulate(model, spec, dist, query, cfg.trials, cfg.master_seed, detect_r=cfg.detect_r, workers=cfg.workers)
    q_table = sim.q_table(cfg.k_max, cfg.level).with_fit()
    r_table = sim.r_table(cfg.k_max, cfg.level) if cfg.detect_r else None
    q_not_r = sim.q_not_r_table(cfg.k_max, cfg.level) if cfg.detect_r else None
    thresholds = thresholds_for(cfg)
    p_hats = [r.p_hat for r in q_table.rows]

    report = {
        "software": {"package": "upcross", "version": __version__},
        "config": cfg.results_dict(),
        "config_hash": cfg.config_hash,
        "master_seed": cfg.master_seed,
        "group": {"label": model.label, "degree": model.degree},
        "tail": q_table.as_dict(),
        "fit": q_table.as_dict()["fit"],
        "fit_status": "ok" if q_table.fit else "insufficient data: fewer than two k with at least 5 hits",
        "nonincreasing": all(a >= b for a, b in zip(p_hats, p_hats[1:])),
        "fill_search": {
            "enabled": cfg.detect_r,
            "caveat": FILL_CAVEAT,
            "pruning": PRUNING_NOTE if spec.normalize else "not applicable: statistic is not normalized",
            "r_table": None if r_table is None else r_table.as_dict(),
            "q_not_r_table": None if q_not_r is None else q_not_r.as_dict(),
        },
        "main_inequality": None if r_table is None else inequality_rows(q_table, r_table),
        "transference": _transference(cfg) if cfg.M is not None else None,
        "thresholds": thresholds.as_dict(),
    }

    manifest = {
        "config_hash": cfg.config_hash,
        "master_seed": cfg.master_seed,
        "version": __version__,
        "config": cfg.results_dict(),
        "seed_rule": "trial i uses SeedSequence(master_seed, spawn_key=(i,)).generate_state(1, uint64)[0]",
        "replay": "upcross replay <config> --trial <i>",
        "trials_with_upcrossings": [int(i) for i in np.flatnonzero(sim.counts > 0)],
    }
    atomic_write(out / TAIL_CSV, q_table.to_csv())
    atomic_write(out / REPORT_JSON, _json(report))
    atomic_write(out / THRESHOLDS_JSON, _json(thresholds_payload(cfg, thresholds)))
    atomic_write(out / AUDIT_DIR / "manifest.json", _json(manifest))
    atomic_write(out / AUDIT_DIR / "config.toml", config_text if config_text is not None else _toml_of(cfg))
    atomic_write(out / AUDIT_DIR / "trials.csv", _trials_csv(cfg, sim))
    return RunResult(out, q_table, r_table, q_not_r, thresholds, report)


def _toml_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_toml_value(x) for x in v) + "]"
    if isinstance(v, str):
        return json.dumps(v)
    return repr(v)


def _toml_of(cfg: ExperimentConfig) -> str:
    """A config file equivalent to ``cfg`` (used when the original text is unavailable)."""
    d = cfg.as_dict()
    sections = {
        "group": {"kind": d["group_kind"], "d": d["d"], "generators": d["generators"], "degree": d["degree"], "max_radius": d["max_radius"]},
        "process": {"kind": d["process_kind"], "normalize": d["normalize"]},
        "distribution": {"kind": d["dist_kind"], "c_bound": d["c_bound"], "p": d["p"], "k": d["colors"]},
        "query": {k: d[k] for k in ("alpha", "beta", "delta", "l", "k_max", "n_max", "start_radius", "radius_grid", "M")},
        "run": {k: d[k] for k in ("trials", "master_seed", "workers", "output_dir", "level", "transference_fields")},
        "thresholds": {"eps": d["eps"], "q": d["q"]},
    }
    if cfg.group_kind == "heisenberg":
        sections["group"].pop("d")
    lines = []
    for name, keys in sections.items():
        lines.append(f"[{name}]")
        lines.extend(f"{k} = {_toml_value(v)}" for k, v in keys.items() if v is not None)
        lines.append("")
    return "\n".join(lines)
