"""Command line: ``upcross {validate,run,thresholds,growth,replay} <config>``."""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

from ..errors import ConfigError, UpcrossError
from ..upcrossings import replay_trial
from .config import ExperimentConfig, load_config
from .runner import AUDIT_DIR, growth_for, run_experiment, thresholds_for, thresholds_payload

SEED_ENV = "UPCROSS_MASTER_SEED"

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2


def _overrides(args) -> dict:
    out = {
        "run.trials": getattr(args, "trials", None),
        "query.k_max": getattr(args, "k_max", None),
        "run.workers": getattr(args, "workers", None),
    }
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            out["run.master_seed"] = int(env, 0)
        except ValueError:
            raise ConfigError([(SEED_ENV, f"must be an integer, got {env!r}")])
    return out


def _load(args) -> ExperimentConfig:
    return load_config(args.config, _overrides(args))


def cmd_validate(args) -> int:
    cfg = _load(args)
    print(json.dumps({"config_hash": cfg.config_hash, "config": cfg.as_dict()}, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _load(args)
    text = Path(args.config).read_text()
    res = run_experiment(cfg, config_text=text, out_dir=args.out)
    print(res.q_table.to_csv(), end="")
    fit = res.q_table.fit
    if fit is None:
        print("fit: insufficient data")
    else:
        print(f"fit: c_hat={fit.c_hat:.6g} rho_hat={fit.rho_hat:.6g} r2={fit.r2:.4f} over k={list(fit.ks)}")
    print(f"wrote {res.out_dir} (config {cfg.config_hash[:12]}, seed {cfg.master_seed})")
    return EXIT_OK


def cmd_thresholds(args) -> int:
    cfg = _load(args)
    table = thresholds_for(cfg)
    print(json.dumps(thresholds_payload(cfg, table), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_growth(args) -> int:
    cfg = _load(args)
    est = growth_for(cfg)
    print(f"# {cfg.model.label}: degree {est.degree}, fitted slope {est.degree_hat:.4f}, |B(n)|/n^d at n_max {est.pansu_hat:.6g}")
    print("n,ball_size,ratio")
    for r in est.rows():
        print(f"{r['n']},{r['ball_size']},{r['ratio']!r}")
    return EXIT_OK


def cmd_replay(args) -> int:
    cfg = _load(args)
    if not 0 <= args.trial < cfg.trials:
        print(f"trial {args.trial} outside 0..{cfg.trials - 1}", file=sys.stderr)
        return EXIT_FAIL
    got = replay_trial(cfg.model, cfg.spec, cfg.dist, cfg.query(1), cfg.master_seed, args.trial)
    print(json.dumps(got, indent=2))
    recorded = (Path(args.out) if args.out else cfg.out_path) / AUDIT_DIR / "trials.csv"
    if recorded.exists():
        with open(recorded, newline="") as fh:
            row = next((r for r in csv.DictReader(fh) if int(r["trial"]) == args.trial), None)
        if row is not None and (int(row["seed"]) != got["seed"] or int(row["upcrossings"]) != got["upcrossings"]):
            print(f"mismatch with {recorded}: recorded {row}", file=sys.stderr)
            return EXIT_FAIL
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="upcross", description="Upcrossing experiments on Cayley graphs.")
    sub = p.add_subparsers(dest="verb", required=True)

    def verb(name, fn, help):
        s = sub.add_parser(name, help=help)
        s.add_argument("config", help="TOML experiment file")
        s.set_defaults(fn=fn)
        return s

    verb("validate", cmd_validate, "check a config and print it with defaults filled")
    r = verb("run", cmd_run, "run the experiment and write tail.csv, report.json, thresholds.json, audit/")
    r.add_argument("--trials", type=int)
    r.add_argument("--k-max", type=int, dest="k_max")
    r.add_argument("--workers", type=int)
    r.add_argument("--out", help="output directory (default: run.output_dir)")
    verb("thresholds", cmd_thresholds, "print the certified radius thresholds")
    verb("growth", cmd_growth, "print ball sizes and the growth estimate")
    rp = verb("replay", cmd_replay, "recompute one trial from its seed")
    rp.add_argument("--trial", type=int, required=True)
    rp.add_argument("--out", help="output directory holding the audit bundle")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(e, file=sys.stderr)
        return EXIT_CONFIG
    except (UpcrossError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL
