"""``qcayley <experiment> [options]``: run one experiment, write results.json and sweep.csv.

Exit status: 0 when every record passed, 1 when some assertion failed,
2 for usage or configuration errors.
"""
import argparse
import csv
import json
import math
import os
import sys

import numpy as np

from .errors import ConfigError
from .harness import EXPERIMENTS, NOISE_MODELS, ExperimentConfig, run_experiment

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dump_results(records, path) -> None:
    """Deterministic JSON: sorted keys, floats written with shortest round-trip repr."""
    with open(path, "w") as fh:
        json.dump(_jsonable(records), fh, indent=1, sort_keys=True, allow_nan=False)
        fh.write("\n")


def dump_csv(columns, rows, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow(["" if v is None else v for v in _jsonable(list(row))])


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcayley", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="flat JSON document of config fields; flags override it")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--jobs", type=int)
    ap.add_argument("--precision-bits", dest="precision_bits", type=int)
    ap.add_argument("--out", help="output directory (default: results)")
    ap.add_argument("--trials", type=int)

    g = ap.add_argument_group("circuits and reductions")
    g.add_argument("--arch", choices=("line-brickwork", "grid"))
    g.add_argument("--m", type=int, help="gate count")
    g.add_argument("--n", type=int, help="qubit count")
    g.add_argument("--Delta", type=float, help="perturbation radius (default 0.5/m^3)")
    g.add_argument("--delta", type=float, help="oracle failure margin")
    g.add_argument("--epsilon", type=float, help="oracle error / W tolerance scale")
    g.add_argument("--noise", choices=NOISE_MODELS)
    g.add_argument("--q", type=float, help="corruption rate for bernoulli noise")
    g.add_argument("--L", type=int, help="grid size")
    g.add_argument("--d", type=int, help="degree (synthetic weak instances)")
    g.add_argument("--w", choices=("exact", "ransac"), help="W implementation")
    g.add_argument("--ransac-iters", dest="ransac_iters", type=int)
    g.add_argument("--binary-iters", dest="binary_iters", type=int)
    g.add_argument("--synthetic", action=argparse.BooleanOptionalAction, default=None)
    g.add_argument("--corrupt", type=int, help="outliers in synthetic weak instances")
    g.add_argument("--rtol", type=float, help="relative tolerance for exact-oracle checks")

    g = ap.add_argument_group("sweeps")
    g.add_argument("--deltas", type=float, nargs="+", help="Delta values (or delta values for concentration)")
    g.add_argument("--degrees", type=int, nargs="+")
    g.add_argument("--Ls", type=int, nargs="+")

    g = ap.add_argument_group("sharp-p")
    g.add_argument("--p", type=int, help="witness bits")
    g.add_argument("--mu", type=float, help="error exponent for identity padding")
    g.add_argument("--table-file", dest="table_file")
    g.add_argument("--exhaustive", action=argparse.BooleanOptionalAction, default=None)

    g = ap.add_argument_group("concentration and tvd-proxy")
    g.add_argument("--c-tvd", dest="c_tvd", type=float)
    g.add_argument("--samples", type=int)
    g.add_argument("--bins", type=int)
    g.add_argument("--bootstrap", type=int)
    return ap


def config_from_args(args) -> ExperimentConfig:
    doc = {}
    if args.config:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{args.config}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        if doc.get("experiment", args.experiment) != args.experiment:
            raise ConfigError(f"config is for {doc['experiment']!r}, not {args.experiment!r}")
    doc["experiment"] = args.experiment
    for key, val in vars(args).items():
        if key not in ("experiment", "config") and val is not None:
            doc[key] = val
    return ExperimentConfig.from_dict(doc)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        result = run_experiment(cfg)
    except ConfigError as exc:
        print(f"qcayley: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    os.makedirs(cfg.out, exist_ok=True)
    dump_results(result.records, os.path.join(cfg.out, "results.json"))
    dump_csv(result.columns, result.rows, os.path.join(cfg.out, "sweep.csv"))
    failed = sum(not r["passed"] for r in result.records)
    print(f"{cfg.experiment}: {len(result.records) - failed}/{len(result.records)} records passed"
          f" -> {cfg.out}")
    return EXIT_PASS if failed == 0 else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
