"""Command-line harness: ``protective-lab {simulate,sweep-fit,tomography,scaling,monte-carlo}``.

Records go to stdout (or ``--out``) as one JSON object per line, or as CSV.
Diagnostics go to stderr. Exit codes:

    0  success
    2  configuration error (including --strict-boundary violations)
    3  resource cap exceeded
    4  too few points above the adiabatic-validity gate for a fit
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from .config import SCHEMA_VERSION, ConfigError, ExperimentConfig
from .apparatus import WraparoundError
from .protective import VALIDITY_GATE, ResolutionError, ResourceCapError, analyze
from .readout import derive_seed, monte_carlo
from .reconstruct import TomographyModel
from .scaling import AGE_OF_UNIVERSE_S, scaling_report

log = logging.getLogger("protective_lab")

EXIT_OK, EXIT_CONFIG, EXIT_RESOURCE, EXIT_FIT = 0, 2, 3, 4

CSV_COLUMNS = ("T", "pointer_shift", "expectation_target", "disturbance_prob",
               "entropy_bits", "pert_error", "validity_indicator")


class InsufficientRangeError(RuntimeError):
    pass


def _base(kind: str, cfg: ExperimentConfig | None, seed) -> dict:
    return {"schema": SCHEMA_VERSION, "record_type": kind,
            "config_hash": cfg.hash if cfg is not None else None, "seed": seed}


def _map_ordered(fn, items, jobs: int):
    if jobs <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))  # map preserves input order


def cmd_simulate(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    """One summary record per T, sorted by T."""
    def one(T):
        rep = analyze(cfg.setup(T))
        return {**_base("simulate", cfg, cfg.seed), **rep.summary()}
    return _map_ordered(one, cfg.schedule, jobs)


def fit_loglog(records: list[dict], field: str = "disturbance_prob",
               gate: float = VALIDITY_GATE) -> dict:
    """Least-squares line through ``(log10 T, log10 field)`` for gated records.

    Records with ``validity_indicator >= gate`` or a non-positive ``field``
    are skipped.
    """
    pts = [(r["T"], r[field]) for r in records
           if r.get("validity_indicator", 0.0) < gate and r.get(field) is not None and r[field] > 0]
    if len(pts) < 4:
        raise InsufficientRangeError(
            f"insufficient adiabatic range: {len(pts)} records pass the validity gate "
            f"< {gate:g}, need 4")
    x = np.log10([p[0] for p in pts])
    y = np.log10([p[1] for p in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return {"field": field, "slope": float(slope), "intercept": float(intercept),
            "r2": r2, "n_points": len(pts), "gate": gate,
            "T_min": float(min(p[0] for p in pts)), "T_max": float(max(p[0] for p in pts))}


def cmd_sweep_fit(records: list[dict], field: str = "disturbance_prob",
                  gate: float = VALIDITY_GATE) -> dict:
    hashes = {r.get("config_hash") for r in records}
    out = {"schema": SCHEMA_VERSION, "record_type": "sweep-fit",
           "config_hash": hashes.pop() if len(hashes) == 1 else None,
           "seed": records[0].get("seed") if records else None}
    out.update(fit_loglog(records, field, gate))
    return out


def cmd_tomography(cfg: ExperimentConfig) -> list[dict]:
    """Per-axis and summary records for every T of the schedule."""
    if cfg.protected_state is None:
        raise ConfigError("system.preset", "tomography needs the 'projector' system preset")
    mode = cfg.run["mode"]
    records = []
    for k, T in enumerate(cfg.schedule):
        model = TomographyModel(cfg.protected_state, cfg.gap, T, cfg.apparatus)
        seed = derive_seed(cfg.seed, k)
        res = model.run(mode, seed)
        base = _base("tomography-axis", cfg, seed)
        for rec in res.per_axis_records:
            records.append({**base, "T": T, **rec})
        records.append({**_base("tomography", cfg, seed), "T": T, **res.summary(),
                        "survival_probability": model.survival_probability()})
    return records


def cmd_monte_carlo(cfg: ExperimentConfig, jobs: int = 1) -> list[dict]:
    def one(item):
        k, T = item
        seed = derive_seed(cfg.seed, k)
        stats = monte_carlo(cfg.setup(T), int(cfg.run["trials"]), seed)
        return {**_base("monte-carlo", cfg, seed), "T": T, **stats.summary()}
    return _map_ordered(one, list(enumerate(cfg.schedule)), jobs)


def cmd_scaling(N: int, T_per: float, pure: bool = False, c_pure: float = 1.0,
                age: float = AGE_OF_UNIVERSE_S) -> dict:
    rep = scaling_report(N, T_per, assume_pure=pure, c_pure=c_pure, age_universe=age)
    return {"schema": SCHEMA_VERSION, "record_type": "scaling", "config_hash": None,
            "seed": None, **rep.record()}


def write_records(records: list[dict], fmt: str = "json") -> str:
    if fmt == "json":
        return "".join(json.dumps(r, sort_keys=False) + "\n" for r in records)
    if fmt == "csv":
        extras = sorted({k for r in records for k in r} - set(CSV_COLUMNS))
        cols = [c for c in CSV_COLUMNS if any(c in r for r in records)] + extras
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r)
        return buf.getvalue()
    raise ValueError(f"unknown format {fmt!r}")


def read_records(text: str) -> list[dict]:
    """Parse JSON-lines records (blank lines ignored)."""
    return [json.loads(line) for line in text.splitlines() if line.strip()]


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default="-", help="output path (default stdout)")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("-v", "--verbose", action="store_true")

    cfg_opts = argparse.ArgumentParser(add_help=False)
    cfg_opts.add_argument("--config", required=True, help="experiment YAML file")
    cfg_opts.add_argument("--seed", type=int, help="override run.base_seed")
    cfg_opts.add_argument("--strict-boundary", action="store_true", default=None)
    cfg_opts.add_argument("--second-order-phase", action="store_true", default=None)
    cfg_opts.add_argument("--jobs", type=int, default=1, help="worker threads for sweeps")

    p = argparse.ArgumentParser(prog="protective-lab", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("simulate", parents=[common, cfg_opts], help="analyze each T of the schedule")
    sub.add_parser("monte-carlo", parents=[common, cfg_opts], help="seeded readout ensembles")
    sub.add_parser("tomography", parents=[common, cfg_opts], help="protective qubit tomography")

    fit = sub.add_parser("sweep-fit", parents=[common], help="log-log fit of a record field vs T")
    src = fit.add_mutually_exclusive_group(required=True)
    src.add_argument("--in", dest="inp", help="JSON-lines records ('-' for stdin)")
    src.add_argument("--config", help="run simulate on this config, then fit")
    fit.add_argument("--field", default="disturbance_prob")
    fit.add_argument("--gate", type=float, default=VALIDITY_GATE)
    fit.add_argument("--seed", type=int)
    fit.add_argument("--second-order-phase", action="store_true", default=None)

    sc = sub.add_parser("scaling", parents=[common], help="measurement counts and time budgets")
    sc.add_argument("--N", type=int, required=True)
    sc.add_argument("--Tper", type=float, default=1e-5, help="seconds per measurement")
    sc.add_argument("--pure", action="store_true")
    sc.add_argument("--c-pure", type=float, default=1.0)
    sc.add_argument("--age", type=float, default=AGE_OF_UNIVERSE_S)
    return p


def _overrides(args) -> dict:
    out = {}
    if getattr(args, "seed", None) is not None:
        out["base_seed"] = args.seed
    for flag, key in (("strict_boundary", "strict_boundary"),
                      ("second_order_phase", "second_order_phase")):
        if getattr(args, flag, None):
            out[key] = True
    return out


def _emit(records: list[dict], args) -> None:
    text = write_records(records, args.format)
    if args.out == "-":
        sys.stdout.write(text)
    else:
        Path(args.out).write_text(text, encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "scaling":
            records = [cmd_scaling(args.N, args.Tper, args.pure, args.c_pure, args.age)]
        elif args.command == "sweep-fit":
            if args.config:
                recs = cmd_simulate(cfgmod.load(args.config, _overrides(args)))
            else:
                text = sys.stdin.read() if args.inp == "-" else Path(args.inp).read_text("utf-8")
                recs = read_records(text)
            records = [cmd_sweep_fit(recs, args.field, args.gate)]
        else:
            cfg = cfgmod.load(args.config, _overrides(args))
            log.info("config %s, %d schedule points", cfg.hash, len(cfg.schedule))
            if args.command == "simulate":
                records = cmd_simulate(cfg, args.jobs)
            elif args.command == "monte-carlo":
                records = cmd_monte_carlo(cfg, args.jobs)
            else:
                records = cmd_tomography(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ResolutionError, WraparoundError) as exc:
        print(f"strict boundary: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (json.JSONDecodeError, OSError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InsufficientRangeError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_FIT
    _emit(records, args)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
