"""Batch command line front door.

Every run reads one JSON config, writes into a fresh directory
``<out>/<subcommand>-<seed>/`` and records a ``manifest.json`` that can be
passed back as ``--config`` to reproduce the CSV outputs byte for byte.

Exit status: 0 success, 1 acceptance failures (``verify`` only),
2 validation or domain error, 3 capability or accuracy error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import shutil
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import parse_config
from .core_numerics import DickmanParams, build_tables, cdf_via_recursion
from .errors import AccuracyError, CapabilityError, ConfigValidationError, ParameterDomainError
from .gd_sampler import sample_gd
from .inversions import shuffle_oracle, simulate_inversions
from .rng import TAG_INVERSIONS, TAG_ORACLE, TAG_SAMPLER, RngStream
from .simulator import DeterministicX, SimConfig, SubsetUniform, TruncatedPoisson, predicted_verdict, simulate
from .smooth_sieve import dickman_check, largest_prime_factor_sieve

OUT_ROOT_ENV = "DICKMAN_OUT_ROOT"
SUBCOMMANDS = ("density", "sample", "classify", "simulate", "inversions", "smooth", "verify")

HEADERS = {
    "density": ["x", "rho", "p", "F"],
    "samples": ["index", "value"],
    "sim_samples": ["n", "replicate", "w"],
    "distances": ["n", "M_n", "ks", "w1", "mean", "var", "var_theory"],
    "inversions": ["replicate", "I_n"],
    "oracle": ["case", "n", "inversions", "running_sum"],
    "smooth": ["N", "s", "y", "psi", "ratio", "rho_s", "abs_error"],
    "verify": ["criterion", "name", "passed", "seconds", "detail"],
}


def fmt(v) -> str:
    """Shortest round-trip text for floats, plain text otherwise."""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return str(int(v))
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_json(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# --- subcommand bodies: (config, seed, workers, out_dir) -> exit status ---


def run_density(cfg, seed, workers, out):
    params = DickmanParams(cfg.theta)
    build = cdf_via_recursion if cfg.method == "recursion" else build_tables
    table = build(params, cfg.x_max, cfg.tol)
    count = int(np.floor(cfg.x_max * cfg.points_per_unit + 1e-9))
    x = np.arange(1, count + 1) / cfg.points_per_unit
    write_csv(out / "density.csv", HEADERS["density"],
              zip(x, table.rho(x), table.density(x), table.cdf(x)))
    return {"achieved_error": table.achieved_error, "method": table.method}


def run_sample(cfg, seed, workers, out):
    stream = RngStream(seed, 0, (TAG_SAMPLER,))
    batch = sample_gd(cfg.theta, cfg.mixing.build(), cfg.tol, stream, cfg.count, workers)
    write_csv(out / "samples.csv", HEADERS["samples"], enumerate(batch.values))
    return {"bias_bound": batch.bias_bound, "mean": float(np.mean(batch.values)),
            "var": float(np.var(batch.values, ddof=1)) if cfg.count > 1 else 0.0}


def run_classify(cfg, seed, workers, out):
    from .classifier import classify_shuffle, classify_theorem2
    from .inversions import scheme_to_limit_inputs

    if cfg.scheme is not None:
        if cfg.mu is not None or cfg.p is not None:
            raise ConfigValidationError("give either scheme or mu/p, not both")
        verdict = classify_shuffle(*scheme_to_limit_inputs(cfg.scheme.build()))
    else:
        missing = [k for k in ("mu", "p") if getattr(cfg, k) is None]
        if missing:
            raise ConfigValidationError(f"missing keys: {', '.join(missing)}")
        verdict = classify_theorem2(cfg.mu.build(), cfg.p.build())
    record = verdict.to_record()
    write_json(out / "verdict.json", record)
    print(json.dumps(record))
    return {"verdict": record}


def build_model(spec):
    if spec.variant == "deterministic":
        return DeterministicX(spec.mu.build(), spec.p.build())
    if spec.variant == "subset_uniform":
        return SubsetUniform(spec.scheme.build())
    return TruncatedPoisson(spec.theta0)


def run_simulate(cfg, seed, workers, out):
    model = build_model(cfg.model)
    verdict = predicted_verdict(model)
    result = simulate(SimConfig(model, tuple(cfg.n_grid), cfg.replicates, seed), verdict, workers)
    write_csv(out / "samples.csv", HEADERS["sim_samples"],
              ((n, r, w) for n in result.n_grid for r, w in enumerate(result.samples[n])))
    rows = []
    for n in result.n_grid:
        d = result.distances[n]
        rows.append((n, result.masses[n], d["ks"], d["w1"], d["mean"], d["var"], d["var_theory"]))
    write_csv(out / "distances.csv", HEADERS["distances"], rows)
    write_json(out / "verdict.json", verdict.to_record())
    return {"verdict": verdict.to_record()}


def run_inversions(cfg, seed, workers, out):
    scheme = cfg.scheme.build()
    run = simulate_inversions(scheme, cfg.n, cfg.replicates, RngStream(seed, 0, (TAG_INVERSIONS,)), workers)
    write_csv(out / "inversions.csv", HEADERS["inversions"], enumerate(run.samples))
    summary = {"n": cfg.n, "mean_model": run.mean_model, "mean": float(np.mean(run.samples))}
    if cfg.oracle_cases:
        rows, agree = [], 0
        for case in range(cfg.oracle_cases):
            outcome = shuffle_oracle(scheme, cfg.n, RngStream(seed, case, (TAG_ORACLE,)))
            agree += outcome.inversions == outcome.running_sum
            rows.append((case, cfg.n, outcome.inversions, outcome.running_sum))
        write_csv(out / "oracle.csv", HEADERS["oracle"], rows)
        summary["oracle_agreement"] = f"{agree}/{cfg.oracle_cases}"
    write_json(out / "summary.json", summary)
    return summary


def run_smooth(cfg, seed, workers, out):
    values = cfg.s if isinstance(cfg.s, list) else [cfg.s]
    lpf = largest_prime_factor_sieve(cfg.N)
    counts = [dickman_check(cfg.N, s, lpf) for s in values]
    write_csv(out / "smooth.csv", HEADERS["smooth"],
              ((c.N, s, c.y, c.psi, c.ratio, c.rho_s, c.abs_error) for s, c in zip(values, counts)))
    records = [dict(c.to_record(), s=s) for s, c in zip(values, counts)]
    write_json(out / "smooth.json", records if isinstance(cfg.s, list) else records[0])
    return {}


def run_verify(cfg, seed, workers, out):
    from .acceptance import run_all

    results = run_all(cfg.criteria, seed=seed, workers=workers, echo=True)
    write_csv(out / "verify.csv", HEADERS["verify"],
              ((r.number, r.name, r.passed, round(r.seconds, 3), r.detail) for r in results))
    return {"passed": sum(r.passed for r in results), "total": len(results),
            "exit": 0 if all(r.passed for r in results) else 1}


RUNNERS = {
    "density": run_density,
    "sample": run_sample,
    "classify": run_classify,
    "simulate": run_simulate,
    "inversions": run_inversions,
    "smooth": run_smooth,
    "verify": run_verify,
}


def load_config(subcommand: str, path: str | None) -> dict:
    """Read a config file; a run manifest is unwrapped to its config echo."""
    if path is None:
        if subcommand == "verify":
            return {}
        raise ConfigValidationError("--config is required")
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigValidationError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigValidationError(f"config {path} is not valid JSON: {exc}") from None
    if isinstance(data, dict) and "subcommand" in data and "config" in data and "master_seed" in data:
        if data["subcommand"] != subcommand:
            raise ConfigValidationError(
                f"manifest belongs to subcommand {data['subcommand']!r}, not {subcommand!r}")
        data = data["config"]
    return data


def default_seed(subcommand: str) -> int:
    if subcommand == "verify":
        from .acceptance import ACCEPTANCE_SEED

        return ACCEPTANCE_SEED
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dickman", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config or a previous run's manifest.json")
        p.add_argument("--out", help=f"output root (default ${OUT_ROOT_ENV} or ./runs)")
        p.add_argument("--seed", type=int, help="64-bit master seed, overrides the config")
        p.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    return parser


def run(subcommand: str, config_path: str | None, out_root: str | None,
        seed: int | None = None, threads: int = 1) -> int:
    data = load_config(subcommand, config_path)
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise ConfigValidationError("--seed must be an unsigned 64-bit integer")
        data = dict(data, seed=seed)
    cfg = parse_config(subcommand, data)
    if threads < 1:
        raise ConfigValidationError("--threads must be at least 1")
    master_seed = cfg.seed if cfg.seed is not None else default_seed(subcommand)
    cfg = cfg.model_copy(update={"seed": master_seed})

    root = Path(out_root or os.environ.get(OUT_ROOT_ENV) or "runs")
    target = root / f"{subcommand}-{master_seed}"
    if target.exists():
        raise ConfigValidationError(f"output directory {target} already exists; refusing to overwrite")
    staging = root / f".{subcommand}-{master_seed}.partial"
    if staging.exists():
        shutil.rmtree(staging)
    staging.mkdir(parents=True)

    started = _now()
    try:
        extra = RUNNERS[subcommand](cfg, master_seed, threads, staging)
    except BaseException:
        shutil.rmtree(staging, ignore_errors=True)
        raise
    status = extra.pop("exit", 0)
    manifest = {
        "subcommand": subcommand,
        "config": cfg.model_dump(mode="json"),
        "master_seed": master_seed,
        "version": __version__,
        "threads": threads,
        "started": started,
        "finished": _now(),
        "results": extra,
    }
    write_json(staging / "manifest.json", manifest)
    staging.rename(target)
    print(f"wrote {target}")
    return status


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args.subcommand, args.config, args.out, args.seed, args.threads)
    except (ConfigValidationError, ParameterDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CapabilityError, AccuracyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
