"""Command-line interface.

Subcommands:
    bridgekit fit --config cfg.toml --out model.json
    bridgekit transport --model model.json --n 1000 --steps 20 --out cloud.csv
    bridgekit sweep --model model.json --steps 5,10,20,50,100,200 --out sweep.csv
    bridgekit bench --config cfg.toml --out report.csv

The BRIDGEKIT_SEED environment variable overrides every config seed.  On
failure a machine-readable JSON line goes to stderr and the exit code is
nonzero.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from bridgekit import bench
from bridgekit.bench import (
    config_from_dict,
    emit_report,
    ingest_latent_pairs,
    load_config_dict,
    run_benchmark,
)
from bridgekit.dynamics import IntegratorConfig, transport_samples
from bridgekit.features import FeatureLibrary
from bridgekit.gauss import make_scenario, sample
from bridgekit.interp import Interpolant
from bridgekit.sindyfm import build_dataset, deserialize, fit, serialize
from bridgekit.sparsereg import SparseSolverConfig


def _env_seed() -> int | None:
    raw = os.environ.get("BRIDGEKIT_SEED")
    return None if raw in (None, "") else int(raw)


def _scenario_pair(doc: dict):
    return make_scenario(
        doc["name"],
        int(doc["dim"]),
        float(doc.get("mean_scale", 1.0)),
        (float(doc.get("spectrum_lo", 0.3)), float(doc.get("spectrum_hi", 3.0))),
        int(doc.get("seed", 0)),
    )


def _cmd_fit(args) -> int:
    doc = load_config_dict(args.config)
    seed = _env_seed()
    if seed is None:
        seed = int(doc.get("seed", 0))
    scenario = doc["scenario"]
    pair = _scenario_pair(scenario)

    lib_doc = doc.get("library", {})
    lib = FeatureLibrary(
        kind=lib_doc.get("kind", "affine_time_poly"),
        dim=pair.dim,
        state_degree=lib_doc.get("state_degree"),
        time_degree=int(lib_doc.get("time_degree", 2)),
    )
    solver_doc = doc.get("solver", {})
    cfg = SparseSolverConfig(
        method=solver_doc.get("method", "sr3"),
        threshold=float(solver_doc.get("threshold", 0.10)),
        ridge=float(solver_doc.get("ridge", 1e-10)),
        nu=float(solver_doc.get("nu", 1e-2)),
        max_iter=int(solver_doc.get("max_iter", 100)),
        tol=float(solver_doc.get("tol", 1e-8)),
    )
    train = doc.get("train", {})
    rng = np.random.default_rng(seed)
    ds = build_dataset(
        pair,
        Interpolant("linear"),
        int(train.get("n_trajectories", 50_000)),
        int(train.get("points_per_traj", 2)),
        rng,
    )
    model = fit(ds, lib, cfg)
    model.fit_meta["scenario"] = dict(scenario)
    model.fit_meta["seed"] = seed
    with open(args.out, "w") as fh:
        fh.write(serialize(model))
        fh.write("\n")
    print(f"wrote {args.out}: active={model.fit_meta['active_count']} "
          f"loss={model.fit_meta['training_loss']:.6g}")
    return 0


def _load_model(path):
    return deserialize(open(path).read())


def _source_draws(model, args, n, rng):
    if getattr(args, "source", None):
        sampler = ingest_latent_pairs(args.source, expected_dim=model.library.dim)
        return sampler.sample_pairs(n, rng)[0]
    scenario = model.fit_meta.get("scenario")
    if not scenario:
        raise ValueError(
            "model carries no scenario metadata; pass --source <latents.bklp> instead"
        )
    return sample(_scenario_pair(scenario), "source", n, rng)


def _cmd_transport(args) -> int:
    model = _load_model(args.model)
    seed = _env_seed()
    if seed is None:
        seed = int(args.seed)
    rng = np.random.default_rng(seed)
    x0 = _source_draws(model, args, args.n, rng)
    cloud = transport_samples(model, x0, IntegratorConfig(method=args.method, steps=args.steps))
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(cloud.shape[1])])
        writer.writerows(cloud.tolist())
    print(f"wrote {args.out}: {len(cloud)} transported samples")
    return 0


def _cmd_sweep(args) -> int:
    model = _load_model(args.model)
    seed = _env_seed()
    if seed is None:
        seed = int(args.seed)
    scenario = model.fit_meta.get("scenario")
    if not scenario:
        raise ValueError("model carries no scenario metadata; sweep needs a Gaussian target")
    pair = _scenario_pair(scenario)
    steps_list = [int(s) for s in args.steps.split(",") if s.strip()]
    rows = bench.convergence_sweep(
        model, pair, steps_list, args.n, method=args.method, seed=seed
    )
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["steps", "w2"])
        writer.writerows(rows)
    print(f"wrote {args.out}: {len(rows)} step counts")
    return 0


def _cmd_bench(args) -> int:
    cfg = config_from_dict(load_config_dict(args.config))
    seed = _env_seed()
    if seed is not None:
        cfg.seed = seed
    rows = run_benchmark(cfg)
    fmt = "json" if str(args.out).endswith(".json") else "csv"
    emit_report(rows, fmt, args.out)
    n_err = sum(1 for r in rows if r.error)
    print(f"wrote {args.out}: {len(rows)} rows ({n_err} errors)")
    return 1 if n_err else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bridgekit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a symbolic drift from a scenario config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("transport", help="transport source samples with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--method", choices=("euler", "rk4"), default="euler")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--source", help="latent-pair file to draw sources from")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_transport)

    p = sub.add_parser("sweep", help="W2 versus integrator step count")
    p.add_argument("--model", required=True)
    p.add_argument("--steps", default="5,10,20,50,100,200")
    p.add_argument("--n", type=int, default=10_000)
    p.add_argument("--method", choices=("euler", "rk4"), default="euler")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("bench", help="run a scenario-by-method benchmark grid")
    p.add_argument("--config", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
