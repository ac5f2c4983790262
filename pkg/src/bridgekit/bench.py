"""Benchmark harness: scenario sweeps, convergence sweeps, latent-pair files,
and machine-readable reports.

A benchmark run is a grid of (scenario x method) cells.  Every cell trains
its model, transports fresh source draws, fits Gaussian moments to the
transported cloud, and scores it against the analytic target with the
closed-form W2.  Rows come out in config order; failures become error rows
and the run continues.  All randomness derives from (master seed, cell
index), so repeated runs agree bit for bit except for wall-clock timings.
"""

from __future__ import annotations

import csv
import json
import struct
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from bridgekit import neural
from bridgekit.dynamics import IntegratorConfig, euler_maruyama, transport_samples
from bridgekit.features import FeatureLibrary
from bridgekit.gauss import GaussianPair, bures_w2, empirical_moments, make_scenario, sample
from bridgekit.interp import Interpolant
from bridgekit.sindyfm import build_dataset, count_active, fit
from bridgekit.sparsereg import SparseSolverConfig

METHOD_NAMES = ("sindy_fm", "dsbm", "dsbm_pretrained")

LATENT_MAGIC = b"BKLP"
LATENT_VERSION = 1


# ---------------------------------------------------------------------------
# Latent-pair files

class LatentFileError(ValueError):
    """Base class for latent-pair file problems."""


class LatentMagicError(LatentFileError):
    pass


class LatentDimError(LatentFileError):
    pass


class LatentTruncatedError(LatentFileError):
    pass


class LatentPairSampler:
    """Endpoint pairs loaded from a file; draws are with replacement.

    Exposes the same pair-sampling surface as a GaussianPair adapter, so
    dataset construction and bridge training consume it unchanged.
    """

    def __init__(self, X0: np.ndarray, X1: np.ndarray):
        X0 = np.asarray(X0)
        X1 = np.asarray(X1)
        if X0.shape != X1.shape or X0.ndim != 2:
            raise ValueError(f"endpoint arrays must share a 2-d shape, got {X0.shape} vs {X1.shape}")
        self.X0 = X0
        self.X1 = X1

    @property
    def dim(self) -> int:
        return self.X0.shape[1]

    @property
    def n_pairs(self) -> int:
        return self.X0.shape[0]

    def sample_pairs(self, n: int, rng: np.random.Generator):
        idx = rng.integers(0, self.n_pairs, size=n)
        return self.X0[idx].astype(float), self.X1[idx].astype(float)

    def pairs(self):
        """The raw stored pairs, in file order."""
        return self.X0, self.X1


def write_latent_pairs(path, X0: np.ndarray, X1: np.ndarray) -> None:
    """Write the binary pair file: magic 'BKLP', u32 version=1, u32 dim,
    u64 n_pairs, then per pair the source and target vectors as little-endian
    float32."""
    X0 = np.ascontiguousarray(np.asarray(X0, dtype="<f4"))
    X1 = np.ascontiguousarray(np.asarray(X1, dtype="<f4"))
    if X0.shape != X1.shape or X0.ndim != 2:
        raise ValueError("X0 and X1 must share a 2-d shape")
    n, d = X0.shape
    records = np.empty((n, 2 * d), dtype="<f4")
    records[:, :d] = X0
    records[:, d:] = X1
    with open(path, "wb") as fh:
        fh.write(LATENT_MAGIC)
        fh.write(struct.pack("<IIQ", LATENT_VERSION, d, n))
        fh.write(records.tobytes())


def ingest_latent_pairs(path, expected_dim: int | None = None) -> LatentPairSampler:
    """Parse a latent-pair file; magic, dimension, and payload-length problems
    raise distinct errors."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 4 or data[:4] != LATENT_MAGIC:
        raise LatentMagicError(f"bad magic in {path}: expected {LATENT_MAGIC!r}")
    if len(data) < 20:
        raise LatentTruncatedError(f"{path}: header truncated ({len(data)} bytes)")
    version, dim, n_pairs = struct.unpack("<IIQ", data[4:20])
    if version != LATENT_VERSION:
        raise LatentFileError(f"{path}: unsupported version {version}")
    if dim < 1:
        raise LatentDimError(f"{path}: declared dim {dim} is invalid")
    if expected_dim is not None and dim != expected_dim:
        raise LatentDimError(f"{path}: declared dim {dim}, expected {expected_dim}")
    need = n_pairs * 2 * dim * 4
    payload = data[20:]
    if len(payload) < need:
        raise LatentTruncatedError(f"{path}: payload has {len(payload)} bytes, needs {need}")
    records = np.frombuffer(payload[:need], dtype="<f4").reshape(n_pairs, 2 * dim)
    return LatentPairSampler(records[:, :dim].copy(), records[:, dim:].copy())


# ---------------------------------------------------------------------------
# Experiment configuration

@dataclass(frozen=True)
class ScenarioSpec:
    name: str
    dim: int
    mean_scale: float = 1.0
    spectrum_lo: float = 0.3
    spectrum_hi: float = 3.0
    seed: int = 0

    def build(self) -> GaussianPair:
        return make_scenario(
            self.name, self.dim, self.mean_scale,
            (self.spectrum_lo, self.spectrum_hi), self.seed,
        )


@dataclass
class ExperimentConfig:
    scenarios: list
    methods: list
    n_train_trajectories: int = 50_000
    points_per_traj: int = 2
    n_eval_samples: int = 10_000
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    method_params: dict = field(default_factory=dict)
    seed: int = 0
    output: str | None = None

    def __post_init__(self):
        for m in self.methods:
            if m not in METHOD_NAMES:
                raise ValueError(f"unknown method {m!r}; expected one of {METHOD_NAMES}")


def _scenario_from_dict(doc: dict) -> ScenarioSpec:
    return ScenarioSpec(
        name=doc["name"],
        dim=int(doc["dim"]),
        mean_scale=float(doc.get("mean_scale", 1.0)),
        spectrum_lo=float(doc.get("spectrum_lo", 0.3)),
        spectrum_hi=float(doc.get("spectrum_hi", 3.0)),
        seed=int(doc.get("seed", 0)),
    )


def config_from_dict(doc: dict) -> ExperimentConfig:
    integ = doc.get("integrator", {})
    return ExperimentConfig(
        scenarios=[_scenario_from_dict(s) for s in doc.get("scenarios", [])],
        methods=list(doc.get("methods", [])),
        n_train_trajectories=int(doc.get("n_train_trajectories", 50_000)),
        points_per_traj=int(doc.get("points_per_traj", 2)),
        n_eval_samples=int(doc.get("n_eval_samples", 10_000)),
        integrator=IntegratorConfig(
            method=integ.get("method", "euler"),
            steps=int(integ.get("steps", 20)),
            t_start=float(integ.get("t_start", 0.0)),
            t_end=float(integ.get("t_end", 1.0)),
        ),
        method_params=dict(doc.get("method_params", {})),
        seed=int(doc.get("seed", 0)),
        output=doc.get("output"),
    )


def load_config_dict(path) -> dict:
    """Parse a TOML or JSON config file into a plain dict."""
    text = open(path, "rb").read()
    if str(path).endswith(".json"):
        return json.loads(text.decode())
    try:
        import tomllib  # py >= 3.11
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib.loads(text.decode())


def load_config(path) -> ExperimentConfig:
    return config_from_dict(load_config_dict(path))


# ---------------------------------------------------------------------------
# Metrics

@dataclass
class MetricsRow:
    scenario: str
    dim: int
    mean_scale: float
    method: str
    w2: float | None = None
    w2_backward: float | None = None
    train_seconds: float | None = None
    pretrain_seconds: float | None = None
    inference_seconds_per_sample: float | None = None
    active_params: int | None = None
    integrator: str = "euler"
    steps: int = 20
    seed: int = 0
    error: str | None = None


def emit_report(rows: list, fmt: str, path) -> None:
    """Write rows as CSV (header = field names, declared order) or JSON."""
    if fmt not in ("csv", "json"):
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")
    names = [f.name for f in fields(MetricsRow)]
    if fmt == "csv":
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(names)
            for row in rows:
                doc = asdict(row)
                writer.writerow(["" if doc[n] is None else doc[n] for n in names])
    else:
        with open(path, "w") as fh:
            json.dump([asdict(row) for row in rows], fh, indent=2)
            fh.write("\n")


def read_report_json(path) -> list:
    return [MetricsRow(**doc) for doc in json.load(open(path))]


# ---------------------------------------------------------------------------
# Benchmark cells

def _auto_time_degree(spec: ScenarioSpec) -> int:
    # The affine drift of the identity family is time-constant at heart; in
    # high dimension the quadratic time block only adds prunable columns.
    return 1 if (spec.name == "identity" and spec.dim >= 20) else 2


def _sindy_library(spec: ScenarioSpec, params: dict) -> FeatureLibrary:
    kind = params.get("library_kind", "affine_time_poly")
    degree = params.get("time_degree", "auto")
    time_degree = _auto_time_degree(spec) if degree == "auto" else int(degree)
    state_degree = params.get("state_degree")
    return FeatureLibrary(
        kind=kind,
        dim=spec.dim,
        state_degree=None if state_degree is None else int(state_degree),
        time_degree=time_degree,
    )


def _solver_config(params: dict) -> SparseSolverConfig:
    doc = dict(params.get("solver", {}))
    return SparseSolverConfig(
        method=doc.get("method", "sr3"),
        threshold=float(doc.get("threshold", 0.10)),
        ridge=float(doc.get("ridge", 1e-10)),
        nu=float(doc.get("nu", 1e-2)),
        max_iter=int(doc.get("max_iter", 100)),
        tol=float(doc.get("tol", 1e-8)),
        prox=doc.get("prox", "hard"),
        normalize_columns=bool(doc.get("normalize_columns", False)),
    )


def _run_sindy_cell(pair, spec, cfg: ExperimentConfig, params: dict, rng) -> dict:
    lib = _sindy_library(spec, params)
    start = time.perf_counter()
    ds = build_dataset(
        pair, Interpolant("linear"), cfg.n_train_trajectories, cfg.points_per_traj, rng
    )
    model = fit(ds, lib, _solver_config(params))
    train_seconds = time.perf_counter() - start

    x0 = sample(pair, "source", cfg.n_eval_samples, rng)
    start = time.perf_counter()
    cloud = transport_samples(model, x0, cfg.integrator)
    inference = (time.perf_counter() - start) / max(len(x0), 1)
    mean, cov = empirical_moments(cloud)
    return {
        "w2": bures_w2(mean, cov, pair.mu1, pair.sigma1),
        "train_seconds": train_seconds,
        "inference_seconds_per_sample": inference,
        "active_params": count_active(model.W),
        "model": model,
    }


def _run_dsbm_cell(pair, spec, cfg: ExperimentConfig, params: dict, rng, pretrain_on) -> dict:
    sigma = float(params.get("sigma", 1.0))
    hidden = tuple(params.get("hidden", (64, 64)))
    em_steps = int(params.get("em_steps", 100))
    pretrained = None
    pretrain_seconds = None
    if pretrain_on or params.get("pretrain", False):
        start = time.perf_counter()
        schedule = neural.DdpmSchedule(
            beta_start=float(params.get("beta_start", 1e-4)),
            beta_end=float(params.get("beta_end", 0.02)),
            n_steps=int(params.get("ddpm_steps", 100)),
        )
        x0 = sample(pair, "source", int(params.get("pretrain_trajectories", 512)), rng)
        traj = neural.ddpm_forward_trajectories(schedule, x0, rng)
        net_f = neural.init_mlp(pair.dim, hidden, "tanh", "forward", rng)
        net_b = neural.init_mlp(pair.dim, hidden, "tanh", "backward", rng)
        net_f, net_b, _ = neural.pretrain(
            net_f, net_b, traj,
            epochs=int(params.get("pretrain_epochs", 3)),
            lr=float(params.get("lr", 1e-3)),
            rng=rng,
        )
        pretrained = (net_f, net_b)
        pretrain_seconds = time.perf_counter() - start

    start = time.perf_counter()
    net_fwd, net_bwd, _metrics = neural.dsbm_train(
        pair,
        sigma=sigma,
        n_imf_iters=int(params.get("n_imf_iters", 4)),
        inner_epochs=int(params.get("inner_epochs", 40)),
        eps_clip=float(params.get("eps_clip", 1e-3)),
        rng=rng,
        pretrained=pretrained,
        hidden=hidden,
        n_pairs=int(params.get("n_pairs", 4096)),
        batch_size=int(params.get("batch_size", 256)),
        lr=float(params.get("lr", 1e-3)),
        em_steps=em_steps,
        n_eval=int(params.get("n_eval", 2048)),
    )
    train_seconds = time.perf_counter() - start

    x0 = sample(pair, "source", cfg.n_eval_samples, rng)
    em_rng = np.random.default_rng(rng.integers(2**63))
    start = time.perf_counter()
    cloud = euler_maruyama(net_fwd, sigma, x0, em_steps, em_rng)
    inference = (time.perf_counter() - start) / max(len(x0), 1)
    mean, cov = empirical_moments(cloud)
    w2_fwd = bures_w2(mean, cov, pair.mu1, pair.sigma1)

    x1 = sample(pair, "target", cfg.n_eval_samples, rng)
    back = euler_maruyama(net_bwd, sigma, x1, em_steps, em_rng, reverse_time=True)
    mean_b, cov_b = empirical_moments(back)
    w2_bwd = bures_w2(mean_b, cov_b, pair.mu0, pair.sigma0)
    return {
        "w2": w2_fwd,
        "w2_backward": w2_bwd,
        "train_seconds": train_seconds,
        "pretrain_seconds": pretrain_seconds,
        "inference_seconds_per_sample": inference,
        "active_params": net_fwd.param_count,
        "nets": (net_fwd, net_bwd),
    }


def run_benchmark(cfg: ExperimentConfig) -> list:
    """Run every (scenario x method) cell; failures become error rows."""
    rows = []
    cell_index = 0
    for spec in cfg.scenarios:
        for method in cfg.methods:
            row = MetricsRow(
                scenario=spec.name,
                dim=spec.dim,
                mean_scale=spec.mean_scale,
                method=method,
                integrator=cfg.integrator.method,
                steps=cfg.integrator.steps if method == "sindy_fm" else int(
                    cfg.method_params.get(method, {}).get("em_steps", 100)
                ),
                seed=cfg.seed,
            )
            rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, cell_index]))
            params = dict(cfg.method_params.get(method, {}))
            try:
                pair = spec.build()
                if method == "sindy_fm":
                    result = _run_sindy_cell(pair, spec, cfg, params, rng)
                else:
                    result = _run_dsbm_cell(
                        pair, spec, cfg, params, rng, pretrain_on=(method == "dsbm_pretrained")
                    )
                row.w2 = result["w2"]
                row.w2_backward = result.get("w2_backward")
                row.train_seconds = result["train_seconds"]
                row.pretrain_seconds = result.get("pretrain_seconds")
                row.inference_seconds_per_sample = result["inference_seconds_per_sample"]
                row.active_params = result["active_params"]
            except Exception as exc:  # per-cell failure; keep going
                row.error = f"{type(exc).__name__}: {exc}"
            rows.append(row)
            cell_index += 1
    return rows


def convergence_sweep(
    model,
    pair: GaussianPair,
    steps_list: list,
    n_eval: int,
    *,
    method: str = "euler",
    seed: int = 0,
) -> list:
    """W2 against the analytic target for each integrator step count.

    The evaluation draws share one seed across entries, so only the
    discretization varies.  Returns [(steps, w2), ...] in input order.
    """
    if len(steps_list) == 0:
        raise ValueError("steps_list must be non-empty")
    if any(b <= a for a, b in zip(steps_list, steps_list[1:])):
        raise ValueError("steps_list must be ascending")
    x0 = sample(pair, "source", n_eval, np.random.default_rng(seed))
    out = []
    for steps in steps_list:
        cloud = transport_samples(model, x0, IntegratorConfig(method=method, steps=int(steps)))
        mean, cov = empirical_moments(cloud)
        out.append((int(steps), bures_w2(mean, cov, pair.mu1, pair.sigma1)))
    return out
