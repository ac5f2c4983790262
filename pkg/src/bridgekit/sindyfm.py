"""End-to-end symbolic drift fitting from interpolated endpoint trajectories.

Pipeline: draw endpoint pairs, place m sorted uniform time stamps on each
straight-line path, record states with their exact time derivatives, then
run a sparse regression of the derivatives on a feature library.  The fitted
drift v(x, t) = W Xi(x, t) transports fresh source samples by ODE
integration (see dynamics).
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from bridgekit import sparsereg
from bridgekit.features import (
    FeatureLibrary,
    eval_feature_matrix,
    feature_count,
    library_from_dict,
    library_to_dict,
    state_block,
)
from bridgekit.gauss import GaussianPair
from bridgekit.gauss import sample as gauss_sample
from bridgekit.interp import Interpolant
from bridgekit.sparsereg import SparseSolverConfig


@dataclass
class FMDataset:
    """Flat table of (state, time, exact derivative) supervision rows.

    Rows are grouped by trajectory: n_trajectories blocks of points_per_traj
    rows each, times sorted ascending within a block.
    """

    X: np.ndarray
    T: np.ndarray
    Xdot: np.ndarray
    n_trajectories: int
    points_per_traj: int

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.T = np.asarray(self.T, dtype=float).reshape(-1)
        self.Xdot = np.asarray(self.Xdot, dtype=float)
        rows = self.n_trajectories * self.points_per_traj
        if self.X.shape[0] != rows or self.Xdot.shape != self.X.shape or self.T.shape[0] != rows:
            raise ValueError(
                f"inconsistent dataset shapes: X {self.X.shape}, Xdot {self.Xdot.shape}, "
                f"T {self.T.shape}, expected {rows} rows"
            )
        if self.T.min() < 0.0 or self.T.max() > 1.0:
            raise ValueError("times must lie in [0, 1]")
        blocks = self.T.reshape(self.n_trajectories, self.points_per_traj)
        if np.any(np.diff(blocks, axis=1) < 0):
            raise ValueError("times must be sorted ascending within each trajectory")

    @property
    def dim(self) -> int:
        return self.X.shape[1]


class _GaussianPairSampler:
    """Adapter exposing the endpoint-pair protocol for a GaussianPair."""

    def __init__(self, pair: GaussianPair):
        self.pair = pair
        self.dim = pair.dim

    def sample_pairs(self, n: int, rng: np.random.Generator):
        x0 = gauss_sample(self.pair, "source", n, rng)
        x1 = gauss_sample(self.pair, "target", n, rng)
        return x0, x1


def as_pair_sampler(source):
    """Coerce a GaussianPair or any object with sample_pairs/dim to a sampler."""
    if isinstance(source, GaussianPair):
        return _GaussianPairSampler(source)
    if hasattr(source, "sample_pairs") and hasattr(source, "dim"):
        return source
    raise TypeError(
        f"expected a GaussianPair or an object with .sample_pairs and .dim, got {type(source)!r}"
    )


def build_dataset(
    source,
    interpolant: Interpolant,
    n_trajectories: int,
    points_per_traj: int,
    rng: np.random.Generator,
) -> FMDataset:
    """Draw endpoint pairs and tabulate interpolated supervision rows.

    Only the linear interpolant is supported here: its derivative x1 - x0 is
    exact, which is the whole point of the construction.  The Brownian bridge
    has no pathwise time derivative to supervise on.
    """
    if n_trajectories < 1 or points_per_traj < 1:
        raise ValueError("need n_trajectories >= 1 and points_per_traj >= 1")
    if interpolant.kind != "linear":
        raise ValueError(
            f"dataset construction needs the linear interpolant, got {interpolant.kind!r}"
        )
    sampler = as_pair_sampler(source)
    n, m = n_trajectories, points_per_traj
    x0, x1 = sampler.sample_pairs(n, rng)
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    T = np.sort(rng.uniform(size=(n, m)), axis=1)
    states = (1.0 - T)[..., None] * x0[:, None, :] + T[..., None] * x1[:, None, :]
    deriv = np.repeat(x1 - x0, m, axis=0)
    return FMDataset(
        X=states.reshape(n * m, -1),
        T=T.reshape(-1),
        Xdot=deriv,
        n_trajectories=n,
        points_per_traj=m,
    )


@dataclass
class SymbolicDrift:
    """Fitted symbolic velocity field v(x, t) = W Xi(x, t)."""

    library: FeatureLibrary
    W: np.ndarray
    fit_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.W = np.atleast_2d(np.asarray(self.W, dtype=float))
        p = feature_count(self.library)
        if self.W.shape != (self.library.dim, p):
            raise ValueError(
                f"W shape {self.W.shape} does not match (dim, feature_count) = "
                f"({self.library.dim}, {p})"
            )

    def _blocks(self):
        # Cached split of W into per-time-power blocks for the scalar-t path.
        blocks = getattr(self, "_block_cache", None)
        if blocks is None:
            k = self.W.shape[1] // (self.library.time_degree + 1)
            blocks = [
                np.ascontiguousarray(self.W[:, r * k : (r + 1) * k])
                for r in range(self.library.time_degree + 1)
            ]
            self._block_cache = blocks
        return blocks

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        t_arr = np.asarray(t, dtype=float)
        if t_arr.ndim == 0:
            # Common time for the whole batch: collapse W Xi(x,t) to
            # (sum_r t^r W_r) Phi(x), which is what integrators hit per step.
            blocks = self._blocks()
            w_eff = blocks[0]
            tr = 1.0
            for blk in blocks[1:]:
                tr = tr * float(t_arr)
                w_eff = w_eff + tr * blk
            lib = self.library
            if lib.kind == "affine_time_poly" and lib.include_bias:
                # [X, 1] @ [A | b]^T == X @ A^T + b without materializing Phi.
                out = X @ w_eff[:, : lib.dim].T + w_eff[:, lib.dim]
            else:
                out = state_block(lib, X) @ w_eff.T
        else:
            theta = eval_feature_matrix(self.library, X, t_arr)
            out = theta @ self.W.T
        return out[0] if single else out


def count_active(W: np.ndarray, zero_tol: float = 1e-10) -> int:
    """Number of coefficients with |w| > zero_tol."""
    return int(np.count_nonzero(np.abs(np.asarray(W)) > zero_tol))


def fit(ds: FMDataset, lib: FeatureLibrary, cfg: SparseSolverConfig) -> SymbolicDrift:
    """Assemble features over the dataset and run the configured sparse solver."""
    if lib.dim != ds.dim:
        raise ValueError(f"library dim {lib.dim} != dataset dim {ds.dim}")
    if ds.X.shape[0] == 0:
        raise ValueError("empty dataset")
    start = time.perf_counter()
    theta = eval_feature_matrix(lib, ds.X, ds.T)
    W = sparsereg.solve(theta, ds.Xdot, cfg)
    elapsed = time.perf_counter() - start
    loss = float(np.mean(np.sum((theta @ W.T - ds.Xdot) ** 2, axis=1)))
    meta = {
        "solver": cfg.to_dict(),
        "training_loss": loss,
        "active_count": count_active(W),
        "train_seconds": elapsed,
        "n_rows": int(ds.X.shape[0]),
        "n_trajectories": int(ds.n_trajectories),
        "points_per_traj": int(ds.points_per_traj),
    }
    return SymbolicDrift(library=lib, W=W, fit_meta=meta)


def to_dict(model: SymbolicDrift) -> dict:
    return {
        "library": library_to_dict(model.library),
        "W": model.W.tolist(),
        "fit_meta": model.fit_meta,
    }


def from_dict(doc: dict) -> SymbolicDrift:
    if not isinstance(doc, dict) or "library" not in doc or "W" not in doc:
        raise ValueError("malformed model document: need 'library' and 'W' keys")
    lib = library_from_dict(doc["library"])
    W = np.asarray(doc["W"], dtype=float)
    W = np.atleast_2d(W)
    if W.shape != (lib.dim, feature_count(lib)):
        raise ValueError(
            f"W shape {W.shape} does not match library (dim={lib.dim}, "
            f"p={feature_count(lib)})"
        )
    return SymbolicDrift(library=lib, W=W, fit_meta=dict(doc.get("fit_meta", {})))


def serialize(model: SymbolicDrift) -> str:
    """Lossless JSON document; float repr round-trips to identical bits."""
    return json.dumps(to_dict(model), indent=2)


def deserialize(doc: str | dict) -> SymbolicDrift:
    if isinstance(doc, str):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ValueError(f"malformed model document: {exc}") from exc
    return from_dict(doc)
