"""Latent-pair files: feed externally encoded endpoint pairs into the fit.

Writes a binary pair file (here: synthetic 8-d 'latents' related by a known
quadratic map), ingests it back, fits a quadratic symbolic translator on the
pairs, and checks the transported cloud against the target moments.
"""

import tempfile
from pathlib import Path

import numpy as np

from bridgekit.bench import ingest_latent_pairs, write_latent_pairs
from bridgekit.dynamics import IntegratorConfig, transport_samples
from bridgekit.features import FeatureLibrary, feature_count
from bridgekit.gauss import bures_w2, empirical_moments
from bridgekit.interp import Interpolant
from bridgekit.sindyfm import build_dataset, count_active, fit
from bridgekit.sparsereg import SparseSolverConfig

rng = np.random.default_rng(5)
DIM = 8
N_PAIRS = 120_000

# Synthetic latent pairs: target = 0.6 * source + 0.15 * source^2 - 0.8.
X0 = rng.standard_normal((N_PAIRS, DIM)).astype(np.float32)
X1 = (0.6 * X0 + 0.15 * X0**2 - 0.8).astype(np.float32)

path = Path(tempfile.mkdtemp(prefix="bridgekit_demo_")) / "latents.bklp"
write_latent_pairs(path, X0, X1)
print(f"wrote {N_PAIRS} pairs at dim {DIM} -> {path} ({path.stat().st_size / 1e6:.1f} MB)")

sampler = ingest_latent_pairs(path, expected_dim=DIM)
ds = build_dataset(sampler, Interpolant("linear"), N_PAIRS, 3, np.random.default_rng(6))
print(f"dataset: {ds.X.shape[0]} rows (three time stamps per pair)")

# Quadratic state library with {1, t, t^2}: the 'rich' tensor-product basis.
lib = FeatureLibrary("monomial_tensor", dim=DIM, state_degree=2, time_degree=2)
print(f"library size p = {feature_count(lib)}")
model = fit(ds, lib, SparseSolverConfig(method="sr3", threshold=0.02, nu=0.05))
print(f"fit: loss={model.fit_meta['training_loss']:.5f}, "
      f"active={count_active(model.W)} of {model.W.size}")

holdout = rng.standard_normal((10_000, DIM))
cloud = transport_samples(model, holdout, IntegratorConfig("rk4", 20))
target = 0.6 * holdout + 0.15 * holdout**2 - 0.8
w2 = bures_w2(*empirical_moments(cloud), *empirical_moments(target))
print(f"moment-level W2 between transported holdout and true images: {w2:.4f}")
