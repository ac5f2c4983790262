"""Fit a symbolic drift field on the identity scenario and transport with it.

Walks the whole pipeline: straight-line supervision dataset, sparse fit with
SR3, a look at the recovered symbolic field, ODE transport, and the W2 score
against the analytic target, plus the step-count sweep with both integrators.
"""

import numpy as np

from bridgekit.bench import convergence_sweep
from bridgekit.dynamics import IntegratorConfig, transport_samples
from bridgekit.features import FeatureLibrary, describe
from bridgekit.gauss import bures_w2, empirical_moments, make_scenario, sample
from bridgekit.interp import Interpolant
from bridgekit.sindyfm import build_dataset, count_active, fit
from bridgekit.sparsereg import SparseSolverConfig

pair = make_scenario("identity", 5, 0.1, seed=11)
rng = np.random.default_rng(202)

print("building 5e4 straight-line trajectories with two time stamps each ...")
ds = build_dataset(pair, Interpolant("linear"), 50_000, 2, rng)

lib = FeatureLibrary("affine_time_poly", dim=5, time_degree=2)
model = fit(ds, lib, SparseSolverConfig(method="sr3", threshold=0.10, nu=1e-2))
meta = model.fit_meta
print(f"fit done in {meta['train_seconds']:.2f}s: loss={meta['training_loss']:.4f}, "
      f"active={count_active(model.W)} of {model.W.size} coefficients\n")

print("recovered field, first two output dimensions:")
for line in describe(lib, model.W, zero_tol=1e-8)[:2]:
    print("  d/dt x :", line)
print()

x0 = sample(pair, "source", 10_000, rng)
for method in ("euler", "rk4"):
    cloud = transport_samples(model, x0, IntegratorConfig(method, 20))
    mean, cov = empirical_moments(cloud)
    w2 = bures_w2(mean, cov, pair.mu1, pair.sigma1)
    print(f"transport with {method:5s} K=20 -> W2 to target = {w2:.4f}")

print("\nstep-count sweep (shared evaluation draws):")
for method in ("euler", "rk4"):
    rows = convergence_sweep(model, pair, [5, 10, 20, 50, 100, 200], 10_000, method=method, seed=77)
    pretty = "  ".join(f"K={s}:{w:.4f}" for s, w in rows)
    print(f"  {method:5s} {pretty}")
print("\neuler carries a visible O(1/K) contraction bias; rk4 is already on")
print("the model-error floor at K=20, the 'diminishing returns' regime.")
