"""Tour of the five Gaussian transport scenarios and the closed-form W2 metric.

Builds each covariance scenario, samples both marginals, and shows that the
Gaussian-fit evaluation (empirical moments + Bures-Wasserstein) recovers the
analytic endpoint distance.
"""

import numpy as np

from bridgekit.gauss import SCENARIOS, bures_w2, empirical_moments, make_scenario, sample

SEED = 0
DIM = 5
MEAN_SCALE = 1.0

print(f"=== scenarios at dim={DIM}, mean_scale={MEAN_SCALE} ===\n")
for name in SCENARIOS:
    pair = make_scenario(name, DIM, MEAN_SCALE, seed=SEED)
    ev0 = np.linalg.eigvalsh(pair.sigma0)
    ev1 = np.linalg.eigvalsh(pair.sigma1)
    analytic = bures_w2(pair.mu0, pair.sigma0, pair.mu1, pair.sigma1)

    rng = np.random.default_rng(SEED + 1)
    x0 = sample(pair, "source", 50_000, rng)
    mean, cov = empirical_moments(x0)
    empirical = bures_w2(mean, cov, pair.mu1, pair.sigma1)

    print(f"{name:15s} cond(S0)={ev0.max() / ev0.min():8.1f}  cond(S1)={ev1.max() / ev1.min():8.1f}")
    print(f"{'':15s} W2(p0, p1) analytic = {analytic:.4f}   from 5e4 samples = {empirical:.4f}\n")

print("The sampled estimate tracks the analytic value; transported clouds are")
print("scored exactly this way against the target moments.")
