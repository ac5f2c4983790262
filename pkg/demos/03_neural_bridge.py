"""Desk-scale neural bridge baseline on a 1-d Gaussian shift.

Trains the forward/backward drift networks by iterative Markovian fitting,
starting from the reference coupling X1 = X0 + sigma Z, and prints the
transported W2 after each iteration for both directions.
"""

import numpy as np

from bridgekit.neural import dsbm_train


class ShiftSampler:
    """Endpoint pairs for N(0,1) -> N(2,1)."""

    dim = 1

    def sample_pairs(self, n, rng):
        return rng.standard_normal((n, 1)), 2.0 + rng.standard_normal((n, 1))


print("training DSBM baseline: 1-d shift N(0,1) -> N(2,1), sigma=1, 4 IMF iterations")
net_fwd, net_bwd, metrics = dsbm_train(
    ShiftSampler(),
    sigma=1.0,
    n_imf_iters=4,
    inner_epochs=40,
    rng=np.random.default_rng(7),
    hidden=(64, 64),
    n_pairs=4096,
    em_steps=100,
    n_eval=4096,
)

print(f"\nnetwork size: {net_fwd.param_count} parameters per direction\n")
print(f"{'iter':>4s} {'W2 forward':>12s} {'W2 backward':>12s} {'seconds':>9s}")
for row in metrics:
    label = "ref" if row["iteration"] == 0 else str(row["iteration"])
    print(f"{label:>4s} {row['w2_forward']:12.4f} {row['w2_backward']:12.4f} {row['seconds']:9.2f}")

print("\niteration 0 is the reference coupling itself; each Markovian")
print("projection pulls the transported cloud toward the target marginal.")
