"""Desk-scale neural bridge baseline with hand-written backprop and Adam.

A small feed-forward network parameterizes the drift of each transport
direction.  Training alternates Markovian projections: regress the
direction's Brownian-bridge conditional drift on bridge points of the
current coupling, then refresh the coupling by simulating the just-trained
direction with Euler-Maruyama from the matching marginal.  Iteration zero
couples endpoints by X1 = X0 + sigma Z.

Optionally, both networks are pre-trained on forward-diffusion trajectories
by regressing one-step Euler residuals on consecutive states, which warm
starts the bridge optimization.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field

import numpy as np

from bridgekit.dynamics import euler_maruyama
from bridgekit.gauss import GaussianPair, empirical_moments, bures_w2
from bridgekit.sindyfm import as_pair_sampler

ACTIVATIONS = ("tanh", "relu")
DIRECTIONS = ("forward", "backward")

DIVERGENCE_LIMIT = 1e6


class MlpDrift:
    """Feed-forward drift network; input is the state with time appended."""

    def __init__(self, layer_dims, weights, biases, activation="tanh", direction="forward"):
        if activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if direction not in DIRECTIONS:
            raise ValueError(f"direction must be one of {DIRECTIONS}")
        self.layer_dims = list(layer_dims)
        self.weights = [np.asarray(w, dtype=float) for w in weights]
        self.biases = [np.asarray(b, dtype=float) for b in biases]
        self.activation = activation
        self.direction = direction
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            if w.shape != (self.layer_dims[i + 1], self.layer_dims[i]) or b.shape != (
                self.layer_dims[i + 1],
            ):
                raise ValueError(f"layer {i} parameter shapes do not match layer_dims")

    @property
    def state_dim(self) -> int:
        return self.layer_dims[0] - 1

    @property
    def param_count(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def _act(self, z):
        return np.tanh(z) if self.activation == "tanh" else np.maximum(z, 0.0)

    def _act_deriv(self, z):
        if self.activation == "tanh":
            return 1.0 - np.tanh(z) ** 2
        return (z > 0).astype(float)

    def __call__(self, x, t):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = x[None, :] if single else x
        tcol = np.broadcast_to(np.asarray(t, dtype=float), (X.shape[0],))
        a = np.hstack([X, tcol[:, None]])
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            a = self._act(a @ w.T + b)
        out = a @ self.weights[-1].T + self.biases[-1]
        return out[0] if single else out

    def copy(self) -> "MlpDrift":
        return MlpDrift(
            self.layer_dims,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            self.activation,
            self.direction,
        )

    def to_dict(self) -> dict:
        return {
            "layer_dims": self.layer_dims,
            "activation": self.activation,
            "direction": self.direction,
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "MlpDrift":
        return cls(
            doc["layer_dims"],
            [np.array(w, dtype=float) for w in doc["weights"]],
            [np.array(b, dtype=float) for b in doc["biases"]],
            doc.get("activation", "tanh"),
            doc.get("direction", "forward"),
        )


def init_mlp(
    state_dim: int,
    hidden=(64, 64),
    activation: str = "tanh",
    direction: str = "forward",
    rng: np.random.Generator | None = None,
) -> MlpDrift:
    """Glorot-uniform initialization; biases start at zero."""
    rng = rng if rng is not None else np.random.default_rng()
    dims = [state_dim + 1] + list(hidden) + [state_dim]
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-limit, limit, size=(fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpDrift(dims, weights, biases, activation, direction)


def mlp_forward(net: MlpDrift, x, t):
    """Functional forward pass (same as calling the network)."""
    return net(x, t)


def mlp_grad(net: MlpDrift, X: np.ndarray, T, V: np.ndarray):
    """Exact gradient of mean_i ||net(x_i, t_i) - v_i||^2 w.r.t. all parameters.

    Returns (weight_grads, bias_grads) with shapes mirroring the network.
    """
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    n = X.shape[0]
    tcol = np.broadcast_to(np.asarray(T, dtype=float), (n,))
    a = np.hstack([X, tcol[:, None]])
    acts = [a]
    zs = []
    for w, b in zip(net.weights[:-1], net.biases[:-1]):
        z = acts[-1] @ w.T + b
        zs.append(z)
        acts.append(net._act(z))
    out = acts[-1] @ net.weights[-1].T + net.biases[-1]

    delta = 2.0 * (out - V) / n
    n_layers = len(net.weights)
    w_grads = [None] * n_layers
    b_grads = [None] * n_layers
    w_grads[-1] = delta.T @ acts[-1]
    b_grads[-1] = delta.sum(axis=0)
    for i in range(n_layers - 2, -1, -1):
        delta = (delta @ net.weights[i + 1]) * net._act_deriv(zs[i])
        w_grads[i] = delta.T @ acts[i]
        b_grads[i] = delta.sum(axis=0)
    return w_grads, b_grads


@dataclass
class AdamState:
    """First/second moment accumulators mirroring one parameter list."""

    m: list
    v: list
    step: int = 0
    lr: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(params, lr: float = 1e-3) -> AdamState:
    return AdamState(
        m=[np.zeros_like(p) for p in params],
        v=[np.zeros_like(p) for p in params],
        lr=lr,
    )


def adam_step(state: AdamState, params, grads):
    """One bias-corrected Adam update; returns the new parameter list."""
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        state.m[i] = b1 * state.m[i] + (1 - b1) * g
        state.v[i] = b2 * state.v[i] + (1 - b2) * g * g
        m_hat = state.m[i] / (1 - b1**state.step)
        v_hat = state.v[i] / (1 - b2**state.step)
        out.append(p - state.lr * m_hat / (np.sqrt(v_hat) + state.eps))
    return out


def _net_params(net: MlpDrift):
    return net.weights + net.biases


def _set_net_params(net: MlpDrift, params):
    k = len(net.weights)
    net.weights = list(params[:k])
    net.biases = list(params[k:])


@dataclass
class DdpmSchedule:
    """Linear variance ramp beta_t and its cumulative products.

    betas[k] = beta_start + (beta_end - beta_start) * (k+1)/n_steps for
    k = 0..n_steps-1; alpha_bars has length n_steps+1 with alpha_bars[0] = 1
    and is strictly decreasing.
    """

    beta_start: float = 1e-4
    beta_end: float = 0.02
    n_steps: int = 100
    betas: np.ndarray = field(default=None, repr=False)
    alpha_bars: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")
        if self.betas is None:
            ts = np.arange(1, self.n_steps + 1) / self.n_steps
            self.betas = self.beta_start + (self.beta_end - self.beta_start) * ts
        self.betas = np.asarray(self.betas, dtype=float)
        if np.any(self.betas <= 0) or np.any(self.betas >= 1):
            raise ValueError("betas must lie in (0, 1)")
        if self.alpha_bars is None:
            self.alpha_bars = np.concatenate([[1.0], np.cumprod(1.0 - self.betas)])
        self.alpha_bars = np.asarray(self.alpha_bars, dtype=float)
        if np.any(np.diff(self.alpha_bars) >= 0):
            raise ValueError("alpha_bars must be strictly decreasing")
        if self.alpha_bars[-1] <= 0 or self.alpha_bars[0] > 1:
            raise ValueError("alpha_bars must lie in (0, 1]")


def ddpm_forward_trajectories(
    schedule: DdpmSchedule, X0: np.ndarray, rng: np.random.Generator
) -> np.ndarray:
    """Simulate the forward noising chain stepwise.

    Output shape (n, n_steps+1, dim); consecutive rows are dynamically
    consistent (x_k = sqrt(1-beta_k) x_{k-1} + sqrt(beta_k) xi_k), so the
    step-k marginal is N(sqrt(alpha_bar_k) x0, (1-alpha_bar_k) I) exactly.
    """
    X0 = np.asarray(X0, dtype=float)
    n, d = X0.shape
    out = np.empty((n, schedule.n_steps + 1, d))
    x = X0.copy()
    out[:, 0, :] = x
    for k, beta in enumerate(schedule.betas):
        x = np.sqrt(1.0 - beta) * x + np.sqrt(beta) * rng.standard_normal((n, d))
        out[:, k + 1, :] = x
    return out


def _literal_pretrain_losses(net_fwd, net_bwd, Xt, Xn, Tk, dt):
    res_f = Xn - (Xt + net_fwd(Xt, Tk) * dt)
    res_b = Xt - (Xn + net_bwd(Xn, Tk) * (-dt))
    return float(np.mean(np.sum(res_f**2, axis=1))), float(np.mean(np.sum(res_b**2, axis=1)))


def pretrain(
    net_fwd: MlpDrift,
    net_bwd: MlpDrift,
    trajectories: np.ndarray,
    epochs: int,
    lr: float,
    rng: np.random.Generator,
    batch_size: int = 256,
):
    """Regress one-step Euler residuals over consecutive trajectory states.

    The forward network minimizes ||X_{t+dt} - (X_t + f(t, X_t) dt)||^2 and
    the backward one ||X_t - (X_{t+dt} + f(t, X_{t+dt}) (-dt))||^2, both over
    all consecutive pairs.  Returns the trained nets and per-epoch loss
    curves of the two objectives.
    """
    traj = np.asarray(trajectories, dtype=float)
    if traj.ndim != 3:
        raise ValueError(f"trajectories must have shape (n, steps+1, dim), got {traj.shape}")
    n, n_knots, d = traj.shape
    m = n_knots - 1
    dt = 1.0 / m
    Xt = traj[:, :-1, :].reshape(-1, d)
    Xn = traj[:, 1:, :].reshape(-1, d)
    Tk = np.tile(np.arange(m) / m, n)
    targets = (Xn - Xt) / dt  # shared regression target; inputs differ per direction

    opt_f = init_adam(_net_params(net_fwd), lr)
    opt_b = init_adam(_net_params(net_bwd), lr)
    curves = {"forward": [], "backward": []}
    n_rows = Xt.shape[0]
    for epoch in range(epochs):
        perm = rng.permutation(n_rows)
        for s in range(0, n_rows, batch_size):
            idx = perm[s : s + batch_size]
            gw, gb = mlp_grad(net_fwd, Xt[idx], Tk[idx], targets[idx])
            _set_net_params(net_fwd, adam_step(opt_f, _net_params(net_fwd), gw + gb))
            gw, gb = mlp_grad(net_bwd, Xn[idx], Tk[idx], targets[idx])
            _set_net_params(net_bwd, adam_step(opt_b, _net_params(net_bwd), gw + gb))
        loss_f, loss_b = _literal_pretrain_losses(net_fwd, net_bwd, Xt, Xn, Tk, dt)
        if max(loss_f, loss_b) > DIVERGENCE_LIMIT:
            raise FloatingPointError(
                f"pretraining diverged at epoch {epoch}: forward {loss_f:.3e}, backward {loss_b:.3e}"
            )
        curves["forward"].append(loss_f)
        curves["backward"].append(loss_b)
    return net_fwd, net_bwd, curves


def _negated_output(net: MlpDrift) -> MlpDrift:
    # Flip the (linear) output layer so the network predicts -f(t, x) exactly.
    out = net.copy()
    out.weights[-1] = -out.weights[-1]
    out.biases[-1] = -out.biases[-1]
    return out


def _moments_of(source, sampler, rng):
    if isinstance(source, GaussianPair):
        return (source.mu0, source.sigma0), (source.mu1, source.sigma1)
    x0, x1 = sampler.sample_pairs(10_000, rng)
    return empirical_moments(x0), empirical_moments(x1)


def _train_half(net, X0c, X1c, direction, sigma, eps_clip, epochs, batch_size, lr, rng):
    params = _net_params(net)
    opt = init_adam(params, lr)
    n = X0c.shape[0]
    last_loss = None
    for _ in range(epochs):
        perm = rng.permutation(n)
        for s in range(0, n, batch_size):
            idx = perm[s : s + batch_size]
            z0, z1 = X0c[idx], X1c[idx]
            t = rng.uniform(eps_clip, 1.0 - eps_clip, size=(len(idx), 1))
            noise = rng.standard_normal(z0.shape)
            zt = t * z1 + (1.0 - t) * z0 + sigma * np.sqrt(t * (1.0 - t)) * noise
            target = (z1 - zt) / (1.0 - t) if direction == "forward" else (z0 - zt) / t
            gw, gb = mlp_grad(net, zt, t[:, 0], target)
            params = adam_step(opt, params, gw + gb)
            _set_net_params(net, params)
            resid = net(zt, t[:, 0]) - target
            last_loss = float(np.mean(np.sum(resid**2, axis=1)))
            if last_loss > DIVERGENCE_LIMIT:
                raise FloatingPointError(
                    f"{direction} bridge regression diverged (loss {last_loss:.3e})"
                )
    return last_loss


def dsbm_train(
    pair_source,
    sigma: float = 1.0,
    n_imf_iters: int = 4,
    inner_epochs: int = 40,
    eps_clip: float = 1e-3,
    rng: np.random.Generator | None = None,
    pretrained: tuple[MlpDrift, MlpDrift] | None = None,
    *,
    hidden=(64, 64),
    n_pairs: int = 4096,
    batch_size: int = 256,
    lr: float = 1e-3,
    em_steps: int = 100,
    n_eval: int = 4096,
    source_moments: tuple | None = None,
    target_moments: tuple | None = None,
):
    """Iterative Markovian fitting of forward/backward drift networks.

    Iteration zero couples endpoints by the reference rule X1 = X0 + sigma Z.
    Each iteration trains the backward network on bridge points of the
    current coupling, refreshes the coupling by simulating it from fresh
    target draws, then does the same for the forward network from fresh
    source draws.  Per-iteration metrics carry transported W2 for both
    directions, evaluated on fixed draws so only the networks vary.

    Returns (net_fwd, net_bwd, metrics); metrics[0] describes the reference
    coupling itself.
    """
    if sigma <= 0:
        raise ValueError(f"sigma must be > 0, got {sigma}")
    if not 0.0 < eps_clip < 0.5:
        raise ValueError(f"eps_clip must lie in (0, 0.5), got {eps_clip}")
    rng = rng if rng is not None else np.random.default_rng()
    sampler = as_pair_sampler(pair_source)
    d = sampler.dim

    if pretrained is not None:
        net_fwd = pretrained[0].copy()
        # The pretraining objective orients the backward net along forward
        # time (it is applied with a negative step there); the bridge target
        # (x0 - x_t)/t points the other way, so adopt the negated output.
        net_bwd = _negated_output(pretrained[1])
        net_fwd.direction, net_bwd.direction = "forward", "backward"
    else:
        net_fwd = init_mlp(d, hidden, "tanh", "forward", rng)
        net_bwd = init_mlp(d, hidden, "tanh", "backward", rng)

    if source_moments is None or target_moments is None:
        moments_rng = np.random.default_rng(rng.integers(2**63))
        src_m, tgt_m = _moments_of(pair_source, sampler, moments_rng)
        source_moments = source_moments or src_m
        target_moments = target_moments or tgt_m

    # Fixed evaluation draws (and EM noise seed) so per-iteration W2 moves
    # only with the networks.
    eval_seed = int(rng.integers(2**63))
    em_seed = int(rng.integers(2**63))
    eval_rng = np.random.default_rng(eval_seed)
    X0_eval, X1_eval = sampler.sample_pairs(n_eval, eval_rng)
    Z_eval = eval_rng.standard_normal(X0_eval.shape)

    def w2_against(X, moments):
        mean, cov = empirical_moments(X)
        return bures_w2(mean, cov, moments[0], moments[1])

    def evaluate():
        fwd_cloud = euler_maruyama(
            net_fwd, sigma, X0_eval, em_steps, np.random.default_rng(em_seed)
        )
        bwd_cloud = euler_maruyama(
            net_bwd, sigma, X1_eval, em_steps, np.random.default_rng(em_seed + 1),
            reverse_time=True,
        )
        return w2_against(fwd_cloud, target_moments), w2_against(bwd_cloud, source_moments)

    # Reference coupling and its metrics row.
    X0c, _ = sampler.sample_pairs(n_pairs, rng)
    X1c = X0c + sigma * rng.standard_normal(X0c.shape)
    metrics = [
        {
            "iteration": 0,
            "w2_forward": w2_against(X0_eval + sigma * Z_eval, target_moments),
            "w2_backward": w2_against(X1_eval - sigma * Z_eval, source_moments),
            "loss_forward": None,
            "loss_backward": None,
            "seconds": 0.0,
        }
    ]

    for it in range(1, n_imf_iters + 1):
        start = time.perf_counter()
        loss_b = _train_half(
            net_bwd, X0c, X1c, "backward", sigma, eps_clip, inner_epochs, batch_size, lr, rng
        )
        X1c = sampler.sample_pairs(n_pairs, rng)[1]
        X0c = euler_maruyama(net_bwd, sigma, X1c, em_steps, rng, reverse_time=True)

        loss_f = _train_half(
            net_fwd, X0c, X1c, "forward", sigma, eps_clip, inner_epochs, batch_size, lr, rng
        )
        X0c = sampler.sample_pairs(n_pairs, rng)[0]
        X1c = euler_maruyama(net_fwd, sigma, X0c, em_steps, rng)

        w2_f, w2_b = evaluate()
        metrics.append(
            {
                "iteration": it,
                "w2_forward": w2_f,
                "w2_backward": w2_b,
                "loss_forward": loss_f,
                "loss_backward": loss_b,
                "seconds": time.perf_counter() - start,
            }
        )
    return net_fwd, net_bwd, metrics


CURVE_COLUMNS = ("iteration", "loss_forward", "loss_backward", "w2_forward", "w2_backward")


def write_training_curves(metrics: list, path) -> None:
    """Per-iteration (iter, loss, w2) rows from dsbm_train, as CSV."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CURVE_COLUMNS)
        for row in metrics:
            writer.writerow(["" if row[c] is None else row[c] for c in CURVE_COLUMNS])
