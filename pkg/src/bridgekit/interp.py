"""Endpoint interpolants supplying supervision states and exact derivatives.

The straight-line path feeds the symbolic fit (its time derivative is known
in closed form, so no numerical differentiation enters the pipeline); the
Brownian bridge supplies training points for the neural bridge baseline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

KINDS = ("linear", "brownian_bridge")


@dataclass(frozen=True)
class Interpolant:
    """Descriptor of an endpoint interpolation.

    sigma is the bridge diffusion strength; it is ignored for the linear
    kind, and sigma = 0 reduces the bridge to the linear path in
    distribution.
    """

    kind: str = "linear"
    sigma: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown interpolant kind {self.kind!r}; expected one of {KINDS}")
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def _check_same_dim(a: np.ndarray, b: np.ndarray):
    if a.shape[-1] != b.shape[-1]:
        raise ValueError(f"endpoint dimension mismatch: {a.shape[-1]} vs {b.shape[-1]}")


def linear_path(t, x0, x1):
    """State and exact derivative of the straight-line path at time t.

    x_t = (1 - t) x0 + t x1 and xdot_t = x1 - x0 (constant in t).  t may be a
    scalar or an array broadcastable against the leading axes of x0/x1.
    """
    x0 = np.asarray(x0, dtype=float)
    x1 = np.asarray(x1, dtype=float)
    _check_same_dim(x0, x1)
    t = np.asarray(t, dtype=float)
    if t.ndim > 0 and x0.ndim > 0:
        t = t[..., None]
    x_t = (1.0 - t) * x0 + t * x1
    xdot = np.broadcast_to(x1 - x0, x_t.shape).copy()
    return x_t, xdot


def brownian_bridge_point(t, z0, z1, sigma, noise):
    """Brownian-bridge point z_t = t z1 + (1-t) z0 + sigma sqrt(t(1-t)) noise.

    The caller supplies standard-normal noise (and clips t away from the
    endpoints if needed); t may be scalar or an array broadcastable as in
    linear_path.
    """
    if sigma < 0:
        raise ValueError(f"sigma must be >= 0, got {sigma}")
    z0 = np.asarray(z0, dtype=float)
    z1 = np.asarray(z1, dtype=float)
    noise = np.asarray(noise, dtype=float)
    _check_same_dim(z0, z1)
    _check_same_dim(z0, noise)
    t = np.asarray(t, dtype=float)
    if t.ndim > 0 and z0.ndim > 0:
        t = t[..., None]
    return t * z1 + (1.0 - t) * z0 + sigma * np.sqrt(t * (1.0 - t)) * noise
