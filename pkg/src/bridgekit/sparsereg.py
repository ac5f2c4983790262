"""Multi-target sparse linear regression: STLSQ and SR3.

Both solvers regress Y (n x d) on a feature matrix Theta (n x p) and return
a coefficient matrix W (d x p).  The data-fit term is a mean over rows, so
duplicating every row leaves the solution unchanged; the tiny default ridge
exists purely for numerical stability of the normal equations.

Supports are selected independently per output dimension.  SR3 follows the
relaxed alternating scheme: the W-step solves
(Theta^T Theta + (1/nu) I) W^T = Theta^T Y + (1/nu) V^T and the V-step
hard-thresholds W; the returned coefficients are debiased by a plain
least-squares re-fit on the final support.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

PROX_KINDS = ("hard", "soft")


@dataclass
class SparseSolverConfig:
    method: str = "sr3"
    threshold: float = 0.10
    ridge: float = 1e-10
    nu: float = 1e-2
    max_iter: int = 100
    tol: float = 1e-8
    prox: str = "hard"  # soft-threshold variant available but off by default
    normalize_columns: bool = False

    def __post_init__(self):
        if self.method not in ("stlsq", "sr3"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.threshold <= 0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if self.ridge < 0:
            raise ValueError(f"ridge must be >= 0, got {self.ridge}")
        if self.nu <= 0:
            raise ValueError(f"nu must be > 0, got {self.nu}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")
        if self.prox not in PROX_KINDS:
            raise ValueError(f"prox must be one of {PROX_KINDS}")

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "threshold": self.threshold,
            "ridge": self.ridge,
            "nu": self.nu,
            "max_iter": self.max_iter,
            "tol": self.tol,
            "prox": self.prox,
            "normalize_columns": self.normalize_columns,
        }


def _check_inputs(Theta, Y):
    Theta = np.asarray(Theta, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Theta.ndim != 2:
        raise ValueError(f"Theta must be 2-d, got shape {Theta.shape}")
    if Theta.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: Theta has {Theta.shape[0]}, Y has {Y.shape[0]}")
    if Theta.shape[0] < 1:
        raise ValueError("need at least one row")
    if np.isnan(Theta).any() or np.isnan(Y).any():
        raise ValueError("NaN entries in the regression inputs")
    return Theta, Y


def _solve_normal(G, C, ridge):
    # G = Theta^T Theta / n, C = Theta^T Y / n; returns W^T (p x d).
    A = G + ridge * np.eye(G.shape[0])
    try:
        return cho_solve(cho_factor(A), C)
    except np.linalg.LinAlgError:
        raise np.linalg.LinAlgError(
            "singular normal matrix (rank-deficient features); set ridge > 0"
        ) from None


def least_squares(Theta: np.ndarray, Y: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Ridge least squares: minimize mean ||Theta W^T - Y||^2 + ridge ||W||^2."""
    Theta, Y = _check_inputs(Theta, Y)
    n = Theta.shape[0]
    G = Theta.T @ Theta / n
    C = Theta.T @ Y / n
    return _solve_normal(G, C, ridge).T


def _column_scales(Theta):
    s = np.sqrt(np.mean(Theta**2, axis=0))
    s[s == 0] = 1.0
    return s


def stlsq(Theta: np.ndarray, Y: np.ndarray, cfg: SparseSolverConfig) -> np.ndarray:
    """Sequentially thresholded least squares.

    Alternates ridge solves on the active set with hard thresholding at
    cfg.threshold until the active set stabilizes.  Values from the final
    re-fit may drop below the threshold; they are kept.  An output dimension
    whose active set empties returns a zero row with a warning, not an error.
    """
    Theta, Y = _check_inputs(Theta, Y)
    scales = _column_scales(Theta) if cfg.normalize_columns else None
    if scales is not None:
        Theta = Theta / scales
    n, p = Theta.shape
    d = Y.shape[1]
    G = Theta.T @ Theta / n
    C = Theta.T @ Y / n

    W = _solve_normal(G, C, cfg.ridge).T
    out = np.zeros((d, p))
    emptied = []
    for j in range(d):
        active = np.abs(W[j]) >= cfg.threshold
        coef = np.zeros(p)
        for _ in range(cfg.max_iter):
            if not active.any():
                break
            idx = np.flatnonzero(active)
            sub = _solve_normal(G[np.ix_(idx, idx)], C[idx, j : j + 1], cfg.ridge)[:, 0]
            coef = np.zeros(p)
            coef[idx] = sub
            new_active = np.abs(coef) >= cfg.threshold
            if np.array_equal(new_active, active):
                break
            active = new_active
        if not active.any():
            if np.abs(Y[:, j]).max() > 0:
                emptied.append(j)
            coef = np.zeros(p)
        out[j] = coef
    if emptied:
        warnings.warn(
            f"stlsq: all coefficients thresholded for output dims {emptied}; returning zeros",
            RuntimeWarning,
        )
    if scales is not None:
        out = out / scales
    return out


def sr3(
    Theta: np.ndarray,
    Y: np.ndarray,
    cfg: SparseSolverConfig,
    return_history: bool = False,
):
    """Sparse relaxed regularized regression with hard-threshold prox.

    Stops when the auxiliary variable moves less than cfg.tol in sup-norm or
    after cfg.max_iter sweeps (warning on non-convergence, best iterate
    returned).  The sparse V is debiased by least squares on its support.
    """
    Theta, Y = _check_inputs(Theta, Y)
    scales = _column_scales(Theta) if cfg.normalize_columns else None
    if scales is not None:
        Theta = Theta / scales
    n, p = Theta.shape
    d = Y.shape[1]
    G = Theta.T @ Theta
    C = Theta.T @ Y
    inv_nu = 1.0 / cfg.nu
    factor = cho_factor(G + inv_nu * np.eye(p))

    # lambda implied by the hard-threshold prox: tau = sqrt(2 nu lambda)
    lam = cfg.threshold**2 / (2.0 * cfg.nu)
    V = least_squares(Theta, Y, cfg.ridge)
    history = []
    converged = False
    W = V
    for _ in range(cfg.max_iter):
        W = cho_solve(factor, C + inv_nu * V.T).T
        if cfg.prox == "hard":
            V_new = np.where(np.abs(W) >= cfg.threshold, W, 0.0)
        else:
            V_new = np.sign(W) * np.maximum(np.abs(W) - cfg.threshold, 0.0)
        dv = np.abs(V_new - V).max() if V_new.size else 0.0
        if return_history:
            resid = Theta @ W.T - Y
            if cfg.prox == "hard":
                penalty = lam * np.count_nonzero(V_new)
            else:
                penalty = (cfg.threshold / cfg.nu) * np.abs(V_new).sum()
            obj = 0.5 * np.sum(resid**2) + penalty + np.sum((W - V_new) ** 2) / (2 * cfg.nu)
            history.append({"objective": float(obj), "dv": float(dv)})
        V = V_new
        if dv < cfg.tol:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"sr3: no convergence after {cfg.max_iter} iterations (last dv={dv:.3e}); "
            "returning best iterate",
            RuntimeWarning,
        )

    # Debias: plain least squares on the selected support, per output dim.
    Gm = G / n
    Cm = C / n
    out = np.zeros((d, p))
    emptied = []
    for j in range(d):
        idx = np.flatnonzero(V[j])
        if idx.size == 0:
            if np.abs(Y[:, j]).max() > 0:
                emptied.append(j)
            continue
        sub = _solve_normal(Gm[np.ix_(idx, idx)], Cm[idx, j : j + 1], cfg.ridge)[:, 0]
        out[j, idx] = sub
    if emptied:
        warnings.warn(
            f"sr3: all coefficients thresholded for output dims {emptied}; returning zeros",
            RuntimeWarning,
        )
    if scales is not None:
        out = out / scales
    return (out, history) if return_history else out


def solve(Theta: np.ndarray, Y: np.ndarray, cfg: SparseSolverConfig) -> np.ndarray:
    """Dispatch on cfg.method."""
    if cfg.method == "stlsq":
        return stlsq(Theta, Y, cfg)
    return sr3(Theta, Y, cfg)
