"""Gaussian endpoint pairs, covariance scenarios, sampling, and closed-form W2.

The transport problems studied here run between p0 = N(mu0, sigma0) and
p1 = N(-mu0, sigma1).  Five covariance scenarios cover progressively harder
conditioning; evaluation is Gaussian-fit: estimate moments of a transported
cloud and compare against the analytic target with the Bures-Wasserstein
closed form.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

SCENARIOS = ("identity", "diagonal", "rotated", "high_condition", "asymmetric")

# Config-exposed defaults; the covariance spectra are drawn log-uniformly.
DEFAULT_SPECTRUM = (0.3, 3.0)
HIGH_CONDITION_SPECTRUM = (0.01, 1.0)
DEFAULT_CONDITION_MIN = 100.0
DEFAULT_ASYM_SCALE = 4.0

_SYM_TOL = 1e-10


@dataclass(frozen=True)
class GaussianPair:
    """Source/target Gaussian endpoints of one transport problem.

    Invariants: both covariances are symmetric (within 1e-10) and positive
    definite, and mu1 == -mu0 elementwise.
    """

    dim: int
    mu0: np.ndarray
    sigma0: np.ndarray
    mu1: np.ndarray
    sigma1: np.ndarray
    scenario_name: str = "custom"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu0", np.asarray(self.mu0, dtype=float))
        object.__setattr__(self, "mu1", np.asarray(self.mu1, dtype=float))
        object.__setattr__(self, "sigma0", np.asarray(self.sigma0, dtype=float))
        object.__setattr__(self, "sigma1", np.asarray(self.sigma1, dtype=float))
        d = self.dim
        if d < 1:
            raise ValueError(f"dim must be >= 1, got {d}")
        if self.mu0.shape != (d,) or self.mu1.shape != (d,):
            raise ValueError("mean vectors must have shape (dim,)")
        if self.sigma0.shape != (d, d) or self.sigma1.shape != (d, d):
            raise ValueError("covariances must have shape (dim, dim)")
        if not np.allclose(self.mu1, -self.mu0, atol=_SYM_TOL):
            raise ValueError("mu1 must equal -mu0 elementwise")
        for name, cov in (("sigma0", self.sigma0), ("sigma1", self.sigma1)):
            if np.abs(cov - cov.T).max() > _SYM_TOL:
                raise ValueError(f"{name} is not symmetric within {_SYM_TOL}")
            if np.linalg.eigvalsh(cov).min() <= 0:
                raise ValueError(f"{name} is not positive definite")

    def to_json(self) -> str:
        doc = {
            "dim": self.dim,
            "mu0": self.mu0.tolist(),
            "sigma0": self.sigma0.tolist(),
            "mu1": self.mu1.tolist(),
            "sigma1": self.sigma1.tolist(),
            "scenario_name": self.scenario_name,
            "seed": self.seed,
        }
        return json.dumps(doc)

    @classmethod
    def from_json(cls, doc: str | dict) -> "GaussianPair":
        if isinstance(doc, str):
            doc = json.loads(doc)
        return cls(
            dim=int(doc["dim"]),
            mu0=np.array(doc["mu0"], dtype=float),
            sigma0=np.array(doc["sigma0"], dtype=float),
            mu1=np.array(doc["mu1"], dtype=float),
            sigma1=np.array(doc["sigma1"], dtype=float),
            scenario_name=doc.get("scenario_name", "custom"),
            seed=int(doc.get("seed", 0)),
        )


def random_orthogonal(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Random orthogonal matrix via QR of a Gaussian matrix, sign-corrected."""
    q, r = np.linalg.qr(rng.standard_normal((dim, dim)))
    return q * np.sign(np.diag(r))


def _log_uniform(rng, lo, hi, size):
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size=size))


def _enforce_condition(spectrum: np.ndarray, condition_min: float) -> np.ndarray:
    # Clamp the smallest eigenvalue so lambda_max / lambda_min >= condition_min.
    out = spectrum.copy()
    i_min = int(np.argmin(out))
    out[i_min] = min(out[i_min], out.max() / condition_min)
    return out


def make_scenario(
    name: str,
    dim: int,
    mean_scale: float = 1.0,
    spectrum_range: tuple[float, float] | None = None,
    seed: int = 0,
    *,
    condition_min: float = DEFAULT_CONDITION_MIN,
    asym_scale: float = DEFAULT_ASYM_SCALE,
) -> GaussianPair:
    """Construct one of the five named covariance scenarios.

    mu0 = mean_scale * ones / sqrt(dim), so ||mu0|| = mean_scale regardless of
    dimension; mu1 = -mu0.  Spectra are log-uniform in spectrum_range (default
    (0.3, 3.0); high_condition defaults to (0.01, 1.0) and additionally forces
    an eigenvalue ratio >= condition_min).  rotated/asymmetric spectra are
    conjugated by independent random orthogonal matrices; asymmetric scales
    the sigma1 spectrum range by asym_scale.
    """
    if name not in SCENARIOS:
        raise ValueError(f"unknown scenario {name!r}; expected one of {SCENARIOS}")
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    if spectrum_range is None:
        spectrum_range = HIGH_CONDITION_SPECTRUM if name == "high_condition" else DEFAULT_SPECTRUM
    lo, hi = float(spectrum_range[0]), float(spectrum_range[1])
    if lo <= 0 or hi <= 0:
        raise ValueError(f"spectrum bounds must be positive, got ({lo}, {hi})")
    if lo >= hi:
        raise ValueError(f"spectrum_range must satisfy low < high, got ({lo}, {hi})")
    if name == "high_condition" and dim < 2:
        raise ValueError("high_condition needs dim >= 2 to have a condition number")

    rng = np.random.default_rng(seed)
    mu0 = mean_scale * np.ones(dim) / np.sqrt(dim)

    if name == "identity":
        sigma0 = np.eye(dim)
        sigma1 = np.eye(dim)
    elif name == "diagonal":
        sigma0 = np.diag(_log_uniform(rng, lo, hi, dim))
        sigma1 = np.diag(_log_uniform(rng, lo, hi, dim))
    elif name == "rotated":
        s0 = _log_uniform(rng, lo, hi, dim)
        s1 = _log_uniform(rng, lo, hi, dim)
        q0 = random_orthogonal(dim, rng)
        q1 = random_orthogonal(dim, rng)
        sigma0 = q0 @ np.diag(s0) @ q0.T
        sigma1 = q1 @ np.diag(s1) @ q1.T
    elif name == "high_condition":
        s0 = _enforce_condition(_log_uniform(rng, lo, hi, dim), condition_min)
        s1 = _enforce_condition(_log_uniform(rng, lo, hi, dim), condition_min)
        sigma0 = np.diag(s0)
        sigma1 = np.diag(s1)
    else:  # asymmetric
        s0 = _log_uniform(rng, lo, hi, dim)
        s1 = _log_uniform(rng, lo * asym_scale, hi * asym_scale, dim)
        q0 = random_orthogonal(dim, rng)
        q1 = random_orthogonal(dim, rng)
        sigma0 = q0 @ np.diag(s0) @ q0.T
        sigma1 = q1 @ np.diag(s1) @ q1.T

    # Exact symmetry despite float round-off in the conjugations.
    sigma0 = (sigma0 + sigma0.T) / 2
    sigma1 = (sigma1 + sigma1.T) / 2
    return GaussianPair(
        dim=dim, mu0=mu0, sigma0=sigma0, mu1=-mu0, sigma1=sigma1,
        scenario_name=name, seed=seed,
    )


def sample(pair: GaussianPair, side: str, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n i.i.d. rows from the requested marginal via Cholesky."""
    if side not in ("source", "target"):
        raise ValueError(f"side must be 'source' or 'target', got {side!r}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    mu = pair.mu0 if side == "source" else pair.mu1
    cov = pair.sigma0 if side == "source" else pair.sigma1
    if n == 0:
        return np.empty((0, pair.dim))
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"covariance for side {side!r} is not positive definite") from exc
    return mu + rng.standard_normal((n, pair.dim)) @ chol.T


def empirical_moments(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample mean and unbiased covariance (divisor n-1), cov symmetrized."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise ValueError(f"need a 2-d sample with n >= 2 rows, got shape {X.shape}")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    return mean, (cov + cov.T) / 2


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    # Symmetric square root via eigendecomposition, eigenvalues clamped at 0.
    evals, evecs = np.linalg.eigh(mat)
    return (evecs * np.sqrt(np.clip(evals, 0.0, None))) @ evecs.T


def bures_w2(mu_a: np.ndarray, cov_a: np.ndarray, mu_b: np.ndarray, cov_b: np.ndarray) -> float:
    """Closed-form 2-Wasserstein distance between two Gaussians.

    W2^2 = ||mu_a - mu_b||^2 + tr(cov_a + cov_b - 2 (cov_a^1/2 cov_b cov_a^1/2)^1/2)
    """
    mu_a = np.asarray(mu_a, dtype=float).reshape(-1)
    mu_b = np.asarray(mu_b, dtype=float).reshape(-1)
    cov_a = np.atleast_2d(np.asarray(cov_a, dtype=float))
    cov_b = np.atleast_2d(np.asarray(cov_b, dtype=float))
    for name, cov in (("cov_a", cov_a), ("cov_b", cov_b)):
        if np.abs(cov - cov.T).max() > 1e-8 * max(1.0, np.abs(cov).max()):
            raise ValueError(f"{name} is not symmetric; eigendecomposition undefined")
    root_a = _sqrtm_psd(cov_a)
    cross = _sqrtm_psd(root_a @ cov_b @ root_a)
    delta = mu_a - mu_b
    w2_sq = delta @ delta + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross)
    return float(np.sqrt(max(w2_sq, 0.0)))
