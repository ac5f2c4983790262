"""Symbolic feature libraries Xi(x, t) with a fixed, documented evaluation order.

Two kinds are provided.  ``affine_time_poly`` expands an affine drift
K(t) x + k(t) with polynomial time dependence: the state block is
[x_1, ..., x_d, 1] and the full vector is that block repeated for
t^0, ..., t^R.  ``monomial_tensor`` takes all state monomials of total
degree <= D in graded-lexicographic order (constant first, x1 before x2)
times the same time powers.  Blocks are laid out time-major:

    Xi(x, t) = [Phi(x) * t^0 | Phi(x) * t^1 | ... | Phi(x) * t^R]

Coefficients are reported in raw units; any conditioning rescale lives in
the sparse solvers and is undone before coefficients leave them.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

KINDS = ("affine_time_poly", "monomial_tensor")


@dataclass(frozen=True)
class FeatureLibrary:
    kind: str
    dim: int
    state_degree: int | None = None  # monomial_tensor only
    time_degree: int = 0
    include_bias: bool = True

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown library kind {self.kind!r}; expected one of {KINDS}")
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if self.time_degree < 0:
            raise ValueError(f"time_degree must be >= 0, got {self.time_degree}")
        if self.kind == "monomial_tensor":
            if self.state_degree is None or self.state_degree < 1:
                raise ValueError("monomial_tensor needs state_degree >= 1")


def _graded_lex_exponents(dim: int, degree: int) -> list[tuple[int, ...]]:
    # Graded-lex: total degree first, then x1-major lexicographic within a degree.
    out = []
    for total in range(degree + 1):
        level = []
        for combo in itertools.combinations_with_replacement(range(dim), total):
            e = [0] * dim
            for i in combo:
                e[i] += 1
            level.append(tuple(e))
        level.sort(key=lambda e: tuple(-v for v in e))
        out.extend(level)
    return out


def state_exponents(lib: FeatureLibrary) -> list[tuple[int, ...]]:
    """Exponent tuples of the state block Phi(x), in evaluation order."""
    d = lib.dim
    if lib.kind == "affine_time_poly":
        units = [tuple(1 if j == i else 0 for j in range(d)) for i in range(d)]
        return units + [tuple([0] * d)] if lib.include_bias else units
    exps = _graded_lex_exponents(d, lib.state_degree)
    if not lib.include_bias:
        exps = [e for e in exps if any(e)]
    return exps


def feature_count(lib: FeatureLibrary) -> int:
    """Total number of features p = |Phi| * (R + 1)."""
    if lib.kind == "affine_time_poly":
        n_state = lib.dim + (1 if lib.include_bias else 0)
    else:
        n_state = math.comb(lib.dim + lib.state_degree, lib.state_degree)
        if not lib.include_bias:
            n_state -= 1
    return n_state * (lib.time_degree + 1)


def state_block(lib: FeatureLibrary, X: np.ndarray) -> np.ndarray:
    """Evaluate Phi on rows of X, shape (n, |Phi|)."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[None, :]
    if X.shape[1] != lib.dim:
        raise ValueError(f"state dimension mismatch: library dim {lib.dim}, got {X.shape[1]}")
    if lib.kind == "affine_time_poly":
        cols = [X] if not lib.include_bias else [X, np.ones((X.shape[0], 1))]
        return np.hstack(cols)
    cols = []
    for e in state_exponents(lib):
        col = np.ones(X.shape[0])
        for i, p in enumerate(e):
            if p:
                col = col * X[:, i] ** p
        cols.append(col)
    return np.column_stack(cols)


def eval_feature_matrix(lib: FeatureLibrary, X: np.ndarray, T: np.ndarray) -> np.ndarray:
    """Feature rows Xi(x_i, t_i) for paired states and times, shape (n, p)."""
    phi = state_block(lib, X)
    T = np.asarray(T, dtype=float).reshape(-1)
    if T.shape[0] != phi.shape[0]:
        raise ValueError(f"row count mismatch: {phi.shape[0]} states vs {T.shape[0]} times")
    blocks = [phi]
    tp = np.ones_like(T)
    for _ in range(lib.time_degree):
        tp = tp * T
        blocks.append(phi * tp[:, None])
    return np.hstack(blocks)


def eval_features(lib: FeatureLibrary, x: np.ndarray, t: float) -> np.ndarray:
    """Single-point feature vector Xi(x, t) of length feature_count(lib)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if not np.isfinite(t):
        raise ValueError(f"t must be finite, got {t}")
    return eval_feature_matrix(lib, x[None, :], np.array([t]))[0]


def _state_name(lib: FeatureLibrary, e: tuple[int, ...]) -> str:
    if not any(e):
        return "1"
    parts = []
    for i, p in enumerate(e):
        if p == 0:
            continue
        base = "x" if lib.dim == 1 else f"x{i + 1}"
        parts.append(base if p == 1 else f"{base}^{p}")
    return "*".join(parts)


def feature_names(lib: FeatureLibrary) -> list[str]:
    """Names in evaluation order, e.g. 'x3*t^2'; the constant feature is '1'."""
    names = []
    states = [_state_name(lib, e) for e in state_exponents(lib)]
    for r in range(lib.time_degree + 1):
        tname = "" if r == 0 else ("t" if r == 1 else f"t^{r}")
        for s in states:
            if not tname:
                names.append(s)
            elif s == "1":
                names.append(tname)
            else:
                names.append(f"{s}*{tname}")
    return names


def describe(lib: FeatureLibrary, W: np.ndarray, zero_tol: float = 1e-10) -> list[str]:
    """One symbolic string per output dimension; terms with |w| <= zero_tol omitted."""
    W = np.atleast_2d(np.asarray(W, dtype=float))
    p = feature_count(lib)
    if W.shape[1] != p:
        raise ValueError(f"W has {W.shape[1]} columns, library has {p} features")
    names = feature_names(lib)
    lines = []
    for row in W:
        terms = [f"{w:.3f}·{name}" for w, name in zip(row, names) if abs(w) > zero_tol]
        lines.append(" + ".join(terms) if terms else "0")
    return lines


def library_to_dict(lib: FeatureLibrary) -> dict:
    return {
        "kind": lib.kind,
        "dim": lib.dim,
        "state_degree": lib.state_degree,
        "time_degree": lib.time_degree,
        "include_bias": lib.include_bias,
    }


def library_from_dict(doc: dict) -> FeatureLibrary:
    return FeatureLibrary(
        kind=doc["kind"],
        dim=int(doc["dim"]),
        state_degree=None if doc.get("state_degree") is None else int(doc["state_degree"]),
        time_degree=int(doc.get("time_degree", 0)),
        include_bias=bool(doc.get("include_bias", True)),
    )
