"""Takagi-Sugeno forward pass: firing strengths, design matrix, LSE, predict.

A RuleBase is treated as immutable; every operation returns a new one.
The trainer owns the single evolving copy.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace

import numpy as np

from .membership import MFKind, membership_values
from .numerics import as_matrix, as_vector, ridge_solve

#: raw firing sums below this floor are treated as a dead row rather than
#: dividing by ~0; keeps the forward pass total when Gaussian memberships
#: underflow at small scales
EPS_DENOM = 1e-12


class Order(str, enum.Enum):
    ZERO = "zero"
    FIRST = "first"


@dataclass(frozen=True)
class RuleBase:
    """Full parameterization of a T-S fuzzy model.

    centers/scales: (rules, features); consequents: length R (zero-order)
    or R*(F+1) (first-order, per-rule blocks of F weights then bias), or
    None before the first fit.
    """

    mf_kind: MFKind
    centers: np.ndarray
    scales: np.ndarray
    consequents: np.ndarray | None = None
    order: Order = Order.ZERO

    @property
    def n_rules(self):
        return self.centers.shape[0]

    @property
    def n_features(self):
        return self.centers.shape[1]

    def consequent_length(self):
        if self.order == Order.ZERO:
            return self.n_rules
        return self.n_rules * (self.n_features + 1)


@dataclass
class FiringMatrices:
    raw: np.ndarray         # (N, R), entries in [0, 1]
    normalized: np.ndarray  # (N, R), live rows sum to 1


def membership_tensor(X, rb):
    """Per-sample per-rule per-feature memberships, shape (N, R, F)."""
    X = as_matrix(X, "X")
    return membership_values(
        rb.mf_kind, X[:, None, :], rb.centers[None, :, :], rb.scales[None, :, :]
    )


def firing_strengths(X, rb):
    """Product t-norm firing strengths and their row normalization.

    normalized[t] = raw[t] / max(sum(raw[t]), EPS_DENOM): rows with any
    live firing form an exact partition of unity; fully underflowed rows
    degrade to ~0 instead of dividing by zero.
    """
    mu = membership_tensor(X, rb)
    with np.errstate(under="ignore"):
        raw = np.prod(mu, axis=2)
    denom = np.maximum(raw.sum(axis=1), EPS_DENOM)
    return FiringMatrices(raw=raw, normalized=raw / denom[:, None])


def design_matrix(fm, X, order):
    """LSE design matrix for the given consequent order.

    Zero-order: the normalized firing matrix itself.  First-order: per
    rule j the block normalized[:, j] * (x_1, ..., x_F, 1).
    """
    if order == Order.ZERO:
        return fm.normalized
    X = as_matrix(X, "X")
    n, f = X.shape
    aug = np.concatenate([X, np.ones((n, 1))], axis=1)  # (N, F+1)
    blocks = fm.normalized[:, :, None] * aug[:, None, :]  # (N, R, F+1)
    return blocks.reshape(n, -1)


def fit_consequents(rb, X, y, lam):
    """Refit consequents by regularized LSE; antecedents untouched."""
    y = as_vector(y, "y")
    phi = design_matrix(firing_strengths(X, rb), X, rb.order)
    w = ridge_solve(phi, y, lam)
    return replace(rb, consequents=w)


def rule_outputs(rb, X):
    """Per-rule consequent values f_j(x_t), shape (N, R)."""
    if rb.consequents is None:
        raise ValueError("rule base has no fitted consequents")
    X = as_matrix(X, "X")
    n, f = X.shape
    if rb.order == Order.ZERO:
        return np.broadcast_to(rb.consequents, (n, rb.n_rules)).copy()
    aug = np.concatenate([X, np.ones((n, 1))], axis=1)
    coeffs = rb.consequents.reshape(rb.n_rules, f + 1)
    return aug @ coeffs.T


def predict(rb, X):
    """Weighted-average model output for each row of X."""
    if rb.consequents is None:
        raise ValueError("rule base has no fitted consequents")
    phi = design_matrix(firing_strengths(X, rb), X, rb.order)
    return phi @ rb.consequents


# --------------------------------------------------------------------
# Model artifact (versioned JSON)
# --------------------------------------------------------------------

MODEL_FORMAT = "ts-rulebase"
MODEL_VERSION = 1


def save_model(path, rb, scaler_meta=None):
    """Write the rule base (plus optional scaler metadata) as JSON."""
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "mf_kind": rb.mf_kind.value,
        "order": rb.order.value,
        "centers": rb.centers.tolist(),
        "scales": rb.scales.tolist(),
        "consequents": None if rb.consequents is None else rb.consequents.tolist(),
        "scaler": scaler_meta,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_model(path):
    """Read a model artifact; returns (RuleBase, scaler_meta or None)."""
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise ValueError(f"corrupt model file {path}: {err}") from err
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ValueError(f"{path} is not a {MODEL_FORMAT} artifact")
    if doc.get("version") != MODEL_VERSION:
        raise ValueError(f"unsupported model version {doc.get('version')!r}")
    try:
        consequents = doc["consequents"]
        rb = RuleBase(
            mf_kind=MFKind(doc["mf_kind"]),
            centers=np.asarray(doc["centers"], dtype=np.float64),
            scales=np.asarray(doc["scales"], dtype=np.float64),
            consequents=None if consequents is None else np.asarray(consequents, dtype=np.float64),
            order=Order(doc["order"]),
        )
    except (KeyError, ValueError, TypeError) as err:
        raise ValueError(f"corrupt model file {path}: {err}") from err
    if rb.centers.ndim != 2 or rb.centers.shape != rb.scales.shape:
        raise ValueError(f"corrupt model file {path}: center/scale shape mismatch")
    return rb, doc.get("scaler")
