"""Evaluation metrics: regression errors, distinguishability, set overlap,
Pareto-front extraction.

All regression metrics are computed on scaled targets; callers wanting raw
units can inverse-transform predictions with the dataset scaler first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .inference import predict
from .membership import membership_values
from .numerics import as_vector
from .training import _pair_distances, adjacency_pairs

#: numeric universe for overlap integrals; wider than [0,1] so the Cauchy
#: tails outside the bounded parameter range still contribute
GRID_LO = -0.5
GRID_HI = 1.5
DEFAULT_GRID = 2001


@dataclass
class EvalReport:
    mse: float
    rmse: float
    mae: float
    r2: float
    mean_D: float
    per_feature_D: list[float] = field(default_factory=list)

    def to_dict(self):
        return {
            "mse": self.mse,
            "rmse": self.rmse,
            "mae": self.mae,
            "r2": self.r2,
            "mean_D": self.mean_D,
            "per_feature_D": list(self.per_feature_D),
        }


@dataclass
class ParetoPoint:
    run_id: str
    r2: float
    mean_D: float
    config: dict = field(default_factory=dict)


def regression_metrics(y, yhat):
    """(mse, rmse, mae, r2); r2 is 1 - SSE/SST about the mean of y."""
    y = as_vector(y, "y")
    yhat = as_vector(yhat, "yhat")
    if y.shape[0] != yhat.shape[0]:
        raise ValueError(f"length mismatch: {y.shape[0]} vs {yhat.shape[0]}")
    if y.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    err = yhat - y
    mse = float(np.mean(err * err))
    rmse = float(np.sqrt(mse))
    mae = float(np.mean(np.abs(err)))
    sst = float(np.sum((y - y.mean()) ** 2))
    if sst == 0.0:
        raise ValueError("r2 undefined: target is constant")
    r2 = 1.0 - float(np.sum(err * err)) / sst
    return mse, rmse, mae, r2


def mean_distinguishability(rb):
    """Mean pair distance over all per-feature adjacent pairs.

    Returns (overall mean, per-feature means); requires at least 2 rules.
    """
    r, f = rb.centers.shape
    if r < 2:
        raise ValueError(f"no adjacent pairs with {r} rule(s)")
    pairs = adjacency_pairs(rb.centers)
    dists = _pair_distances(rb.centers, rb.scales, pairs)
    per_feature = [
        float(np.mean([d for d, p in zip(dists, pairs) if p.feature == feat]))
        for feat in range(f)
    ]
    return float(np.mean(dists)), per_feature


def _overlap_curves(p_a, p_b, kind, grid):
    if grid < 100:
        raise ValueError(f"grid must be >= 100, got {grid}")
    x = np.linspace(GRID_LO, GRID_HI, int(grid))
    mu_a = membership_values(kind, x, p_a.center, p_a.scale)
    mu_b = membership_values(kind, x, p_b.center, p_b.scale)
    return x, mu_a, mu_b


def jaccard_numeric(p_a, p_b, kind, grid=DEFAULT_GRID):
    """|A intersect B| / |A union B| by trapezoidal integration."""
    x, mu_a, mu_b = _overlap_curves(p_a, p_b, kind, grid)
    inter = np.trapezoid(np.minimum(mu_a, mu_b), x)
    union = np.trapezoid(np.maximum(mu_a, mu_b), x)
    return float(inter / union)


def possibility(p_a, p_b, kind, grid=DEFAULT_GRID):
    """sup over the grid of min(mu_A, mu_B)."""
    _, mu_a, mu_b = _overlap_curves(p_a, p_b, kind, grid)
    return float(np.max(np.minimum(mu_a, mu_b)))


def pareto_front(points):
    """Non-dominated subset maximizing (r2, mean_D), sorted by r2 descending.

    Points tied in both coordinates are all kept (neither dominates).
    """
    ordered = sorted(points, key=lambda p: (-p.r2, -p.mean_D))
    front = []
    best_d = -np.inf
    i = 0
    while i < len(ordered):
        j = i
        while j < len(ordered) and ordered[j].r2 == ordered[i].r2:
            j += 1
        group_best = max(p.mean_D for p in ordered[i:j])
        if group_best > best_d:
            front.extend(p for p in ordered[i:j] if p.mean_D == group_best)
            best_d = group_best
        i = j
    return front


def evaluate_model(rb, X, y):
    """Predict and bundle regression metrics with distinguishability."""
    mse, rmse, mae, r2 = regression_metrics(y, predict(rb, X))
    mean_d, per_feature = mean_distinguishability(rb)
    return EvalReport(
        mse=mse, rmse=rmse, mae=mae, r2=r2, mean_D=mean_d, per_feature_D=per_feature
    )
