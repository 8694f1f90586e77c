"""Alternating bi-objective training.

Each epoch runs, in order: consequent refit (regularized LSE), a backward
pass on MSE over the antecedents (consequents held fixed), and — in
X-ANFIS mode — an explainability pass that nudges adjacent-set centers
toward a target distinguishability while scales stay frozen.  MO-ANFIS
instead takes one step on the scalarized objective
MSE + weight * sum over adjacent pairs of 0.5 * (D - D_target)^2.
Early stopping watches validation MSE with a patience window and the best
validation snapshot is returned.
"""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .inference import EPS_DENOM, fit_consequents, membership_tensor, predict, rule_outputs
from .membership import log_membership_grads, project_bounds_arrays
from .numerics import as_matrix, as_vector, clip_elementwise

#: adjacent pairs closer than this get no explainability gradient; the
#: pair distance divides the update, so coincident sets must be skipped
D_SING = 1e-9


class Mode(str, enum.Enum):
    ANFIS = "anfis"
    MO_ANFIS = "mo_anfis"
    X_ANFIS = "x_anfis"


class DivergenceError(RuntimeError):
    """Training loss became non-finite; carries the partial trace."""

    def __init__(self, epoch, traces, last_rb):
        super().__init__(f"non-finite loss at epoch {epoch}")
        self.epoch = epoch
        self.traces = traces
        self.last_rb = last_rb


@dataclass
class TrainConfig:
    mode: Mode = Mode.ANFIS
    lr_backward: float = 0.1
    lr_xpass: float = 0.1
    lam: float = 1e-4
    d_target: float = 0.5
    mo_weight: float = 1.0
    max_epochs: int = 500
    patience: int = 20
    clip_lo: float = -1.0
    clip_hi: float = 1.0
    seed: int = 0

    def validate(self):
        if self.clip_lo >= self.clip_hi:
            raise ValueError(f"clip_lo={self.clip_lo} must be < clip_hi={self.clip_hi}")
        if not 0.0 < self.d_target <= 1.0:
            raise ValueError(f"d_target must be in (0, 1], got {self.d_target}")
        if self.patience < 1:
            raise ValueError(f"patience must be >= 1, got {self.patience}")
        if self.lr_backward <= 0:
            raise ValueError(f"lr_backward must be positive, got {self.lr_backward}")
        if self.lr_xpass < 0:
            raise ValueError(f"lr_xpass must be nonnegative, got {self.lr_xpass}")
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if self.max_epochs < 0:
            raise ValueError(f"max_epochs must be nonnegative, got {self.max_epochs}")
        if self.mo_weight < 0:
            raise ValueError(f"mo_weight must be nonnegative, got {self.mo_weight}")


@dataclass
class EpochTrace:
    epoch: int
    train_mse: float
    val_mse: float
    mean_D: float
    centers_snapshot: np.ndarray | None = None
    scales_snapshot: np.ndarray | None = None


@dataclass(frozen=True)
class AdjacencyPair:
    feature: int
    set_lo: int
    set_hi: int


def adjacency_pairs(centers):
    """Consecutive pairs in center rank, per feature (ties by rule index)."""
    centers = np.asarray(centers, dtype=np.float64)
    r, f = centers.shape
    pairs = []
    for feat in range(f):
        order = np.lexsort((np.arange(r), centers[:, feat]))
        for lo, hi in zip(order[:-1], order[1:]):
            pairs.append(AdjacencyPair(feature=feat, set_lo=int(lo), set_hi=int(hi)))
    return pairs


def distinguishability(p_i, p_j):
    """Euclidean distance between two fuzzy sets in (center, scale) space."""
    return math.hypot(p_i.center - p_j.center, p_i.scale - p_j.scale)


def _pair_distances(centers, scales, pairs):
    out = np.empty(len(pairs))
    for k, p in enumerate(pairs):
        out[k] = math.hypot(
            centers[p.set_lo, p.feature] - centers[p.set_hi, p.feature],
            scales[p.set_lo, p.feature] - scales[p.set_hi, p.feature],
        )
    return out


def _mean_pair_distance(centers, scales):
    if centers.shape[0] < 2:
        return 0.0
    pairs = adjacency_pairs(centers)
    return float(np.mean(_pair_distances(centers, scales, pairs)))


def mse_antecedent_gradients(rb, X, y):
    """d MSE / d centers and d MSE / d scales with consequents frozen.

    Chain rule through the normalized firing strengths: with S_t the raw
    row sum and den_t = max(S_t, EPS_DENOM),

        d yhat_t / d raw_tj = (f_j(x_t) - [S_t > eps] * yhat_t) / den_t
        d raw_tj / d theta_jf = raw_tj * d log mu_tjf / d theta,

    where the log-membership partials stay finite even when mu underflows.
    """
    X = as_matrix(X, "X")
    y = as_vector(y, "y")
    n = X.shape[0]
    mu = membership_tensor(X, rb)
    with np.errstate(under="ignore"):
        raw = np.prod(mu, axis=2)
    s = raw.sum(axis=1)
    den = np.maximum(s, EPS_DENOM)
    live = s > EPS_DENOM
    fout = rule_outputs(rb, X)
    yhat = (raw / den[:, None] * fout).sum(axis=1)
    upstream = (2.0 / n) * (yhat - y)
    coef = (fout - np.where(live, yhat, 0.0)[:, None]) / den[:, None]
    with np.errstate(under="ignore"):
        b = upstream[:, None] * coef * raw  # (N, R)
        dlog_c, dlog_s = log_membership_grads(
            rb.mf_kind, X[:, None, :], rb.centers[None, :, :], rb.scales[None, :, :]
        )
        grad_c = np.einsum("tr,trf->rf", b, dlog_c)
        grad_s = np.einsum("tr,trf->rf", b, dlog_s)
    return grad_c, grad_s


def xpass_gradients(centers, scales, d_target, pairs=None):
    """Center gradients of sum over adjacent pairs of 0.5*(D - D_target)^2.

    Scales contribute to each D but receive no gradient (they are frozen
    in the explainability pass, which stops the trivial shrink-all-widths
    solution).  Pairs closer than D_SING are skipped.
    """
    centers = np.asarray(centers, dtype=np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if pairs is None:
        pairs = adjacency_pairs(centers)
    grad = np.zeros_like(centers)
    for p in pairs:
        dc = centers[p.set_lo, p.feature] - centers[p.set_hi, p.feature]
        ds = scales[p.set_lo, p.feature] - scales[p.set_hi, p.feature]
        d = math.hypot(dc, ds)
        if d < D_SING:
            continue
        coef = (d - d_target) / d
        grad[p.set_lo, p.feature] += coef * dc
        grad[p.set_hi, p.feature] -= coef * dc
    return grad


def _clipped_step(values, grad, lr, cfg):
    return values - lr * clip_elementwise(grad, cfg.clip_lo, cfg.clip_hi)


def backward_pass(rb, X, y, cfg):
    """One clipped gradient-descent step on MSE over centers and scales."""
    grad_c, grad_s = mse_antecedent_gradients(rb, X, y)
    centers = _clipped_step(rb.centers, grad_c, cfg.lr_backward, cfg)
    scales = _clipped_step(rb.scales, grad_s, cfg.lr_backward, cfg)
    centers, scales = project_bounds_arrays(centers, scales)
    return replace(rb, centers=centers, scales=scales)


def xpass_update(rb, cfg):
    """One clipped explainability step on the centers; scales frozen."""
    if cfg.lr_xpass == 0.0:
        return rb
    grad_c = xpass_gradients(rb.centers, rb.scales, cfg.d_target)
    centers = _clipped_step(rb.centers, grad_c, cfg.lr_xpass, cfg)
    centers, scales = project_bounds_arrays(centers, rb.scales)
    return replace(rb, centers=centers, scales=scales)


def mo_gradients(rb, X, y, cfg):
    """Scalarized-objective gradients: MSE plus weighted pair penalty.

    Centers receive both terms; scales receive only the MSE term, matching
    the explainability-pass parameterization.
    """
    grad_c, grad_s = mse_antecedent_gradients(rb, X, y)
    if cfg.mo_weight != 0.0:
        grad_c = grad_c + cfg.mo_weight * xpass_gradients(
            rb.centers, rb.scales, cfg.d_target
        )
    return grad_c, grad_s


def mo_gradient_pass(rb, X, y, cfg):
    """One clipped step on the scalarized objective (MO-ANFIS mode)."""
    grad_c, grad_s = mo_gradients(rb, X, y, cfg)
    centers = _clipped_step(rb.centers, grad_c, cfg.lr_backward, cfg)
    scales = _clipped_step(rb.scales, grad_s, cfg.lr_backward, cfg)
    centers, scales = project_bounds_arrays(centers, scales)
    return replace(rb, centers=centers, scales=scales)


def _mse(yhat, y):
    diff = yhat - y
    return float(np.mean(diff * diff))


def train(X_train, y_train, X_val, y_val, rb0, cfg, record_trajectory=False):
    """Run the alternating loop; returns (best-validation RuleBase, traces).

    Epoch 0 records the initial model with consequents fitted once.  Each
    later epoch applies the mode's antecedent passes and refits the
    consequents; training stops after cfg.patience epochs without a
    validation improvement or at cfg.max_epochs.
    """
    cfg.validate()
    X_train = as_matrix(X_train, "X_train")
    y_train = as_vector(y_train, "y_train")
    X_val = as_matrix(X_val, "X_val")
    y_val = as_vector(y_val, "y_val")

    traces = []

    def record(epoch, rb, prev_rb):
        train_mse = _mse(predict(rb, X_train), y_train)
        val_mse = _mse(predict(rb, X_val), y_val)
        if not (math.isfinite(train_mse) and math.isfinite(val_mse)):
            raise DivergenceError(epoch, traces, prev_rb)
        traces.append(
            EpochTrace(
                epoch=epoch,
                train_mse=train_mse,
                val_mse=val_mse,
                mean_D=_mean_pair_distance(rb.centers, rb.scales),
                centers_snapshot=rb.centers.copy() if record_trajectory else None,
                scales_snapshot=rb.scales.copy() if record_trajectory else None,
            )
        )
        return val_mse

    rb = fit_consequents(rb0, X_train, y_train, cfg.lam)
    best_rb = rb
    best_val = record(0, rb, rb0)
    stall = 0
    for epoch in range(1, cfg.max_epochs + 1):
        prev = rb
        if cfg.mode == Mode.MO_ANFIS:
            stepped = mo_gradient_pass(rb, X_train, y_train, cfg)
        else:
            stepped = backward_pass(rb, X_train, y_train, cfg)
        if cfg.mode == Mode.X_ANFIS:
            stepped = xpass_update(stepped, cfg)
        rb = fit_consequents(stepped, X_train, y_train, cfg.lam)
        val_mse = record(epoch, rb, prev)
        if val_mse < best_val:
            best_val = val_mse
            best_rb = rb
            stall = 0
        else:
            stall += 1
            if stall >= cfg.patience:
                break
    return best_rb, traces


# --------------------------------------------------------------------
# Trace export
# --------------------------------------------------------------------

def traces_to_csv(traces, path):
    """One row per epoch: epoch, train_mse, val_mse, mean_D."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_mse", "val_mse", "mean_D"])
        for t in traces:
            writer.writerow([t.epoch, repr(t.train_mse), repr(t.val_mse), repr(t.mean_D)])


def trajectory_to_csv(traces, path):
    """Per-parameter rows (epoch, rule, feature, center, scale).

    Requires traces recorded with record_trajectory=True.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "rule", "feature", "center", "scale"])
        for t in traces:
            if t.centers_snapshot is None:
                raise ValueError(f"epoch {t.epoch} has no parameter snapshot")
            r, f = t.centers_snapshot.shape
            for j in range(r):
                for k in range(f):
                    writer.writerow(
                        [
                            t.epoch,
                            j,
                            k,
                            repr(float(t.centers_snapshot[j, k])),
                            repr(float(t.scales_snapshot[j, k])),
                        ]
                    )
