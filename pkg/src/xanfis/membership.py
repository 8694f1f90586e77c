"""Gaussian and Cauchy membership functions with analytic parameter gradients.

Centers live in [0, 1] (min-max scaled input units) and scales in
[SCALE_MIN, 1].  Evaluation accepts inputs outside [0, 1] because test
rows may fall outside the training min-max range; only the parameters are
projected, never the data.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

#: lower bound on scale parameters; keeps the 1/scale^3 gradient terms finite
SCALE_MIN = 1e-3
#: upper bound on both centers and scales in scaled units
SCALE_MAX = 1.0


class MFKind(str, enum.Enum):
    GAUSSIAN = "gaussian"
    CAUCHY = "cauchy"


@dataclass(frozen=True)
class FuzzySetParams:
    """One fuzzy set: center in [0,1], scale in [SCALE_MIN, 1].

    Out-of-range values are representable (a raw gradient step produces
    them); project_bounds restores the invariant.
    """

    center: float
    scale: float


def membership_values(kind, x, centers, scales):
    """Membership of x under the given centers/scales (broadcasting).

    Gaussian: exp(-(x-c)^2 / (2 s^2)); Cauchy: 1 / (1 + ((x-c)/s)^2).
    Result lies in (0, 1] for Cauchy and [0, 1] for Gaussian (the far tail
    underflows to exactly 0.0, which the firing-strength layer tolerates).
    """
    x = np.asarray(x, dtype=np.float64)
    u = (x - centers) / scales
    if kind == MFKind.GAUSSIAN:
        with np.errstate(under="ignore"):
            return np.exp(-0.5 * u * u)
    if kind == MFKind.CAUCHY:
        return 1.0 / (1.0 + u * u)
    raise ValueError(f"unknown membership kind: {kind!r}")


def membership_grads(kind, x, centers, scales):
    """Partials (d mu / d center, d mu / d scale), broadcasting like eval."""
    x = np.asarray(x, dtype=np.float64)
    d = x - centers
    mu = membership_values(kind, x, centers, scales)
    if kind == MFKind.GAUSSIAN:
        s2 = scales * scales
        with np.errstate(under="ignore"):
            d_center = mu * d / s2
            d_scale = mu * d * d / (s2 * scales)
    else:
        g2 = scales * scales
        with np.errstate(under="ignore"):
            mu2 = 2.0 * mu * mu
            d_center = mu2 * d / g2
            d_scale = mu2 * d * d / (g2 * scales)
    return d_center, d_scale


def log_membership_grads(kind, x, centers, scales):
    """Partials of log(mu): (d log mu / d center, d log mu / d scale).

    These stay finite even where mu itself underflows, which is what the
    training passes multiply against raw firing strengths.
    """
    x = np.asarray(x, dtype=np.float64)
    d = x - centers
    s2 = scales * scales
    if kind == MFKind.GAUSSIAN:
        return d / s2, d * d / (s2 * scales)
    if kind == MFKind.CAUCHY:
        mu = membership_values(kind, x, centers, scales)
        two_mu = 2.0 * mu
        return two_mu * d / s2, two_mu * d * d / (s2 * scales)
    raise ValueError(f"unknown membership kind: {kind!r}")


def mf_eval(kind, x, p):
    """Membership of scalar x under one fuzzy set."""
    return float(membership_values(kind, x, p.center, p.scale))


def mf_grad(kind, x, p):
    """(d mu/d center, d mu/d scale) for scalar x under one fuzzy set."""
    dc, ds = membership_grads(kind, x, p.center, p.scale)
    return float(dc), float(ds)


def project_bounds(p):
    """Clamp a fuzzy set back into center [0,1], scale [SCALE_MIN, 1]."""
    center = min(max(p.center, 0.0), 1.0)
    scale = min(max(p.scale, SCALE_MIN), SCALE_MAX)
    return FuzzySetParams(center=center, scale=scale)


def project_bounds_arrays(centers, scales):
    """Array form of project_bounds; returns clamped copies."""
    return (
        np.clip(centers, 0.0, 1.0),
        np.clip(scales, SCALE_MIN, SCALE_MAX),
    )
