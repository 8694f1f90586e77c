"""Shared numeric kernels: ridge solver, clipping, CI statistics, seeded RNG.

All matrices and vectors are float64 numpy arrays.  Helpers here validate
shape/finiteness at the boundary so the higher layers can assume clean
inputs.
"""

from __future__ import annotations

import math

import numpy as np
import scipy.linalg


class SingularMatrixError(ValueError):
    """Normal equations are singular and no regularization was requested."""


class InsufficientDataError(ValueError):
    """Too few samples for the requested statistic or fit."""


def as_matrix(a, name="matrix"):
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    m = np.asarray(a, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={m.ndim}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def as_vector(v, name="vector"):
    """Coerce to a 1-D float64 array, rejecting non-finite entries."""
    a = np.asarray(v, dtype=np.float64)
    if a.ndim != 1:
        raise ValueError(f"{name} must be 1-D, got ndim={a.ndim}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def ridge_solve(phi, y, lam):
    """Minimize ||phi @ w - y||^2 + lam * ||w||^2 over w.

    Solves the normal equations (phi^T phi + lam I) w = phi^T y with a
    Cholesky factorization; the system sizes here are small (columns =
    rules or rules*(features+1)), so the direct solve is both fast and
    accurate once lam > 0 makes it positive definite.
    """
    phi = as_matrix(phi, "phi")
    y = as_vector(y, "y")
    if phi.shape[0] != y.shape[0]:
        raise ValueError(
            f"phi has {phi.shape[0]} rows but y has {y.shape[0]} entries"
        )
    if phi.shape[0] < 1 or phi.shape[1] < 1:
        raise ValueError("phi must have at least one row and one column")
    lam = float(lam)
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")

    a = phi.T @ phi
    a[np.diag_indices_from(a)] += lam
    b = phi.T @ y
    try:
        factor = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
        return scipy.linalg.cho_solve(factor, b, check_finite=False)
    except scipy.linalg.LinAlgError as err:
        if lam == 0.0:
            raise SingularMatrixError(
                "phi^T phi is singular and lambda is 0; supply lambda > 0"
            ) from err
        # Positive lam guarantees a solution; fall back to the stacked
        # least-squares form if the factorization hits conditioning limits.
        n, r = phi.shape
        stacked = np.vstack([phi, math.sqrt(lam) * np.eye(r)])
        target = np.concatenate([y, np.zeros(r)])
        w, *_ = np.linalg.lstsq(stacked, target, rcond=None)
        return w


def clip_elementwise(v, lo, hi):
    """Clamp every entry of v into [lo, hi]."""
    if lo > hi:
        raise ValueError(f"clip bounds out of order: lo={lo} > hi={hi}")
    return np.clip(np.asarray(v, dtype=np.float64), lo, hi)


#: normal-approximation 95% quantile used for confidence intervals
Z95 = 1.96


def mean_ci95(samples):
    """Mean and normal-approximation 95% CI of a sample.

    Returns (mean, lo, hi) with half-width Z95 * sd / sqrt(n), sd the
    sample standard deviation (ddof=1).
    """
    a = as_vector(samples, "samples")
    n = a.shape[0]
    if n < 2:
        raise InsufficientDataError(f"need at least 2 samples, got {n}")
    mean = float(np.mean(a))
    half = Z95 * float(np.std(a, ddof=1)) / math.sqrt(n)
    return mean, mean - half, mean + half


# --------------------------------------------------------------------
# Seeded randomness
# --------------------------------------------------------------------

_MASK64 = (1 << 64) - 1
# splitmix64 constants (Steele, Lea & Flood's SplittableRandom finalizer)
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def _mix64(z):
    """splitmix64 finalizer for a Python int state."""
    z &= _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def _mix64_array(z):
    """splitmix64 finalizer, vectorized over a uint64 array."""
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_MIX2)
    return z ^ (z >> np.uint64(31))


class RandomStream:
    """Deterministic counter-based generator (splitmix64 core).

    Draw i is mix64(seed + (i+1)*GAMMA mod 2^64), so batched and
    one-at-a-time draws produce the same sequence, and any language with
    64-bit integers can reproduce it from the three constants above.
    """

    def __init__(self, seed):
        self.seed = int(seed) & _MASK64
        self._count = 0

    def _state_block(self, n):
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return (np.uint64(self.seed) + idx * np.uint64(_GAMMA)).astype(np.uint64)

    def next_uint64(self):
        self._count += 1
        return _mix64((self.seed + self._count * _GAMMA) & _MASK64)

    def uint64s(self, n):
        return _mix64_array(self._state_block(int(n)))

    def uniform(self):
        """One double in [0, 1) built from the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0**-53

    def uniforms(self, n):
        return (self.uint64s(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53

    def normals(self, n):
        """Standard normals via Box-Muller (two uniforms per draw)."""
        n = int(n)
        u1 = self.uniforms(n)
        u2 = self.uniforms(n)
        return np.sqrt(-2.0 * np.log1p(-u1)) * np.cos(2.0 * math.pi * u2)

    def below(self, bound):
        """One integer in [0, bound) via the multiply-high reduction."""
        return (self.next_uint64() * int(bound)) >> 64

    def permutation(self, n):
        """Fisher-Yates shuffle of range(n)."""
        n = int(n)
        perm = np.arange(n)
        if n < 2:
            return perm
        raws = self.uint64s(n - 1)
        for i in range(n - 1, 0, -1):
            j = (int(raws[n - 1 - i]) * (i + 1)) >> 64
            perm[i], perm[j] = perm[j], perm[i]
        return perm

    def split(self, index):
        """Independent child stream; deterministic in (seed, index)."""
        return RandomStream(_mix64(self.seed ^ _mix64(_GAMMA + int(index))))
