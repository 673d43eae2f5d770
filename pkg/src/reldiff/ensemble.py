"""Estimation and comparison machinery: histograms, empirical CDFs, KS tests."""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import EmptySampleError, InvalidInputError


@dataclass(frozen=True)
class Histogram:
    """Counted samples on fixed bin edges; merging is associative."""

    edges: np.ndarray
    counts: np.ndarray
    total: float

    @classmethod
    def from_samples(cls, x, edges, weights=None):
        edges = np.asarray(edges, dtype=np.float64)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0.0):
            raise InvalidInputError("edges must be strictly increasing")
        counts, _ = np.histogram(np.asarray(x, dtype=np.float64), bins=edges, weights=weights)
        counts = counts.astype(np.float64)
        return cls(edges=edges, counts=counts, total=float(counts.sum()))

    def merge(self, other):
        if self.edges.shape != other.edges.shape or not np.array_equal(self.edges, other.edges):
            raise InvalidInputError("histograms must share identical edges")
        return Histogram(edges=self.edges, counts=self.counts + other.counts, total=self.total + other.total)

    @property
    def centers(self):
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def widths(self):
        return np.diff(self.edges)

    def density(self):
        """Per-bin probability density (normalized by total and bin width)."""
        if self.total <= 0.0:
            raise EmptySampleError("histogram holds no samples")
        return self.counts / (self.total * self.widths)


@dataclass(frozen=True)
class KSResult:
    statistic: float
    n_effective: int
    threshold: Optional[float] = field(default=None)

    @property
    def passed(self):
        return None if self.threshold is None else bool(self.statistic <= self.threshold)


def ks_critical_value(n, level=0.01, slack=1.0):
    """Asymptotic one-sample KS critical value c(level)/sqrt(n), times a slack."""
    coeff = {0.10: 1.224, 0.05: 1.358, 0.01: 1.628}.get(level)
    if coeff is None:
        raise InvalidInputError("supported levels: 0.10, 0.05, 0.01")
    return slack * coeff / np.sqrt(n)


def alpha_marginal(states):
    """Sorted rapidity sample alpha = arccosh(u0) of an ensemble.

    Accepts either a (n, 3) velocity array or any object with a .u attribute.
    """
    u = getattr(states, "u", states)
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        raise EmptySampleError("no particles")
    if u.ndim != 2 or u.shape[1] != 3:
        raise InvalidInputError(f"expected velocities of shape (n, 3), got {u.shape}")
    # arcsinh(|u|) == arccosh(u0), stable near the origin
    return np.sort(np.arcsinh(np.sqrt(np.sum(u * u, axis=1))))


def ks_statistic(sample, target_cdf, threshold=None):
    """Exact one-sample KS statistic of a sorted sample against a target CDF."""
    x = np.asarray(sample, dtype=np.float64)
    if x.size == 0:
        raise EmptySampleError("empty sample")
    if np.any(np.diff(x) < 0.0):
        raise InvalidInputError("sample must be sorted ascending")
    n = x.size
    f = np.asarray(target_cdf(x), dtype=np.float64)
    grid = np.arange(1, n + 1) / n
    d_plus = np.max(grid - f)
    d_minus = np.max(f - (grid - 1.0 / n))
    stat = float(max(d_plus, d_minus, 0.0))
    return KSResult(statistic=stat, n_effective=n, threshold=threshold)


def ks_two_sample(a, b, threshold=None):
    """Two-sample KS statistic sup |F_a - F_b| over the pooled sample."""
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("empty sample")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    stat = float(np.max(np.abs(fa - fb)))
    n_eff = int(round(a.size * b.size / (a.size + b.size)))
    return KSResult(statistic=stat, n_effective=n_eff, threshold=threshold)


def chi_square_statistic(hist, model_probs):
    """Pearson chi-square of histogram counts against model bin probabilities."""
    probs = np.asarray(model_probs, dtype=np.float64)
    if probs.shape != hist.counts.shape:
        raise InvalidInputError("one model probability per bin required")
    expected = hist.total * probs
    mask = expected > 0.0
    return float(np.sum((hist.counts[mask] - expected[mask]) ** 2 / expected[mask]))


def summary(states):
    """Moment summary {mean_u0, var_u0, mean_speed, count} of an ensemble."""
    u = getattr(states, "u", states)
    u = np.asarray(u, dtype=np.float64)
    if u.size == 0:
        raise EmptySampleError("no particles")
    speed = np.sqrt(np.sum(u * u, axis=1))
    u0 = np.sqrt(1.0 + speed * speed)
    return {
        "mean_u0": float(np.mean(u0)),
        "var_u0": float(np.var(u0)),
        "mean_speed": float(np.mean(speed)),
        "count": int(u.shape[0]),
    }
