"""Lorentz boosts of phase-space states and distributional invariance checks.

Signature convention (-,+,+,+); a pure boost of rapidity w along a unit axis
n has matrix blocks cosh(w), sinh(w) n and delta_ij + (cosh(w) - 1) n_i n_j.
The phase-space density is a Lorentz scalar with respect to the invariant
velocity measure d3u / u0, which fixes the boosted equilibrium target used by
invariance_check.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import analytic, ensemble, geometry
from .errors import DomainError, InvalidInputError

ETA = np.diag([-1.0, 1.0, 1.0, 1.0])


@dataclass(frozen=True)
class Boost:
    rapidity: float
    axis: np.ndarray
    matrix: np.ndarray


def boost_matrix(w, axis):
    """Pure boost of rapidity w along a (normalized) spatial axis."""
    n = np.asarray(axis, dtype=np.float64)
    if n.shape != (3,) or not np.all(np.isfinite(n)):
        raise InvalidInputError("axis must be a finite 3-vector")
    norm = float(np.linalg.norm(n))
    if norm == 0.0:
        raise DomainError("boost axis must be nonzero")
    n = n / norm
    w = float(w)
    ch, sh = math.cosh(w), math.sinh(w)
    m = np.zeros((4, 4))
    m[0, 0] = ch
    m[0, 1:] = sh * n
    m[1:, 0] = sh * n
    m[1:, 1:] = np.eye(3) + (ch - 1.0) * np.outer(n, n)
    return Boost(rapidity=w, axis=n, matrix=m)


def boost_velocities(u, boost):
    """Boost reduced velocities; u0 is re-derived so the mass shell is exact."""
    arr = geometry.as_velocity(np.atleast_2d(u))
    u0 = np.sqrt(1.0 + np.sum(arr * arr, axis=1))
    m = boost.matrix
    out = u0[:, None] * m[1:, 0] + arr @ m[1:, 1:].T
    return out[0] if np.asarray(u).ndim == 1 else out


def boost_state(state, boost):
    """Boost (x, u, tau) of an ensemble or state-like object.

    Events are formed with x0 = tau * u0; the evolution parameter itself is
    the invariant tau' = tau.  Returns (x', u', tau').
    """
    u = np.atleast_2d(np.asarray(state.u, dtype=np.float64))
    x = np.atleast_2d(np.asarray(state.x, dtype=np.float64))
    tau = float(state.tau)
    u0 = np.sqrt(1.0 + np.sum(u * u, axis=1))
    m = boost.matrix
    u_new = u0[:, None] * m[1:, 0] + u @ m[1:, 1:].T
    x0 = tau * u0
    x_new = x0[:, None] * m[1:, 0] + x @ m[1:, 1:].T
    return x_new, u_new, tau


@dataclass(frozen=True)
class InvarianceReport:
    """Comparison of a boosted equilibrium ensemble with its scalar-law target."""

    ks: ensemble.KSResult
    mean_u0: float
    mean_u0_predicted: float
    mean_u0_rel_err: float
    ks_threshold: float
    mean_tol: float

    @property
    def passed(self):
        return bool(self.ks.statistic <= self.ks_threshold and self.mean_u0_rel_err <= self.mean_tol)


def boosted_longitudinal_pdf(z, w, chi):
    """Unnormalized marginal of the boosted Juttner density along the boost axis.

    Integrating the scalar-transformed density over the transverse plane gives
    p(z) proportional to exp(-chi [cosh(w) sqrt(1+z^2) - sinh(w) z]).
    """
    z = np.asarray(z, dtype=np.float64)
    arg = -chi * (math.cosh(w) * np.sqrt(1.0 + z * z) - math.sinh(w) * z)
    return np.exp(arg - np.max(arg))


def invariance_check(u, boost, params, ks_threshold=0.02, mean_tol=0.01, grid_n=8001):
    """Check that a boosted equilibrium ensemble matches the scalar-transformed law.

    u is an (n, 3) equilibrium velocity sample; the report carries the KS
    statistic of the longitudinal marginal against the quadrature-normalized
    target and the relative error of the mean boosted energy against its
    quadrature prediction cosh(w) E[cosh(alpha)].
    """
    chi = params.chi if isinstance(params, analytic.JuttnerParams) else float(params)
    if chi <= 0.0:
        raise DomainError("chi must be positive")
    u_boosted = boost_velocities(u, boost)
    u0 = np.sqrt(1.0 + np.sum(u_boosted * u_boosted, axis=1))
    z = np.sort(u_boosted @ boost.axis)

    lo = float(z[0]) - 2.0
    hi = float(z[-1]) + 2.0
    grid = np.linspace(lo, hi, int(grid_n))
    pdf = boosted_longitudinal_pdf(grid, boost.rapidity, chi)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (pdf[1:] + pdf[:-1]) * np.diff(grid))])
    cdf /= cdf[-1]

    ks = ensemble.ks_statistic(z, lambda s: np.interp(s, grid, cdf), threshold=ks_threshold)
    predicted = math.cosh(boost.rapidity) * analytic.juttner_mean_cosh(chi)
    mean_u0 = float(np.mean(u0))
    rel = abs(mean_u0 - predicted) / predicted
    return InvarianceReport(
        ks=ks,
        mean_u0=mean_u0,
        mean_u0_predicted=predicted,
        mean_u0_rel_err=rel,
        ks_threshold=ks_threshold,
        mean_tol=mean_tol,
    )
