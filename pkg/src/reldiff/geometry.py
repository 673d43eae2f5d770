"""Differential geometry of the unit-mass velocity hyperboloid.

The reduced velocity u = (u1, u2, u3) parameterizes the hyperboloid
(u0)^2 - |u|^2 = 1 with u0 = sqrt(1 + |u|^2).  The induced Riemannian
metric, its Christoffel symbols and orthonormal frames are all closed-form:

    G_ij   = delta_ij - u_i u_j / u0^2        det G = u0^-2
    G^ij   = delta_ij + u_i u_j
    gamma^i_jk = -u^i G_jk
    E_a^i  = delta_a^i + u^i u_a / (1 + u0)   (boost section)

Two coordinate charts are supported next to the cartesian one: the hyperbolic
chart (alpha, theta, phi) with u0 = cosh(alpha), and the photon chart
(r, theta, phi) for the massless cone u0 = r.  The Laplace-Beltrami and
divergence operators are provided in every chart; cross-chart agreement is the
main correctness check and is enforced by the test suite.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateFrameError, DomainError, InvalidInputError

# default tolerances: double precision with second-order stencils
ORTHONORMALITY_TOL = 1e-10
METRIC_TOL = 1e-12
ROUND_TRIP_TOL = 1e-12

CHART_CARTESIAN = "cartesian"
CHART_HYPERBOLIC = "hyperbolic"
CHART_PHOTON = "photon"


def as_velocity(u):
    """Validate and return a reduced-velocity array of shape (..., 3)."""
    arr = np.asarray(u, dtype=np.float64)
    if arr.shape[-1:] != (3,):
        raise InvalidInputError(f"velocity must have 3 components, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("velocity components must be finite")
    return arr


def u_zero(u):
    """Time component u0 = sqrt(1 + |u|^2) >= 1 of the normalized 4-velocity."""
    arr = as_velocity(u)
    return np.sqrt(1.0 + np.sum(arr * arr, axis=-1))


@dataclass(frozen=True)
class MetricData:
    """Metric G_ij, inverse G^ij and determinant at one or more points."""

    g: np.ndarray
    g_inv: np.ndarray
    det: np.ndarray


@dataclass(frozen=True)
class ChristoffelTensor:
    """Connection coefficients gamma^i_jk, symmetric in the lower pair."""

    gamma: np.ndarray


def metric(u):
    """Metric data of the hyperboloid at u; batched over leading axes."""
    arr = as_velocity(u)
    u0sq = 1.0 + np.sum(arr * arr, axis=-1)
    eye = np.eye(3)
    outer = arr[..., :, None] * arr[..., None, :]
    g = eye - outer / u0sq[..., None, None]
    g_inv = eye + outer
    det = 1.0 / u0sq
    return MetricData(g=g, g_inv=g_inv, det=det)


def christoffel(u):
    """gamma^i_jk = -u^i G_jk; batched over leading axes."""
    arr = as_velocity(u)
    g = metric(arr).g
    gamma = -arr[..., :, None, None] * g[..., None, :, :]
    return ChristoffelTensor(gamma=gamma)


def canonical_frame(u):
    """Smooth orthonormal frame E_a^i = delta_a^i + u^i u_a / (1 + u0).

    Columns index the frame label a, rows the coordinate i.  Satisfies
    G_ij E_a^i E_b^j = delta_ab and sum_a E_a^i E_a^j = G^ij identically.
    """
    arr = as_velocity(u)
    u0 = u_zero(arr)
    outer = arr[..., :, None] * arr[..., None, :]
    return np.eye(3) + outer / (1.0 + u0)[..., None, None]


def metric_dot(u, v, w):
    """Inner product v^i G_ij(u) w^j, batched over leading axes."""
    arr = as_velocity(u)
    u0sq = 1.0 + np.sum(arr * arr, axis=-1)
    return np.sum(v * w, axis=-1) - np.sum(arr * v, axis=-1) * np.sum(arr * w, axis=-1) / u0sq


def orthonormalize(frame, u):
    """Gram-Schmidt in the G(u) inner product, column by column.

    Computed through the Cholesky factor of the 3x3 Gram matrix, which yields
    the classical Gram-Schmidt result without per-column passes.  Idempotent
    on frames that already satisfy the orthonormality relations.  Raises
    DegenerateFrameError when the input columns are linearly dependent.
    """
    arr = as_velocity(u)
    e = np.asarray(frame, dtype=np.float64)
    if e.shape[-2:] != (3, 3):
        raise InvalidInputError(f"frame must have shape (..., 3, 3), got {e.shape}")
    u0sq = 1.0 + np.sum(arr * arr, axis=-1)
    c0, c1, c2 = e[..., :, 0], e[..., :, 1], e[..., :, 2]
    ue0 = np.sum(arr * c0, axis=-1)
    ue1 = np.sum(arr * c1, axis=-1)
    ue2 = np.sum(arr * c2, axis=-1)

    def gram(va, vb, da, db):
        return np.sum(va * vb, axis=-1) - da * db / u0sq

    g00 = gram(c0, c0, ue0, ue0)
    g10 = gram(c1, c0, ue1, ue0)
    g20 = gram(c2, c0, ue2, ue0)
    g11 = gram(c1, c1, ue1, ue1)
    g21 = gram(c2, c1, ue2, ue1)
    g22 = gram(c2, c2, ue2, ue2)

    tol = 1e-28 * np.maximum(1.0, np.maximum(g00, np.maximum(g11, g22)))
    if np.any(g00 <= tol):
        raise DegenerateFrameError("frame columns are linearly dependent")
    l00 = np.sqrt(g00)
    l10 = g10 / l00
    l20 = g20 / l00
    d11 = g11 - l10 * l10
    if np.any(d11 <= tol):
        raise DegenerateFrameError("frame columns are linearly dependent")
    l11 = np.sqrt(d11)
    l21 = (g21 - l20 * l10) / l11
    d22 = g22 - l20 * l20 - l21 * l21
    if np.any(d22 <= tol):
        raise DegenerateFrameError("frame columns are linearly dependent")
    l22 = np.sqrt(d22)

    out = np.empty_like(e)
    e0 = c0 / l00[..., None]
    e1 = (c1 - l10[..., None] * e0) / l11[..., None]
    e2 = (c2 - l20[..., None] * e0 - l21[..., None] * e1) / l22[..., None]
    out[..., :, 0] = e0
    out[..., :, 1] = e1
    out[..., :, 2] = e2
    return out


@dataclass(frozen=True)
class HyperbolicPoint:
    """Hyperbolic chart (alpha, theta, phi): u0 = cosh(alpha), theta polar."""

    alpha: np.ndarray
    theta: np.ndarray
    phi: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.alpha, dtype=np.float64)
        t = np.asarray(self.theta, dtype=np.float64)
        p = np.asarray(self.phi, dtype=np.float64)
        if np.any(a < 0.0):
            raise DomainError("alpha must be >= 0")
        if np.any((t < 0.0) | (t > np.pi)):
            raise DomainError("theta must lie in [0, pi]")
        if np.any((p < 0.0) | (p >= 2.0 * np.pi)):
            raise DomainError("phi must lie in [0, 2*pi)")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "theta", t)
        object.__setattr__(self, "phi", p)


def to_hyperbolic(u):
    """Chart map u -> (alpha, theta, phi); (0, 0, 0) at the chart origin."""
    arr = as_velocity(u)
    speed = np.sqrt(np.sum(arr * arr, axis=-1))
    alpha = np.arcsinh(speed)
    with np.errstate(invalid="ignore", divide="ignore"):
        theta = np.where(speed > 0.0, np.arccos(np.clip(arr[..., 2] / np.where(speed > 0.0, speed, 1.0), -1.0, 1.0)), 0.0)
    phi = np.where(speed * np.sin(theta) > 0.0, np.arctan2(arr[..., 0], arr[..., 1]), 0.0)
    phi = np.mod(phi, 2.0 * np.pi)
    theta = np.where(speed > 0.0, theta, 0.0)
    return HyperbolicPoint(alpha=alpha, theta=theta, phi=phi)


def from_hyperbolic(h):
    """Inverse chart map: u1 = sh(a) sin(t) sin(p), u2 = sh(a) sin(t) cos(p), u3 = sh(a) cos(t)."""
    sa = np.sinh(h.alpha)
    st = np.sin(h.theta)
    u = np.stack(
        [sa * st * np.sin(h.phi), sa * st * np.cos(h.phi), sa * np.cos(h.theta)],
        axis=-1,
    )
    return u


def vector_to_hyperbolic(f_cart, u):
    """Coordinate components (F^alpha, F^theta, F^phi) of a cartesian tangent vector."""
    h = to_hyperbolic(u)
    ca, sa = np.cosh(h.alpha), np.sinh(h.alpha)
    st, ct = np.sin(h.theta), np.cos(h.theta)
    sp, cp = np.sin(h.phi), np.cos(h.phi)
    f1, f2, f3 = f_cart[..., 0], f_cart[..., 1], f_cart[..., 2]
    if np.any(sa == 0.0) or np.any(st == 0.0):
        raise DomainError("vector transformation undefined at chart degeneracy")
    f_alpha = (st * (cp * f2 + sp * f1) + ct * f3) / ca
    f_theta = (ct * (cp * f2 + sp * f1) - st * f3) / sa
    f_phi = (cp * f1 - sp * f2) / (sa * st)
    return f_alpha, f_theta, f_phi


# ---------------------------------------------------------------------------
# finite-difference stencils (order 2 and 4) for the operator fallbacks
# ---------------------------------------------------------------------------


def _shift(point, axis, delta):
    p = np.array(point, dtype=np.float64, copy=True)
    p[axis] += delta
    return p


def _d1(f, point, axis, h, order):
    if order == 4:
        return (
            -f(_shift(point, axis, 2 * h))
            + 8.0 * f(_shift(point, axis, h))
            - 8.0 * f(_shift(point, axis, -h))
            + f(_shift(point, axis, -2 * h))
        ) / (12.0 * h)
    return (f(_shift(point, axis, h)) - f(_shift(point, axis, -h))) / (2.0 * h)


def _d2(f, point, axis, h, order):
    f0 = f(np.asarray(point, dtype=np.float64))
    if order == 4:
        return (
            -f(_shift(point, axis, 2 * h))
            + 16.0 * f(_shift(point, axis, h))
            - 30.0 * f0
            + 16.0 * f(_shift(point, axis, -h))
            - f(_shift(point, axis, -2 * h))
        ) / (12.0 * h * h)
    return (f(_shift(point, axis, h)) - 2.0 * f0 + f(_shift(point, axis, -h))) / (h * h)


def _d2_mixed(f, point, i, j, h, order):
    def cross(step):
        pp = f(_shift(_shift(point, i, step), j, step))
        pm = f(_shift(_shift(point, i, step), j, -step))
        mp = f(_shift(_shift(point, i, -step), j, step))
        mm = f(_shift(_shift(point, i, -step), j, -step))
        return (pp - pm - mp + mm) / (4.0 * step * step)

    if order == 4:
        # Richardson extrapolation of the O(h^2) cross stencil
        return (4.0 * cross(h / 2.0) - cross(h)) / 3.0
    return cross(h)


def _gradient(f, point, h, order, grad):
    if grad is not None:
        return np.asarray(grad(np.asarray(point, dtype=np.float64)), dtype=np.float64)
    return np.array([_d1(f, point, k, h, order) for k in range(3)])


def _hessian(f, point, h, order, hess):
    if hess is not None:
        return np.asarray(hess(np.asarray(point, dtype=np.float64)), dtype=np.float64)
    out = np.empty((3, 3))
    for i in range(3):
        out[i, i] = _d2(f, point, i, h, order)
    for i in range(3):
        for j in range(i + 1, 3):
            out[i, j] = out[j, i] = _d2_mixed(f, point, i, j, h, order)
    return out


def _check_angular_point(radial, theta, chart):
    if radial <= 0.0:
        raise DomainError(f"{chart} chart requires a positive radial coordinate")
    if not 0.0 < theta < np.pi:
        raise DomainError(f"{chart} chart operators are singular at theta in {{0, pi}}")


def laplace_beltrami_apply(f, point, chart=CHART_CARTESIAN, *, grad=None, hess=None, h=1e-3, order=2):
    """Apply the Laplace-Beltrami operator of the velocity space to f at point.

    f is a scalar callback taking the 3 chart coordinates as an array; grad
    and hess optionally supply analytic derivatives, otherwise central finite
    differences of the given order (2 or 4) and step h are used.

    Charts:
      cartesian  -- G^ij d_i d_j f - G^ij gamma^k_ij d_k f  (point = u)
      hyperbolic -- f_aa + 2 coth(a) f_a
                    + [f_tt + cot(t) f_t + f_pp / sin(t)^2] / sinh(a)^2
      photon     -- f_rr + (2/r) f_r
                    + [f_tt + cot(t) f_t + f_pp / sin(t)^2] / r^2
    """
    if order not in (2, 4):
        raise InvalidInputError("stencil order must be 2 or 4")
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (3,):
        raise InvalidInputError("point must be a 3-vector of chart coordinates")

    if chart == CHART_CARTESIAN:
        u = as_velocity(point)
        md = metric(u)
        grad_v = _gradient(f, point, h, order, grad)
        hess_m = _hessian(f, point, h, order, hess)
        # -G^ij gamma^k_ij = 3 u^k, so the first-order part is 3 u . grad
        return float(np.sum(md.g_inv * hess_m) + 3.0 * np.dot(u, grad_v))

    if chart in (CHART_HYPERBOLIC, CHART_PHOTON):
        radial, theta = point[0], point[1]
        _check_angular_point(radial, theta, chart)
        grad_v = _gradient(f, point, h, order, grad)
        if hess is not None:
            hess_d = np.diagonal(np.asarray(hess(point), dtype=np.float64))
        else:
            hess_d = np.array([_d2(f, point, k, h, order) for k in range(3)])
        angular = hess_d[1] + grad_v[1] / np.tan(theta) + hess_d[2] / np.sin(theta) ** 2
        if chart == CHART_HYPERBOLIC:
            return float(hess_d[0] + 2.0 * grad_v[0] / np.tanh(radial) + angular / np.sinh(radial) ** 2)
        return float(hess_d[0] + 2.0 * grad_v[0] / radial + angular / radial**2)

    raise InvalidInputError(f"unknown chart {chart!r}")


def divergence_u(F, point, chart=CHART_CARTESIAN, *, phi=None, h=1e-3, order=2):
    """Divergence of the vector density F * phi in the velocity space.

    F maps chart coordinates to the 3 vector components in that chart's
    coordinate basis; phi is an optional scalar weight (defaults to 1).

    cartesian:  u0 * d_i (F^i phi / u0)            (sqrt(det G) = 1/u0)
    hyperbolic: (1/J) d_c (J F^c phi), J = sinh(a)^2 sin(t)
    photon:     (1/J) d_c (J F^c phi), J = r^2 sin(t)
    """
    if order not in (2, 4):
        raise InvalidInputError("stencil order must be 2 or 4")
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (3,):
        raise InvalidInputError("point must be a 3-vector of chart coordinates")

    def weight(p):
        return 1.0 if phi is None else float(phi(p))

    if chart == CHART_CARTESIAN:
        as_velocity(point)

        def component(k):
            def val(p):
                return float(F(p)[k]) * weight(p) / float(u_zero(p))

            return val

        total = sum(_d1(component(k), point, k, h, order) for k in range(3))
        return float(u_zero(point) * total)

    if chart in (CHART_HYPERBOLIC, CHART_PHOTON):
        radial, theta = point[0], point[1]
        _check_angular_point(radial, theta, chart)

        if chart == CHART_HYPERBOLIC:
            def jac(p):
                return np.sinh(p[0]) ** 2 * np.sin(p[1])
        else:
            def jac(p):
                return p[0] ** 2 * np.sin(p[1])

        def component(k):
            def val(p):
                return jac(p) * float(F(p)[k]) * weight(p)

            return val

        total = sum(_d1(component(k), point, k, h, order) for k in range(3))
        return float(total / jac(point))

    raise InvalidInputError(f"unknown chart {chart!r}")
