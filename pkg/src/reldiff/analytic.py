"""Closed-form solutions used as oracles for the stochastic and PDE solvers.

Contents: modified Bessel functions K_n via their integral representation,
the Juttner equilibrium distribution and an inverse-CDF sampler for it, the
radial transition kernels of force-free diffusion (relativistic, its
nonrelativistic limit, and the massless variant), the radial eigenfunctions
with their analytic derivatives, and low-order spherical harmonics.

Each kernel is normalized so that its own radial measure integrates to one:

    massive   4*pi * int Phi sinh(x)^2 dx = 1
    nonrel    4*pi * int Phi x^2 dx       = 1
    photon    4*pi * int Phi r^2 dr       = 1

The normalization of the relativistic kernel matches its conventional
constant 2*(4*pi)^(-3/2) exactly; for the other two variants the quadrature
check fixes constants a factor 2 (nonrel) and 2*pi (photon) away from the
conventional prefactors, and the normalized values are used throughout.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, quad

from .errors import DomainError, InvalidInputError, UnsupportedModeError
from .rng import STREAM_JUTTNER, CounterRng
from . import geometry

# below this, sinh ratios switch to series to avoid catastrophic cancellation
SMALL_ARG = 1e-6

MASSIVE_KERNEL_CONST = 2.0 * (4.0 * math.pi) ** -1.5
FLAT_KERNEL_CONST = (4.0 * math.pi) ** -1.5

KERNEL_VARIANTS = ("massive", "nonrel", "photon")


# ---------------------------------------------------------------------------
# modified Bessel functions of the second kind
# ---------------------------------------------------------------------------


def bessel_k(n, x):
    """K_n(x) for n in {0, 1, 2} by quadrature of int_0^inf e^{-x cosh t} cosh(nt) dt.

    Relative accuracy ~1e-12 on x in [0.01, 50]; the integrand is scaled by
    e^{x} so large arguments do not underflow inside the quadrature.
    """
    if n not in (0, 1, 2):
        raise DomainError(f"bessel_k supports orders 0, 1, 2; got {n}")
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError("bessel_k requires x > 0")
    # truncation point: e^{-x(cosh t - 1)} cosh(nt) below ~1e-20 relative
    t_max = 1.0
    for _ in range(4):
        t_max = math.acosh(1.0 + (46.0 + n * t_max) / x)
    val, _ = quad(
        lambda t: math.exp(-x * (math.cosh(t) - 1.0)) * math.cosh(n * t),
        0.0,
        t_max,
        epsabs=0.0,
        epsrel=1e-13,
        limit=400,
    )
    return math.exp(-x) * val


# ---------------------------------------------------------------------------
# Juttner equilibrium
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JuttnerParams:
    """Inverse temperature ratio chi = nu / D (friction over diffusion)."""

    chi: float

    def __post_init__(self):
        if not math.isfinite(self.chi) or self.chi <= 0.0:
            raise DomainError("chi must be finite and positive")


def _juttner_scaled_integral(chi, weight="riemannian"):
    """int e^{-chi (cosh a - 1)} sinh^2 a [cosh a] da (exp(chi) times the true one)."""
    if weight not in ("riemannian", "flat_energy"):
        raise InvalidInputError(f"unknown weight {weight!r}")
    a_max = _juttner_alpha_max(chi)

    def integrand(a):
        base = math.exp(-chi * (math.cosh(a) - 1.0)) * math.sinh(a) ** 2
        return base * math.cosh(a) if weight == "flat_energy" else base

    val, _ = quad(integrand, 0.0, a_max, epsabs=0.0, epsrel=1e-12, limit=400)
    return val


def juttner_weight_integral(chi, weight="riemannian"):
    """int_0^inf e^{-chi cosh a} sinh^2 a [cosh a] da by adaptive quadrature.

    weight "riemannian" uses the plain hyperbolic measure; "flat_energy"
    inserts the extra cosh(a) factor of the flat (Lebesgue) velocity measure.
    """
    chi = float(chi)
    if chi <= 0.0:
        raise DomainError("chi must be positive")
    return math.exp(-chi) * _juttner_scaled_integral(chi, weight)


def _juttner_alpha_max(chi):
    a = 1.0
    while chi * (math.cosh(a) - 1.0) - 2.0 * a < 42.0:
        a *= 1.25
        if a > 800.0:
            break
    return a


def juttner_pdf_alpha(alpha, chi):
    """Normalized rapidity marginal p(a) = e^{-chi cosh a} sinh^2 a / Z.

    Density with respect to da; the orientation marginal is uniform on the
    sphere.  Vanishes at a = 0 through the sinh^2 factor.
    """
    chi = float(chi)
    if chi <= 0.0:
        raise DomainError("chi must be positive")
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a < 0.0):
        raise DomainError("alpha must be >= 0")
    z_scaled = _juttner_scaled_integral(chi, "riemannian")
    p = np.exp(-chi * (np.cosh(a) - 1.0)) * np.sinh(a) ** 2 / z_scaled
    return p if p.shape else float(p)


def juttner_mean_cosh(chi):
    """E[cosh a] under the Juttner rapidity marginal, by quadrature."""
    return juttner_weight_integral(chi, "flat_energy") / juttner_weight_integral(chi, "riemannian")


def juttner_cdf_table(chi, n=20001):
    """Monotone CDF table (grid, cdf) of the rapidity marginal."""
    a_max = _juttner_alpha_max(float(chi))
    grid = np.linspace(0.0, a_max, int(n))
    pdf = np.exp(-float(chi) * (np.cosh(grid) - 1.0)) * np.sinh(grid) ** 2
    cdf = np.concatenate([[0.0], cumulative_trapezoid(pdf, grid)])
    cdf /= cdf[-1]
    return grid, cdf


def juttner_alpha_cdf(chi, n=20001):
    """Callable CDF of the rapidity marginal (linear interpolation of a table)."""
    grid, cdf = juttner_cdf_table(chi, n)

    def cdf_fn(a):
        return np.interp(a, grid, cdf, left=0.0, right=1.0)

    return cdf_fn


def _inverse_from_table(u, grid, cdf):
    idx = np.clip(np.searchsorted(cdf, u, side="right"), 1, len(grid) - 1)
    c0 = cdf[idx - 1]
    span = np.maximum(cdf[idx] - c0, 1e-300)
    frac = np.clip((u - c0) / span, 0.0, 1.0)
    return grid[idx - 1] + frac * (grid[idx] - grid[idx - 1])


def sample_juttner(params, n, seed, table_n=20001):
    """Draw n equilibrium points (deterministic in seed) in hyperbolic coordinates.

    Rapidity by inverse-CDF lookup on a precomputed table, direction uniform
    on the sphere.  Accepts a JuttnerParams or a bare chi value.
    """
    chi = params.chi if isinstance(params, JuttnerParams) else float(params)
    n = int(n)
    if n < 1:
        raise InvalidInputError("need at least one sample")
    grid, cdf = juttner_cdf_table(chi, table_n)
    rng = CounterRng(seed, stream=STREAM_JUTTNER)
    u = rng.uniforms4(np.arange(n, dtype=np.uint64))
    alpha = _inverse_from_table(u[:, 0], grid, cdf)
    theta = np.arccos(np.clip(1.0 - 2.0 * u[:, 1], -1.0, 1.0))
    phi = np.mod(2.0 * np.pi * u[:, 2], 2.0 * np.pi)
    return geometry.HyperbolicPoint(alpha=alpha, theta=theta, phi=phi)


# ---------------------------------------------------------------------------
# transition kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelQuery:
    """One kernel evaluation request: variant, radial points, time product D*tau."""

    variant: str
    alpha: float
    alpha0: float
    dtau: float

    def __post_init__(self):
        if self.variant not in KERNEL_VARIANTS:
            raise InvalidInputError(f"unknown kernel variant {self.variant!r}")
        if self.dtau <= 0.0:
            raise DomainError("dtau must be positive")
        if np.any(np.asarray(self.alpha) < 0.0) or np.any(np.asarray(self.alpha0) < 0.0):
            raise DomainError("radial arguments must be >= 0")

    def evaluate(self):
        return heat_kernel(self.variant, self.alpha, self.alpha0, self.dtau)


def _log_sinh(x):
    """log(sinh x) for x > 0, stable for both tiny and large x."""
    x = np.asarray(x, dtype=np.float64)
    small = x < 1e-3
    xs = np.where(small, 1.0, x)
    big = xs + np.log1p(-np.exp(-2.0 * xs)) - math.log(2.0)
    xt = np.where(small, x, 1.0)
    tiny = np.log(np.where(small, xt, 1.0)) + np.log1p(xt * xt / 6.0 + xt**4 / 120.0)
    return np.where(small, tiny, big)


def _log_ratio_sinh(a, b, t):
    """log[ sinh(ab/2t) / (sinh a sinh b) ] with series below SMALL_ARG."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    out = np.empty(a.shape, dtype=np.float64)

    both = (a < SMALL_ARG) & (b < SMALL_ARG)
    a_only = (a < SMALL_ARG) & ~both
    b_only = (b < SMALL_ARG) & ~both
    general = ~(both | a_only | b_only)

    if np.any(general):
        aa, bb = a[general], b[general]
        out[general] = _log_sinh(aa * bb / (2.0 * t)) - _log_sinh(aa) - _log_sinh(bb)
    for mask, small_side, big_side in ((a_only, a, b), (b_only, b, a)):
        if np.any(mask):
            eps, big = small_side[mask], big_side[mask]
            c = big / (2.0 * t)
            # sinh(eps*c)/sinh(eps) = c * (1 + eps^2 (c^2 - 1)/6 + ...)
            out[mask] = np.log(c) + np.log1p(eps * eps * (c * c - 1.0) / 6.0) - _log_sinh(big)
    if np.any(both):
        eps_a, eps_b = a[both], b[both]
        x = eps_a * eps_b / (2.0 * t)
        out[both] = (
            -math.log(2.0 * t)
            + np.log1p(x * x / 6.0)
            - np.log1p(eps_a * eps_a / 6.0)
            - np.log1p(eps_b * eps_b / 6.0)
        )
    return out


def _log_ratio_flat(a, b, t):
    """log[ sinh(ab/2t) / (a b) ] with the series limit for small products."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    a, b = np.broadcast_arrays(a, b)
    x = a * b / (2.0 * t)
    out = np.empty(x.shape, dtype=np.float64)
    small = x < SMALL_ARG
    if np.any(small):
        out[small] = -math.log(2.0 * t) + np.log1p(x[small] ** 2 / 6.0)
    if np.any(~small):
        out[~small] = _log_sinh(x[~small]) - np.log(a[~small]) - np.log(b[~small])
    return out


def heat_kernel(variant, alpha, alpha0, dtau):
    """Radial transition density Phi(alpha, D*tau | alpha0) of force-free diffusion.

    variant "massive" is the hyperbolic-space kernel carrying the e^{-D tau}
    topology factor; "nonrel" and "photon" are the flat-space limits (they
    coincide after normalization).  The alpha0 -> 0 (or alpha -> 0) limits are
    evaluated through series expansions, never by dividing near-zeros.
    """
    if variant not in KERNEL_VARIANTS:
        raise InvalidInputError(f"unknown kernel variant {variant!r}")
    t = float(dtau)
    if t <= 0.0:
        raise DomainError("dtau must be positive")
    a = np.asarray(alpha, dtype=np.float64)
    b = np.asarray(alpha0, dtype=np.float64)
    if np.any(a < 0.0) or np.any(b < 0.0):
        raise DomainError("radial arguments must be >= 0")
    gauss = -(a * a + b * b) / (4.0 * t)
    if variant == "massive":
        log_phi = math.log(MASSIVE_KERNEL_CONST) - 0.5 * math.log(t) - t + _log_ratio_sinh(a, b, t) + gauss
    else:
        log_phi = math.log(2.0 * FLAT_KERNEL_CONST) - 0.5 * math.log(t) + _log_ratio_flat(a, b, t) + gauss
    result = np.exp(log_phi)
    return result if result.shape else float(result)


def kernel_mass(variant, alpha0, dtau):
    """4*pi int Phi * (radial Jacobian) dx, expected to be 1 for every variant."""
    t = float(dtau)
    a0 = float(alpha0)
    upper = a0 + 4.0 * t + 15.0 * math.sqrt(t) + 6.0

    if variant == "massive":
        def jac(x):
            return math.sinh(x) ** 2
    else:
        def jac(x):
            return x * x

    val, _ = quad(
        lambda x: float(heat_kernel(variant, x, a0, t)) * jac(x),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=1e-10,
        limit=400,
    )
    return 4.0 * math.pi * val


def kernel_chapman_kolmogorov(alpha, alpha0, dtau1, dtau2, variant="massive"):
    """Semigroup composition int Phi(a,b,t1) Phi(b,a0,t2) 4 pi sinh^2 b db."""
    t1, t2 = float(dtau1), float(dtau2)
    upper = float(alpha) + float(alpha0) + 4.0 * (t1 + t2) + 15.0 * math.sqrt(t1 + t2) + 6.0

    if variant == "massive":
        def jac(x):
            return math.sinh(x) ** 2
    else:
        def jac(x):
            return x * x

    val, _ = quad(
        lambda b: float(heat_kernel(variant, alpha, b, t1))
        * float(heat_kernel(variant, b, alpha0, t2))
        * jac(b),
        0.0,
        upper,
        epsabs=0.0,
        epsrel=1e-10,
        limit=400,
    )
    return 4.0 * math.pi * val


def kernel_pde_residual(variant, alpha, alpha0, dtau, h, radial_coefficient="2/r"):
    """Finite-difference residual of d(Phi)/d(Dtau) = [d^2_r + c(r) d_r] Phi.

    The drift coefficient c(r) is 2*coth(r) for the massive kernel and 2/r
    for the flat variants.  For the photon variant radial_coefficient may be
    set to "2r" to probe the alternative first-order term c(r) = 2r; the
    residual then does not converge to zero, which is the discriminating
    check between the two operator readings.
    """
    a = float(alpha)
    t = float(dtau)
    if a - 2.0 * h <= 0.0 or t - h <= 0.0:
        raise DomainError("stencil would leave the kernel domain")

    def phi(x, tt):
        return float(heat_kernel(variant, x, alpha0, tt))

    dt = (phi(a, t + h) - phi(a, t - h)) / (2.0 * h)
    d1 = (phi(a + h, t) - phi(a - h, t)) / (2.0 * h)
    d2 = (phi(a + h, t) - 2.0 * phi(a, t) + phi(a - h, t)) / (h * h)

    if variant == "massive":
        c = 2.0 / math.tanh(a)
    elif radial_coefficient == "2/r":
        c = 2.0 / a
    elif radial_coefficient == "2r":
        c = 2.0 * a
    else:
        raise InvalidInputError(f"unknown radial coefficient {radial_coefficient!r}")
    return dt - (d2 + c * d1)


# ---------------------------------------------------------------------------
# radial eigenfunctions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EigenmodeIndex:
    """Mode labels: angular (J, M) and the continuous radial parameter kappa."""

    j: int
    m: int
    kappa: float

    def __post_init__(self):
        if self.j < 0 or abs(self.m) > self.j:
            raise DomainError("need J >= 0 and |M| <= J")
        if self.kappa <= 0.0:
            raise DomainError("kappa must be positive")


def _term_diff(terms, k):
    """d/dalpha of a sum of coeff * trig(k a) * cosh^p(a) * sinh^r(a) terms."""
    out = {}

    def add(coeff, trig, p, r):
        key = (trig, p, r)
        out[key] = out.get(key, 0.0) + coeff

    for coeff, trig, p, r in terms:
        if trig == "sin":
            add(coeff * k, "cos", p, r)
        else:
            add(-coeff * k, "sin", p, r)
        if p:
            add(coeff * p, trig, p - 1, r + 1)
        if r:
            add(coeff * r, trig, p + 1, r - 1)
    return [(c, t, p, r) for (t, p, r), c in out.items() if c != 0.0]


def _term_eval(terms, k, a):
    sh, ch = np.sinh(a), np.cosh(a)
    s, c = np.sin(k * a), np.cos(k * a)
    total = np.zeros_like(a)
    for coeff, trig, p, r in terms:
        total = total + coeff * (s if trig == "sin" else c) * ch**p * sh**r
    return total


def _eigen_terms(j, k):
    """Term list of g_J^kappa: sinh^J times (J+1) hyperbolic-z derivatives of cos(k a)."""
    terms = [(1.0, "cos", 0, 0)]
    for _ in range(j + 1):
        # apply (1/sinh) d/dalpha
        terms = [(c, t, p, r - 1) for c, t, p, r in _term_diff(terms, k)]
    terms = [(c, t, p, r + j) for c, t, p, r in terms]
    if j == 0:
        const = 1.0 / (math.sqrt(2.0) * math.pi * k)
    elif j == 1:
        const = 1.0 / (2.0 * math.pi**2 * k * math.sqrt(k * k + 1.0))
    else:
        const = -1.0 / (
            2.0 * math.sqrt(2.0) * math.pi**3 * k * math.sqrt(k * k + 1.0) * math.sqrt(k * k + 4.0)
        )
    return [(const * c, t, p, r) for c, t, p, r in terms]


def _eigen_pieces(j, kappa, alpha):
    """(g, g', g'') evaluated from exact term algebra, J in {0, 1, 2}."""
    if j not in (0, 1, 2):
        raise UnsupportedModeError(f"no closed form shipped for J = {j}")
    k = float(kappa)
    if k <= 0.0:
        raise DomainError("kappa must be positive")
    a = np.asarray(alpha, dtype=np.float64)
    g_terms = _eigen_terms(j, k)
    g1_terms = _term_diff(g_terms, k)
    g2_terms = _term_diff(g1_terms, k)
    return _term_eval(g_terms, k, a), _term_eval(g1_terms, k, a), _term_eval(g2_terms, k, a)


def eigenfunction_g(j, kappa, alpha):
    """Radial eigenfunction g_J^kappa(alpha) of the hyperbolic radial operator.

    J = 0 is -sin(kappa*alpha) / (sqrt(2) pi sinh(alpha)); higher J come from
    repeated z-derivatives of cos(kappa*arccosh z) at z = cosh(alpha).
    """
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a <= 0.0):
        raise DomainError("alpha must be positive")
    g, _, _ = _eigen_pieces(j, kappa, a)
    return g if g.shape else float(g)


def eigen_residual(j, kappa, alpha, d_hat=1.0, lam=None):
    """|D [g'' + 2 coth(a) g' - J(J+1) g / sinh^2 a] + lambda g| from analytic derivatives.

    lambda defaults to the decay rate D (kappa^2 + 1) of the mode; correct
    eigenfunctions give residuals at roundoff level, an off-by-D eigenvalue
    leaves a residual of size D |g|.
    """
    a = np.asarray(alpha, dtype=np.float64)
    if np.any(a <= 0.0):
        raise DomainError("alpha must be positive")
    d = float(d_hat)
    if lam is None:
        lam = d * (float(kappa) ** 2 + 1.0)
    g, g1, g2 = _eigen_pieces(j, kappa, a)
    radial = g2 + 2.0 * g1 / np.tanh(a) - j * (j + 1) * g / np.sinh(a) ** 2
    res = np.abs(d * radial + lam * g)
    return res if res.shape else float(res)


# ---------------------------------------------------------------------------
# spherical harmonics (J <= 2, unit L2 norm on the sphere)
# ---------------------------------------------------------------------------

_Y_NORMS = {
    (0, 0): 0.5 * math.sqrt(1.0 / math.pi),
    (1, 0): math.sqrt(3.0 / (4.0 * math.pi)),
    (1, 1): -math.sqrt(3.0 / (8.0 * math.pi)),
    (2, 0): 0.25 * math.sqrt(5.0 / math.pi),
    (2, 1): -math.sqrt(15.0 / (8.0 * math.pi)),
    (2, 2): 0.25 * math.sqrt(15.0 / (2.0 * math.pi)),
}


def spherical_harmonic(j, m, theta, phi):
    """Complex Y_J^M(theta, phi), orthonormal in L2 of the unit sphere."""
    if j not in (0, 1, 2) or abs(m) > j:
        raise DomainError(f"need J in {{0,1,2}} and |M| <= J, got J={j}, M={m}")
    theta = np.asarray(theta, dtype=np.float64)
    phi = np.asarray(phi, dtype=np.float64)
    ct, st = np.cos(theta), np.sin(theta)
    mm = abs(m)
    if (j, mm) == (0, 0):
        base = np.ones_like(ct)
    elif (j, mm) == (1, 0):
        base = ct
    elif (j, mm) == (1, 1):
        base = st
    elif (j, mm) == (2, 0):
        base = 3.0 * ct * ct - 1.0
    elif (j, mm) == (2, 1):
        base = st * ct
    else:
        base = st * st
    val = _Y_NORMS[(j, mm)] * base * np.exp(1j * mm * phi)
    if m < 0:
        val = (-1.0) ** mm * np.conj(val)
    return val if np.asarray(val).shape else complex(val)
