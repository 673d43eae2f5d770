"""Stochastic integration of relativistic Langevin dynamics.

The state of each particle is (x, u, E, tau): position, reduced velocity on
the hyperboloid, an orthonormal velocity frame and proper time.  One proper
time step integrates

    dx^i = u^i dtau
    du^i = E_a^i dW^a + F^i dtau
    dE_a^i = -gamma^i_ml E_a^l o du^m        (Stratonovich transport)

with Wiener increments of covariance 2 D dtau per frame direction, so the
velocity generator is D * Laplace-Beltrami plus the force drift.

Two schemes are provided:

  heun_stratonovich  predictor/corrector midpoint rule on (u, E), transporting
                     the frame along the midpoint velocity increment and
                     re-orthonormalizing it periodically;
  euler_ito          cartesian Euler with the explicit noise-induced drift
                     3 D u^i, regenerating the canonical frame each step
                     (lawful: the velocity law sees the frame only through
                     sum_a E_a^i E_a^j = G^ij).

Ensembles are data parallel: every particle's noise is addressed by
(seed, particle, step), so results are bit-identical for any thread count.
"""

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from . import geometry
from .errors import DegenerateFrameError, InvalidInputError, NumericBlowupError
from .rng import NoiseStream

INTEGRATORS = ("heun_stratonovich", "euler_ito")


# ---------------------------------------------------------------------------
# state and configuration containers
# ---------------------------------------------------------------------------


@dataclass
class Ensemble:
    """Arrays of particle states sharing one proper time.

    x: (n, 3) positions, u: (n, 3) reduced velocities, frame: (n, 3, 3)
    orthonormal frames (column a = frame vector a), lab_time: (n,) accumulated
    laboratory time sum(u0 dtau).
    """

    x: np.ndarray
    u: np.ndarray
    frame: np.ndarray
    tau: float
    lab_time: np.ndarray

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=np.float64)
        self.u = np.asarray(self.u, dtype=np.float64)
        self.frame = np.asarray(self.frame, dtype=np.float64)
        self.lab_time = np.asarray(self.lab_time, dtype=np.float64)
        n = self.u.shape[0]
        if self.u.shape != (n, 3) or self.x.shape != (n, 3):
            raise InvalidInputError("x and u must have shape (n, 3)")
        if self.frame.shape != (n, 3, 3):
            raise InvalidInputError("frame must have shape (n, 3, 3)")
        if self.lab_time.shape != (n,):
            raise InvalidInputError("lab_time must have shape (n,)")

    @property
    def n(self):
        return self.u.shape[0]

    @property
    def u0(self):
        return np.sqrt(1.0 + np.sum(self.u * self.u, axis=1))

    @classmethod
    def at_rest(cls, n):
        """All particles at the origin of velocity space with identity frames."""
        n = int(n)
        return cls(
            x=np.zeros((n, 3)),
            u=np.zeros((n, 3)),
            frame=np.broadcast_to(np.eye(3), (n, 3, 3)).copy(),
            tau=0.0,
            lab_time=np.zeros(n),
        )

    @classmethod
    def from_velocities(cls, u, tau=0.0):
        u = geometry.as_velocity(np.atleast_2d(u))
        n = u.shape[0]
        return cls(
            x=np.zeros((n, 3)),
            u=u.copy(),
            frame=geometry.canonical_frame(u),
            tau=float(tau),
            lab_time=np.zeros(n),
        )

    @classmethod
    def from_hyperbolic(cls, points, tau=0.0):
        return cls.from_velocities(geometry.from_hyperbolic(points), tau=tau)

    def copy(self):
        return Ensemble(
            x=self.x.copy(),
            u=self.u.copy(),
            frame=self.frame.copy(),
            tau=self.tau,
            lab_time=self.lab_time.copy(),
        )


class ForceModel:
    """Deterministic forcing of the velocity equation.

    Variants: free motion, isotropic friction F = -nu u u0 against a bath at
    rest, a constant electromagnetic field tensor acting through
    (e/m) F^i_nu u^nu, or a custom callback (u, u0) -> (n, 3).
    """

    def __init__(self, kind, nu=0.0, em_tensor=None, e_over_m=1.0, func=None):
        self.kind = kind
        self.nu = float(nu)
        self.em_tensor = em_tensor
        self.e_over_m = float(e_over_m)
        self.func = func

    @classmethod
    def free(cls):
        return cls("free")

    @classmethod
    def isotropic_friction(cls, nu):
        if nu < 0.0:
            raise InvalidInputError("friction coefficient must be >= 0")
        return cls("isotropic_friction", nu=nu)

    @classmethod
    def electromagnetic(cls, tensor, e_over_m=1.0):
        t = np.asarray(tensor, dtype=np.float64)
        if t.shape != (4, 4):
            raise InvalidInputError("field tensor must be 4x4")
        if np.max(np.abs(t + t.T)) > 1e-12 * max(1.0, np.max(np.abs(t))):
            raise InvalidInputError("field tensor must be antisymmetric")
        return cls("electromagnetic", em_tensor=t, e_over_m=e_over_m)

    @classmethod
    def custom(cls, func):
        return cls("custom", func=func)

    def __call__(self, u, u0):
        out = np.empty_like(u)
        self.eval_into(u, u0, out)
        return out

    def eval_into(self, u, u0, out):
        """Evaluate the force into a preallocated (n, 3) buffer."""
        if self.kind == "free":
            out[...] = 0.0
        elif self.kind == "isotropic_friction":
            np.multiply(u, u0[:, None], out=out)
            out *= -self.nu
        elif self.kind == "electromagnetic":
            t = self.em_tensor
            # F^i_nu u^nu with u_nu = (-u0, u) under signature (-,+,+,+)
            np.matmul(u, t[1:, 1:].T, out=out)
            out -= u0[:, None] * t[1:, 0]
            out *= self.e_over_m
        else:
            out[...] = np.asarray(self.func(u, u0), dtype=np.float64)


def force_eval(model, u):
    """Force on a single velocity or a batch; convenience over model(u, u0)."""
    arr = geometry.as_velocity(np.atleast_2d(u))
    out = model(arr, np.sqrt(1.0 + np.sum(arr * arr, axis=1)))
    return out[0] if np.asarray(u).ndim == 1 else out


@dataclass(frozen=True)
class SimConfig:
    """Numerical parameters of one ensemble integration."""

    d_hat: float
    dtau: float
    steps: int
    particles: int
    seed: int
    integrator: str = "heun_stratonovich"
    snapshot_every: Optional[int] = None
    reortho_every: int = 1

    def __post_init__(self):
        if self.d_hat < 0.0:
            raise InvalidInputError("diffusion constant must be >= 0")
        if self.dtau <= 0.0:
            raise InvalidInputError("dtau must be positive")
        if self.steps < 0 or self.particles < 1:
            raise InvalidInputError("need steps >= 0 and particles >= 1")
        if self.integrator not in INTEGRATORS:
            raise InvalidInputError(f"unknown integrator {self.integrator!r}")
        if self.reortho_every < 1:
            raise InvalidInputError("reortho_every must be >= 1")
        if self.dtau * self.d_hat > 0.1:
            warnings.warn("dtau * D exceeds 0.1; results may be badly biased", stacklevel=2)


def spurious_ito_drift(u, d_hat):
    """Noise-induced drift 3 D u^k of the cartesian Ito form.

    This is -D G^{ij} gamma^k_ij for the hyperboloid connection, i.e. the
    correction that makes an Euler update sample the same generator as the
    frame-transported Stratonovich equation.  d_hat is the generator scale.
    """
    return 3.0 * float(d_hat) * np.asarray(u, dtype=np.float64)


# ---------------------------------------------------------------------------
# single-step kernels (vectorized over particles, operate in place)
#
# All intermediates live in a per-chunk workspace: the arrays involved are
# megabyte scale, where allocator round trips cost more than the arithmetic.
# ---------------------------------------------------------------------------


class _Workspace:
    """Preallocated scratch arrays for the step kernels, one per worker."""

    def __init__(self, n):
        self.n = n
        self.s1, self.s2, self.s3, self.s4 = (np.empty(n) for _ in range(4))
        (
            self.dw,
            self.a1,
            self.f1,
            self.f2,
            self.du,
            self.t1,
            self.t2,
            self.ue,
            self.upred,
        ) = (np.empty((n, 3)) for _ in range(9))
        self.m1 = np.empty((n, 3, 3))
        self.m2 = np.empty((n, 3, 3))


def _step_euler(u, x, lab, model, d_hat, dtau, xi, ws):
    u0, udw = ws.s1, ws.s2
    dw, drift, edw = ws.dw, ws.f1, ws.t1

    np.einsum("ni,ni->n", u, u, out=u0)
    u0 += 1.0
    np.sqrt(u0, out=u0)
    # streaming and lab time from the pre-step state
    np.multiply(u, dtau, out=ws.t2)
    x += ws.t2
    np.multiply(u0, dtau, out=udw)
    lab += udw
    # deterministic drift: force + noise-induced 3 D u, times dtau
    model.eval_into(u, u0, drift)
    np.multiply(u, 3.0 * d_hat, out=ws.t2)
    drift += ws.t2
    drift *= dtau
    # noise through the canonical frame: E dw = dw + u (u.dw)/(1+u0)
    np.multiply(xi, np.sqrt(2.0 * d_hat * dtau), out=dw)
    np.einsum("ni,ni->n", u, dw, out=udw)
    u0 += 1.0
    udw /= u0
    np.multiply(u, udw[:, None], out=edw)
    edw += dw
    u += drift
    u += edw


def _step_heun(u, frame, x, lab, model, d_hat, dtau, xi, ws):
    u0sq, u0, c1, u0p_sq = ws.s1, ws.s2, ws.s3, ws.s4
    dw, a1, f1, f2, du, t1, t2, ue, upred = (
        ws.dw,
        ws.a1,
        ws.f1,
        ws.f2,
        ws.du,
        ws.t1,
        ws.t2,
        ws.ue,
        ws.upred,
    )
    frame_pred, outer = ws.m1, ws.m2

    np.einsum("ni,ni->n", u, u, out=u0sq)
    u0sq += 1.0
    np.sqrt(u0sq, out=u0)
    np.multiply(u, dtau, out=t1)
    x += t1
    np.multiply(u0, dtau, out=c1)
    lab += c1

    np.multiply(xi, np.sqrt(2.0 * d_hat * dtau), out=dw)
    model.eval_into(u, u0, f1)
    np.einsum("nia,na->ni", frame, dw, out=a1)
    # predictor increment du = E dW + F dtau
    np.multiply(f1, dtau, out=du)
    du += a1
    # transport coefficient s_a = du.(G E)_a = du.E_a - (du.u)(u.E_a)/u0^2
    np.einsum("ni,nia->na", u, frame, out=ue)
    np.einsum("nm,nma->na", du, frame, out=t1)
    np.einsum("ni,ni->n", du, u, out=c1)
    c1 /= u0sq
    np.multiply(ue, c1[:, None], out=t2)
    t1 -= t2
    # predictor frame E* = E + u x s, predictor velocity u* = u + du
    np.multiply(u[:, :, None], t1[:, None, :], out=frame_pred)
    frame_pred += frame
    np.add(u, du, out=upred)
    np.einsum("ni,ni->n", upred, upred, out=u0p_sq)
    u0p_sq += 1.0
    np.sqrt(u0p_sq, out=c1)
    model.eval_into(upred, c1, f2)
    np.einsum("nia,na->ni", frame_pred, dw, out=t1)  # a2
    # corrector: midpoint coefficients applied to the same increments
    np.add(a1, t1, out=du)
    du *= 0.5
    np.add(f1, f2, out=t1)
    t1 *= 0.5 * dtau
    du += t1
    # frame transport along the midpoint du, averaged between both states
    np.einsum("nm,nma->na", du, frame, out=t1)
    np.einsum("ni,ni->n", du, u, out=c1)
    c1 /= u0sq
    np.multiply(ue, c1[:, None], out=t2)
    t1 -= t2
    np.multiply(u[:, :, None], t1[:, None, :], out=outer)
    np.einsum("ni,nia->na", upred, frame_pred, out=ue)
    np.einsum("nm,nma->na", du, frame_pred, out=t1)
    np.einsum("ni,ni->n", du, upred, out=c1)
    c1 /= u0p_sq
    np.multiply(ue, c1[:, None], out=t2)
    t1 -= t2
    np.multiply(upred[:, :, None], t1[:, None, :], out=frame_pred)
    outer += frame_pred
    outer *= 0.5
    frame += outer
    u += du


def _orthonormalize_frames(frame, u, ws):
    """In-place Gram-Schmidt in the G(u) metric (Cholesky form, no allocs)."""
    u0sq, ca, cb, cc = ws.s1, ws.s2, ws.s3, ws.s4
    t1 = ws.t1

    np.einsum("ni,ni->n", u, u, out=u0sq)
    u0sq += 1.0
    e0, e1, e2 = frame[:, :, 0], frame[:, :, 1], frame[:, :, 2]

    def gram(va, vb, out):
        np.einsum("ni,ni->n", va, vb, out=out)
        np.einsum("ni,ni->n", u, va, out=ws.s_ga)
        np.einsum("ni,ni->n", u, vb, out=ws.s_gb)
        ws.s_ga *= ws.s_gb
        ws.s_ga /= u0sq
        out -= ws.s_ga

    if not hasattr(ws, "s_ga"):
        ws.s_ga = np.empty(ws.n)
        ws.s_gb = np.empty(ws.n)
        ws.s_gc = np.empty(ws.n)

    # column 0
    gram(e0, e0, ca)
    if np.any(ca <= 1e-28):
        raise DegenerateFrameError("frame columns are linearly dependent")
    np.sqrt(ca, out=ca)
    e0 /= ca[:, None]
    # column 1
    gram(e1, e0, cb)
    np.multiply(e0, cb[:, None], out=t1)
    e1 -= t1
    gram(e1, e1, cc)
    if np.any(cc <= 1e-28):
        raise DegenerateFrameError("frame columns are linearly dependent")
    np.sqrt(cc, out=cc)
    e1 /= cc[:, None]
    # column 2
    gram(e2, e0, cb)
    np.multiply(e0, cb[:, None], out=t1)
    e2 -= t1
    gram(e2, e1, cb)
    np.multiply(e1, cb[:, None], out=t1)
    e2 -= t1
    gram(e2, e2, cc)
    if np.any(cc <= 1e-28):
        raise DegenerateFrameError("frame columns are linearly dependent")
    np.sqrt(cc, out=cc)
    e2 /= cc[:, None]


def step(state, model, cfg, noise):
    """One integration step of a full ensemble; returns a new Ensemble.

    noise holds one standard normal triple per particle.  Raises
    NumericBlowupError identifying the first particle that left the finite
    range.  Convenience wrapper over the in-place kernels used by
    simulate_ensemble.
    """
    out = state.copy()
    xi = np.asarray(noise, dtype=np.float64)
    if xi.shape != (out.n, 3):
        raise InvalidInputError("noise must have shape (n, 3)")
    ws = _Workspace(out.n)
    if cfg.integrator == "euler_ito":
        _step_euler(out.u, out.x, out.lab_time, model, cfg.d_hat, cfg.dtau, xi, ws)
        out.frame = geometry.canonical_frame(out.u)
    else:
        _step_heun(out.u, out.frame, out.x, out.lab_time, model, cfg.d_hat, cfg.dtau, xi, ws)
        if cfg.reortho_every == 1:
            _orthonormalize_frames(out.frame, out.u, ws)
    if not np.all(np.isfinite(out.u)):
        bad = int(np.argmax(~np.all(np.isfinite(out.u), axis=1)))
        raise NumericBlowupError(particle=bad, step=0)
    out.tau = state.tau + cfg.dtau
    return out


# ---------------------------------------------------------------------------
# ensemble driver
# ---------------------------------------------------------------------------


@dataclass
class Snapshot:
    tau: float
    step: int
    u: np.ndarray


@dataclass
class SimResult:
    final: Ensemble
    snapshots: List[Snapshot] = field(default_factory=list)


def _simulate_chunk(u, frame, x, lab, lo, model, cfg, snap_steps, snap_buffers):
    """Integrate particles [lo, lo+len(u)) through all steps (arrays in place)."""
    stream = NoiseStream(cfg.seed)
    hi = lo + u.shape[0]
    euler = cfg.integrator == "euler_ito"
    ws = _Workspace(u.shape[0])
    for s in range(cfg.steps):
        xi = stream.normals(s, lo, hi)
        if euler:
            _step_euler(u, x, lab, model, cfg.d_hat, cfg.dtau, xi, ws)
        else:
            _step_heun(u, frame, x, lab, model, cfg.d_hat, cfg.dtau, xi, ws)
            if (s + 1) % cfg.reortho_every == 0:
                _orthonormalize_frames(frame, u, ws)
        if not np.all(np.isfinite(u)):
            bad = int(np.argmax(~np.all(np.isfinite(u), axis=1)))
            raise NumericBlowupError(particle=lo + bad, step=s)
        if s + 1 in snap_steps:
            snap_buffers[snap_steps.index(s + 1)][lo:hi] = u


def simulate_ensemble(init, model, cfg, threads=1):
    """Integrate an ensemble for cfg.steps steps of cfg.dtau.

    Bit-identical output for identical (cfg.seed, init) regardless of the
    number of threads: every particle's trajectory depends only on its own
    counter-addressed noise.  Snapshots of the velocities are taken every
    cfg.snapshot_every steps when configured.
    """
    if init.n != cfg.particles:
        raise InvalidInputError(f"config expects {cfg.particles} particles, ensemble has {init.n}")
    if getattr(model, "nu", 0.0) * cfg.dtau > 0.1:
        warnings.warn("dtau * nu exceeds 0.1; results may be badly biased", stacklevel=2)

    state = init.copy()
    snap_steps: Tuple[int, ...] = ()
    if cfg.snapshot_every:
        snap_steps = tuple(range(cfg.snapshot_every, cfg.steps + 1, cfg.snapshot_every))
    snap_list = list(snap_steps)
    snap_buffers = [np.empty((state.n, 3)) for _ in snap_list]

    n = state.n
    threads = max(1, int(threads))
    # align chunk boundaries to noise blocks so threads never share a block
    from .rng import NOISE_PARTICLE_BLOCK

    n_blocks = -(-n // NOISE_PARTICLE_BLOCK)
    bounds = np.unique(
        np.minimum(np.linspace(0, n_blocks, min(threads, n_blocks) + 1).astype(int) * NOISE_PARTICLE_BLOCK, n)
    )
    chunks = [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]

    def run(span):
        lo, hi = span
        _simulate_chunk(
            state.u[lo:hi],
            state.frame[lo:hi],
            state.x[lo:hi],
            state.lab_time[lo:hi],
            lo,
            model,
            cfg,
            snap_list,
            snap_buffers,
        )

    if len(chunks) == 1:
        run(chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            for result in pool.map(run, chunks):
                _ = result  # re-raise worker exceptions in order

    if cfg.integrator == "euler_ito":
        state.frame = geometry.canonical_frame(state.u)
    state.tau = init.tau + cfg.steps * cfg.dtau
    snapshots = [
        Snapshot(tau=init.tau + s * cfg.dtau, step=s, u=buf)
        for s, buf in zip(snap_list, snap_buffers)
    ]
    return SimResult(final=state, snapshots=snapshots)
