"""Damped Jaynes-Cummings model with a resonant Lorentzian reservoir.

Everything follows from the real amplitude function G(t): the excited
population decays as G^2 and the coherence as G. Quantities are evaluated
in the interaction picture, where the Lamb shift vanishes for this spectrum.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .analysis import Trajectory
from .dynamics import IntegratorConfig, TimeLocalGenerator, integrate, SIGMA_MINUS
from .errors import AccuracyWarning, DomainError, SingularRateError
from .spectral import Lorentzian


@dataclass(frozen=True)
class JcParams:
    omega0: float
    gamma0: float
    lam: float

    def __post_init__(self):
        for name in ("omega0", "gamma0", "lam"):
            if not getattr(self, name) > 0:
                raise DomainError(f"JcParams.{name} must be > 0, got {getattr(self, name)!r}")

    @property
    def markovian(self):
        return self.gamma0 < self.lam / 2

    @property
    def d_squared(self):
        return self.lam**2 - 2 * self.gamma0 * self.lam

    @property
    def spectral_density(self):
        return Lorentzian(self.gamma0, self.lam, self.omega0)


@dataclass(frozen=True)
class JcState:
    t: np.ndarray
    G: np.ndarray
    Gdot: np.ndarray


def _branch(p, t):
    """Return cosh(dt/2) and sinh(dt/2)/d, rewritten with real trig when d is imaginary."""
    d2 = p.d_squared
    if d2 > 0:
        d = np.sqrt(d2)
        return np.cosh(d * t / 2), np.sinh(d * t / 2) / d
    if d2 < 0:
        d = np.sqrt(-d2)
        return np.cos(d * t / 2), np.sin(d * t / 2) / d
    return np.ones_like(t), t / 2


def _as_time(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("time must be >= 0")
    return t


def g_closed_form(p, t):
    """Amplitude G(t) and its derivative."""
    t = _as_time(t)
    c, sd = _branch(p, t)
    env = np.exp(-p.lam * t / 2)
    G = env * (c + p.lam * sd)
    Gdot = -p.gamma0 * p.lam * env * sd
    return JcState(t, G, Gdot)


def jc_rate(p, t, *, threshold=1e-12, on_singular="raise"):
    """Relaxation rate gamma(t) = -2 Gdot/G.

    ``on_singular="flag"`` returns +-inf where |G| < ``threshold`` instead of
    raising :class:`SingularRateError`.
    """
    t = _as_time(t)
    c, sd = _branch(p, t)
    denom = c + p.lam * sd
    G = np.exp(-p.lam * t / 2) * denom
    singular = np.abs(G) < threshold
    if np.any(singular) and on_singular == "raise":
        i = np.flatnonzero(np.atleast_1d(singular))[0]
        raise SingularRateError(float(np.atleast_1d(t)[i]), float(np.atleast_1d(G)[i]))
    num = 2 * p.gamma0 * p.lam * sd
    with np.errstate(divide="ignore", invalid="ignore"):
        rate = num / denom
    rate = np.where(singular, np.copysign(np.inf, num * denom), rate)
    return float(rate) if rate.ndim == 0 else rate


def jc_rho(p, eta, t):
    """Bloch vector(s) (B1, B2, B3) of the reduced state for initial angle ``eta``."""
    st = g_closed_form(p, t)
    G = st.G
    return np.stack([np.sin(eta) * G, np.zeros_like(G), (np.cos(eta) + 1) * G**2 - 1], axis=-1)


def jc_qfi_flow(p, t):
    """QFI flow 2 G Gdot at the optimal initial state sin(eta) = 1.

    This is the flow of the coherence-based Fisher information G^2, i.e. of
    |z x B|^2; see :func:`jc_qfi_flow_bloch` for the |B|^2 variant.
    """
    st = g_closed_form(p, t)
    return 2 * st.G * st.Gdot


def jc_qfi_flow_bloch(p, t):
    """Time derivative of |B|^2 = G^2 + (G^2 - 1)^2 at sin(eta) = 1."""
    st = g_closed_form(p, t)
    return 2 * st.G * st.Gdot * (2 * st.G**2 - 1)


def jc_energy_current(p, t):
    """Energy current d<H_s>/dt = omega0 G Gdot at sin(eta) = 1."""
    st = g_closed_form(p, t)
    return p.omega0 * st.G * st.Gdot


def lorentzian_memory_kernel(sd):
    """Memory kernel f(u) = (gamma0 lam / 2) exp(-lam |u|) of a resonant Lorentzian."""
    def f(u):
        return 0.5 * sd.gamma0 * sd.lam * np.exp(-sd.lam * np.abs(u))
    return f


def g_volterra(source, t_max, dt, *, memory_kernel=None, max_dt_lam=0.01):
    """Solve dG/dt = -int_0^t f(t - s) G(s) ds, G(0) = 1, on a uniform grid.

    ``source`` is a :class:`JcParams` or a resonant :class:`Lorentzian`; a
    custom real ``memory_kernel`` callable overrides the Lorentzian one.
    Trapezoidal product integration of the memory term combined with the
    trapezoidal rule in time; the implicit end-point term is solved exactly
    because the scheme is linear.

    Returns ``(t, G)``.
    """
    sd = source.spectral_density if isinstance(source, JcParams) else source
    if dt <= 0 or t_max <= 0:
        raise DomainError("t_max and dt must be positive")
    if dt > max_dt_lam / sd.lam:
        warnings.warn(f"dt={dt} exceeds {max_dt_lam}/lambda; G may be inaccurate",
                      AccuracyWarning, stacklevel=2)
    f = memory_kernel or lorentzian_memory_kernel(sd)
    n = int(round(t_max / dt))
    t = dt * np.arange(n + 1)
    fk = np.asarray(f(t), dtype=float)
    G = np.empty(n + 1)
    G[0] = 1.0
    # F[i] = dG/dt at t_i
    F_prev = 0.0
    denom = 1.0 + 0.25 * dt * dt * fk[0]
    for i in range(n):
        m = i + 1
        # memory sum for t_m excluding the G[m] end point
        if m == 1:
            partial = 0.5 * fk[1] * G[0]
        else:
            partial = 0.5 * fk[m] * G[0] + fk[m - 1:0:-1] @ G[1:m]
        P = -dt * partial
        G[m] = (G[i] + 0.5 * dt * (F_prev + P)) / denom
        F_prev = P - 0.5 * dt * fk[0] * G[m]
    return t, G


def g_zeros(p, t_max, *, n_scan=None):
    """Zeros of the closed-form G on (0, t_max], root-polished with brentq."""
    n_scan = n_scan or max(2000, int(50 * t_max * max(p.lam, p.gamma0)))
    t = np.linspace(0.0, t_max, n_scan + 1)
    G = g_closed_form(p, t).G
    idx = np.flatnonzero(np.sign(G[:-1]) * np.sign(G[1:]) < 0)
    f = lambda x: float(g_closed_form(p, x).G)
    return np.array([brentq(f, t[i], t[i + 1], xtol=1e-15) for i in idx])


def jc_trajectory(p, t):
    """Closed-form trajectory at the optimal initial state sin(eta) = 1."""
    t = _as_time(t)
    st = g_closed_form(p, t)
    B = jc_rho(p, np.pi / 2, t)
    flow = 2 * st.G * st.Gdot
    return Trajectory(
        t=t,
        B=B,
        F_M=st.G**2,
        I_Q=flow,
        I_E=p.omega0 * st.G * st.Gdot,
        rates={"gamma": jc_rate(p, t, on_singular="flag"),
               "G": st.G,
               "F_bloch": np.sum(B**2, axis=1),
               "I_Q_bloch": flow * (2 * st.G**2 - 1)},
        provenance="jc-closed",
        omega0=p.omega0,
    )


def jc_generator(p):
    """Interaction-picture time-local generator: pure decay at rate gamma(t)."""
    return TimeLocalGenerator(dissipators=[(lambda t: jc_rate(p, t), SIGMA_MINUS)])


def jc_oracle(p, t, *, guard=None, cfg=None, eta=np.pi / 2):
    """Integrate the JC master equation numerically between zeros of G.

    Each segment starts from the closed-form state just after a zero (or at
    t=0) and stops ``guard`` before the next zero, where gamma(t) diverges.
    Returns a list of ``(t_segment, B_segment)`` pairs on the points of
    ``t`` that fall inside the segments.
    """
    t = _as_time(t)
    cfg = cfg or IntegratorConfig()
    guard = guard if guard is not None else 1e-2 / p.lam
    zeros = g_zeros(p, float(t[-1])) if not p.markovian else np.array([])
    starts = np.concatenate([[0.0], zeros + guard])
    stops = np.concatenate([zeros - guard, [t[-1]]])
    segments = []
    for a, b in zip(starts, stops):
        sel = (t >= a) & (t <= b)
        if b <= a or sel.sum() < 2:
            continue
        grid = np.concatenate([[a], t[sel]]) if t[sel][0] > a else t[sel]
        B0 = jc_rho(p, eta, a)
        traj = integrate(jc_generator(p), B0, grid, cfg,
                         energy_field=np.array([0.0, 0.0, p.omega0]))
        keep = np.isin(grid, t[sel])
        segments.append((grid[keep], traj.B[keep]))
    return segments
