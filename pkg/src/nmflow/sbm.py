"""Spin-boson model at second order in the coupling with the rotating-wave
approximation.

The Bloch equation dB/dt = M(t) B + b(t) has the closed solution

    B(t) = (e^-Lambda sin(eta) cos(w0 t), e^-Lambda sin(eta) sin(w0 t), e^-Gamma (cos(eta) + delta))

with Gamma = int gamma_s, Lambda = Gamma / 2 and delta = int e^Gamma gamma_d.
Rates are available two ways: by frequency quadrature of the golden-rule-like
sinc integrals (:func:`sbm_rates`) and by time integration of the noise and
dissipation kernels (:func:`sbm_rates_kernel`, :func:`sbm_integrals`).
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .analysis import Trajectory
from .dynamics import SIGMA_MINUS, SIGMA_PLUS, TimeLocalGenerator
from .errors import DomainError, HorizonError, WeakCouplingWarning
from .quadrature import adaptive_gk, gauss_legendre_cumulative, hermite_cumulative
from .spectral import OhmicFamily, bose_occupation, ohmic_kernels

# exp(Gamma) must stay finite
_MAX_GAMMA = 700.0


@dataclass(frozen=True)
class SbmParams:
    omega0: float
    sd: OhmicFamily
    T: float

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError("omega0 must be > 0")
        if self.T < 0:
            raise DomainError("temperature must be >= 0")
        if not isinstance(self.sd, OhmicFamily):
            raise DomainError("the spin-boson model uses an Ohmic-family spectral density")
        if self.sd.alpha * self.sd.omega_c / self.omega0 > 0.5:
            warnings.warn("alpha*omega_c/omega0 > 0.5: outside the weak-coupling regime "
                          "where the second-order RWA master equation applies",
                          WeakCouplingWarning, stacklevel=3)


@dataclass(frozen=True)
class SbmRates:
    t: float
    gamma_plus: float
    gamma_minus: float

    @property
    def gamma_s(self):
        return self.gamma_plus + self.gamma_minus

    @property
    def gamma_d(self):
        return self.gamma_plus - self.gamma_minus


def _sin_ratio(x, t):
    # sin(x t)/x, equal to t at x = 0
    return t * np.sinc(x * t / np.pi)


def sbm_rates(p, t, *, rtol=1e-10):
    """gamma_+(t), gamma_-(t) by adaptive quadrature over frequency."""
    t = float(t)
    if t < 0:
        raise DomainError("time must be >= 0")
    if t == 0:
        return SbmRates(0.0, 0.0, 0.0)
    sd, w0, T = p.sd, p.omega0, p.T

    def integrand(sign):
        def f(w):
            n = bose_occupation(T, w) if T > 0 else 0.0
            return 0.5 * sd.j(w) * ((1 + n) * _sin_ratio(w + sign * w0, t)
                                    + n * _sin_ratio(w - sign * w0, t))
        return f

    W = sd.cutoff
    width = min(W / 64, np.pi / (4 * t))
    kw = dict(rtol=rtol, atol=1e-300, panel_width=width, relative_to="abs")
    g_plus, _ = adaptive_gk(integrand(+1), 0.0, W, **kw)
    g_minus, _ = adaptive_gk(integrand(-1), 0.0, W, **kw)
    return SbmRates(t, g_plus, g_minus)


def sbm_rates_kernel(p, t, *, rtol=1e-12):
    """Rates from gamma_s = 1/2 int_0^t cos(w0 s) D1(s) ds and
    gamma_d = -1/2 int_0^t sin(w0 s) D(s) ds with closed-form kernels."""
    t = float(t)
    if t < 0:
        raise DomainError("time must be >= 0")
    w0 = p.omega0
    width = min(t, 0.1 / p.sd.omega_c + 0.05) if t > 0 else None
    kw = dict(rtol=rtol, atol=1e-300, panel_width=width, relative_to="abs")
    gs, _ = adaptive_gk(lambda u: 0.5 * np.cos(w0 * u) * ohmic_kernels(p.sd, p.T, u)[0],
                        0.0, t, **kw)
    gd, _ = adaptive_gk(lambda u: -0.5 * np.sin(w0 * u) * ohmic_kernels(p.sd, p.T, u)[1],
                        0.0, t, **kw)
    return SbmRates(t, 0.5 * (gs + gd), 0.5 * (gs - gd))


@dataclass(frozen=True)
class SbmIntegrals:
    """Rates and their cumulative integrals on a uniform grid."""

    t: np.ndarray
    gamma_s: np.ndarray
    gamma_d: np.ndarray
    dgamma_s: np.ndarray
    dgamma_d: np.ndarray
    Gamma: np.ndarray
    delta: np.ndarray
    omega0: float

    @property
    def Lambda(self):
        return 0.5 * self.Gamma

    @property
    def delta_dot(self):
        return np.exp(self.Gamma) * self.gamma_d

    @property
    def Gamma_dot(self):
        return self.gamma_s


def uniform_grid(t_max, dt):
    n = int(round(t_max / dt))
    if n < 2 or abs(n * dt - t_max) > 1e-9 * t_max:
        raise DomainError(f"t_max={t_max} is not a multiple of dt={dt}")
    return dt * np.arange(n + 1)


def sbm_integrals(p, grid):
    """Assemble gamma_s, gamma_d, Gamma and delta along a uniform grid from 0.

    Rates come from 4-point Gauss-Legendre integration of the kernel
    integrands over each grid cell; Gamma and delta use the end-point
    corrected trapezoid rule with analytic derivatives of the integrands.
    """
    t = np.asarray(grid, dtype=float)
    if t.ndim != 1 or t.size < 3 or t[0] != 0:
        raise DomainError("grid must be 1-D, start at 0 and have at least 3 points")
    h = np.diff(t)
    if np.any(h <= 0) or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise DomainError("grid must be uniform")
    sd, T, w0 = p.sd, p.T, p.omega0

    gamma_s = gauss_legendre_cumulative(
        lambda u: 0.5 * np.cos(w0 * u) * ohmic_kernels(sd, T, u)[0], t)
    gamma_d = gauss_legendre_cumulative(
        lambda u: -0.5 * np.sin(w0 * u) * ohmic_kernels(sd, T, u)[1], t)
    D1, D = ohmic_kernels(sd, T, t)
    dgs = 0.5 * np.cos(w0 * t) * D1
    dgd = -0.5 * np.sin(w0 * t) * D

    Gamma = hermite_cumulative(gamma_s, dgs, t)
    if np.max(np.abs(Gamma)) > _MAX_GAMMA:
        raise HorizonError(f"|Gamma| exceeds {_MAX_GAMMA} before t={t[-1]}; shorten the horizon")
    eG = np.exp(Gamma)
    f = eG * gamma_d
    df = eG * (gamma_s * gamma_d + dgd)
    delta = hermite_cumulative(f, df, t)
    return SbmIntegrals(t, gamma_s, gamma_d, dgs, dgd, Gamma, delta, w0)


def sbm_bloch(ints, eta):
    """Bloch vectors on the grid of ``ints`` for initial angle ``eta``."""
    decay = np.exp(-ints.Lambda)
    w0t = ints.omega0 * ints.t
    return np.stack([decay * np.sin(eta) * np.cos(w0t),
                     decay * np.sin(eta) * np.sin(w0t),
                     np.exp(-ints.Gamma) * (np.cos(eta) + ints.delta)], axis=-1)


def _drive(ints):
    # delta_dot - Gamma_dot (1 + delta): shared factor of both flows
    return ints.delta_dot - ints.Gamma_dot * (1 + ints.delta)


def sbm_qfi_flow(ints):
    """QFI flow for the spin-up initial state (cos eta = 1)."""
    return 2 * np.exp(-2 * ints.Gamma) * (1 + ints.delta) * _drive(ints)


def sbm_energy_current(ints):
    """Energy current d<H_s>/dt for the spin-up initial state."""
    return 0.5 * ints.omega0 * np.exp(-ints.Gamma) * _drive(ints)


def sbm_trajectory(ints):
    B = sbm_bloch(ints, 0.0)
    return Trajectory(
        t=ints.t,
        B=B,
        F_M=B[:, 2] ** 2,
        I_Q=sbm_qfi_flow(ints),
        I_E=sbm_energy_current(ints),
        rates={"gamma_plus": 0.5 * (ints.gamma_s + ints.gamma_d),
               "gamma_minus": 0.5 * (ints.gamma_s - ints.gamma_d),
               "Gamma": ints.Gamma,
               "delta": ints.delta},
        provenance="sbm-analytic",
        omega0=ints.omega0,
    )


def sbm_generator(ints):
    """Schroedinger-picture generator with rates interpolated from ``ints``.

    Cubic Hermite interpolation uses the exact rate derivatives, so the
    interpolation error is far below the integrator tolerance.
    """
    gs = CubicHermiteSpline(ints.t, ints.gamma_s, ints.dgamma_s)
    gd = CubicHermiteSpline(ints.t, ints.gamma_d, ints.dgamma_d)
    return TimeLocalGenerator(
        field=(0.0, 0.0, ints.omega0),
        dissipators=[(lambda t: 0.5 * float(gs(t) + gd(t)), SIGMA_PLUS),
                     (lambda t: 0.5 * float(gs(t) - gd(t)), SIGMA_MINUS)],
    )
