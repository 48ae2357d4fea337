"""Bath spectral densities, thermal occupation and the noise/dissipation kernels.

Units: hbar = k_B = 1. The kernels are

    D1(tau) = 2 int_0^inf J(w) coth(w / 2T) cos(w tau) dw     (noise)
    D(tau)  = 2 int_0^inf J(w) sin(w tau) dw                  (dissipation)

evaluated either by adaptive quadrature (any Ohmic-family density) or in
closed form through a Bose series summed with the Hurwitz zeta function.
"""

from dataclasses import dataclass
from math import factorial

import numpy as np
from scipy.special import bernoulli, gamma as gamma_fn

from .errors import DomainError
from .quadrature import adaptive_gk


@dataclass(frozen=True)
class Lorentzian:
    """Lorentzian density centred at ``omega0``: width ``lam``, strength ``gamma0``."""

    gamma0: float
    lam: float
    omega0: float = 1.0

    def __post_init__(self):
        for name in ("gamma0", "lam", "omega0"):
            if not getattr(self, name) > 0:
                raise DomainError(f"Lorentzian.{name} must be > 0, got {getattr(self, name)!r}")

    def j(self, omega):
        omega = np.asarray(omega, dtype=float)
        return self.gamma0 * self.lam**2 / (2 * np.pi * ((self.omega0 - omega) ** 2 + self.lam**2))


@dataclass(frozen=True)
class OhmicFamily:
    """J(w) = pi alpha w^s wc^(1-s) exp(-w/wc), w >= 0."""

    alpha: float
    s: float
    omega_c: float

    def __post_init__(self):
        for name in ("alpha", "s", "omega_c"):
            if not getattr(self, name) > 0:
                raise DomainError(f"OhmicFamily.{name} must be > 0, got {getattr(self, name)!r}")

    def j(self, omega):
        omega = np.asarray(omega, dtype=float)
        if np.any(omega < 0):
            raise DomainError("OhmicFamily spectral density is defined for omega >= 0 only")
        return (np.pi * self.alpha * self.omega_c ** (1 - self.s)
                * omega**self.s * np.exp(-omega / self.omega_c))

    @property
    def cutoff(self):
        """Upper quadrature limit where the exponential tail is negligible."""
        return self.omega_c * max(50.0, 10.0 * self.s)


SpectralDensity = Lorentzian | OhmicFamily


def eval_j(sd, omega):
    """Spectral weight J(omega) of either density family."""
    out = sd.j(omega)
    return float(out) if np.ndim(out) == 0 else out


def bose_occupation(T, omega):
    """Bose-Einstein occupation 1/(exp(omega/T) - 1); exactly 0 at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("bose_occupation requires omega > 0")
    if T < 0:
        raise DomainError("temperature must be >= 0")
    if T == 0:
        out = np.zeros_like(omega)
    else:
        x = omega / T
        # exp(-x)/(1-exp(-x)) avoids overflow for large x
        out = np.exp(-x) / -np.expm1(-x)
    return float(out) if out.ndim == 0 else out


def coth_half(omega, T):
    """coth(omega / 2T) for omega > 0; 1 at T = 0."""
    omega = np.asarray(omega, dtype=float)
    if T == 0:
        return np.ones_like(omega)
    x = omega / (2.0 * T)
    small = omega < 1e-6 * T
    with np.errstate(divide="ignore"):
        out = np.where(small, 1.0 / x + x / 3.0, 1.0 / np.tanh(np.where(small, 1.0, x)))
    return out


@dataclass(frozen=True)
class BathKernels:
    """Noise and dissipation kernels of a bath at temperature ``T``."""

    sd: OhmicFamily
    T: float
    rtol: float = 1e-9

    def __post_init__(self):
        if self.T < 0:
            raise DomainError(f"temperature must be >= 0, got {self.T!r}")
        if not isinstance(self.sd, OhmicFamily):
            raise DomainError("bath kernels are implemented for the Ohmic family only; "
                              "the Lorentzian tail is too heavy for a truncated transform")


def _oscillatory_quad(f, W, tau, rtol):
    width = W / 64 if tau == 0 else min(W / 64, np.pi / (4 * abs(tau)))
    return adaptive_gk(f, 0.0, W, rtol=rtol, atol=1e-300, panel_width=width, relative_to="abs")


def kernel_d1(bk, tau, *, return_error=False):
    """Noise kernel D1(tau) by adaptive quadrature.

    The tolerance is relative to the integral of |integrand|, which stays
    meaningful when the transform itself nearly cancels at large tau.
    """
    tau = float(tau)
    sd, T = bk.sd, bk.T

    def integrand(w):
        return 2.0 * sd.j(w) * coth_half(w, T) * np.cos(w * tau)

    value, err = _oscillatory_quad(integrand, sd.cutoff, tau, bk.rtol)
    return (value, err) if return_error else value


def kernel_d(bk, tau, *, return_error=False):
    """Dissipation kernel D(tau) by adaptive quadrature (temperature independent)."""
    tau = float(tau)
    sd = bk.sd
    if tau == 0:
        return (0.0, 0.0) if return_error else 0.0

    def integrand(w):
        return 2.0 * sd.j(w) * np.sin(w * tau)

    value, err = _oscillatory_quad(integrand, sd.cutoff, tau, bk.rtol)
    return (value, err) if return_error else value


_EM_TERMS = 10
_BERNOULLI = bernoulli(2 * _EM_TERMS)
_EM_COEFF = [_BERNOULLI[2 * j] / factorial(2 * j) for j in range(1, _EM_TERMS + 1)]


def hurwitz_zeta(nu, q, shift=12):
    """Hurwitz zeta sum_{k>=0} (q + k)^(-nu) for real nu > 1 and complex q, Re q > 0.

    Vectorised over ``q``. The first ``shift`` terms are summed directly and
    the tail by Euler-Maclaurin.
    """
    if not nu > 1:
        raise DomainError("hurwitz_zeta requires nu > 1")
    q = np.asarray(q, dtype=complex)
    if np.any(q.real <= 0):
        raise DomainError("hurwitz_zeta requires Re(q) > 0")
    total = np.zeros_like(q)
    for k in range(shift):
        total += (q + k) ** (-nu)
    z = q + shift
    total += z ** (1 - nu) / (nu - 1) + 0.5 * z ** (-nu)
    poch = nu
    zp = z ** (-nu - 1)
    z2 = z * z
    for j, c in enumerate(_EM_COEFF, start=1):
        total += c * poch * zp
        poch *= (nu + 2 * j - 1) * (nu + 2 * j)
        zp = zp / z2
    return total


def ohmic_kernels(sd, T, tau):
    """Closed-form (D1, D) for the Ohmic family, vectorised over ``tau``.

    Uses coth(w/2T) = 1 + 2 sum_k exp(-k w / T) and
    int_0^inf w^s exp(-p w) exp(i w tau) dw = Gamma(s+1) / (p - i tau)^(s+1).
    """
    if not isinstance(sd, OhmicFamily):
        raise DomainError("closed-form kernels exist for the Ohmic family only")
    if T < 0:
        raise DomainError("temperature must be >= 0")
    tau = np.asarray(tau, dtype=float)
    nu = sd.s + 1.0
    pref = 2.0 * np.pi * sd.alpha * sd.omega_c ** (1 - sd.s) * gamma_fn(nu)
    b = 1.0 / sd.omega_c - 1j * tau
    zero_t = b ** (-nu)
    if T > 0:
        thermal = 2.0 * T**nu * hurwitz_zeta(nu, 1.0 + T * b)
    else:
        thermal = 0.0
    return pref * (zero_t + thermal).real, pref * zero_t.imag
