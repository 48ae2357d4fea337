"""Generic time-local two-level master equation integrated in Bloch form.

A generator

    K(t) rho = -i [H(t), rho] + sum_i gamma_i(t) (A_i rho A_i^+ - 1/2 {A_i^+ A_i, rho})

with H(t) = h(t).sigma / 2 maps rho = (I + B.sigma)/2 onto dB/dt = M(t) B + b(t).
Matrices are written in the (|e>, |g>) basis, so sigma_z |e> = |e>.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import solve_ivp

from .analysis import Trajectory
from .errors import DomainError, IntegrationError, NumericalError
from .qfi import qfi_flow_numeric

IDENTITY = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)   # |e><g|
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)  # |g><e|
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

# tolerated excursion of |B| beyond 1 before integration is declared failed
BALL_MARGIN = 1e-6


def _dissipator(A, X):
    AdA = A.conj().T @ A
    return A @ X @ A.conj().T - 0.5 * (AdA @ X + X @ AdA)


def dissipator_bloch(A):
    """Bloch-form (M, b) of the unit-rate dissipator D[A]."""
    A = np.asarray(A, dtype=complex)
    if A.shape != (2, 2):
        raise DomainError("Lindblad operators must be 2x2")
    b = np.array([0.5 * np.trace(s @ _dissipator(A, IDENTITY)).real for s in PAULI])
    M = np.array([[0.5 * np.trace(sk @ _dissipator(A, sj)).real for sj in PAULI] for sk in PAULI])
    return M, b


def field_matrix(h):
    """Matrix of B -> h x B."""
    h1, h2, h3 = h
    return np.array([[0.0, -h3, h2], [h3, 0.0, -h1], [-h2, h1, 0.0]])


@dataclass
class TimeLocalGenerator:
    """Effective field ``h(t)`` plus ``(rate(t), A)`` dissipators.

    ``field`` may be a constant 3-vector or a callable of t; each Lindblad
    operator may be a constant 2x2 matrix or a callable of t.
    """

    field: object = (0.0, 0.0, 0.0)
    dissipators: list = dc_field(default_factory=list)

    def __post_init__(self):
        self._static = [None if callable(A) else dissipator_bloch(A) for _, A in self.dissipators]

    def field_at(self, t):
        h = self.field(t) if callable(self.field) else self.field
        return np.asarray(h, dtype=float)

    def coefficients(self, t):
        """Return ``(M, b)`` at time ``t``."""
        M = field_matrix(self.field_at(t))
        b = np.zeros(3)
        for (rate, A), static in zip(self.dissipators, self._static):
            Md, bd = static if static is not None else dissipator_bloch(A(t))
            g = rate(t)
            M = M + g * Md
            b = b + g * bd
        return M, b


def bloch_rhs(gen, t, B):
    M, b = gen.coefficients(t)
    return M @ np.asarray(B, dtype=float) + b


@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "RK45"
    rtol: float = 1e-10
    atol: float = 1e-12
    max_step: float = np.inf

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0 and self.max_step > 0):
            raise DomainError("integrator tolerances and max_step must be positive")


def integrate(gen, B0, grid, cfg=None, *, energy_field=None, provenance="ode-oracle"):
    """Integrate the Bloch equation on ``grid`` with an adaptive embedded RK pair.

    The energy current is ``0.5 * energy_field . dB/dt`` evaluated from the
    right-hand side; by default the generator's own field is used, i.e. the
    system Hamiltonian in the Schroedinger picture.
    """
    cfg = cfg or IntegratorConfig()
    B0 = np.asarray(B0, dtype=float)
    grid = np.asarray(grid, dtype=float)
    if B0.shape != (3,) or np.linalg.norm(B0) > 1 + 1e-12:
        raise DomainError("initial Bloch vector must be a 3-vector with |B| <= 1")
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly increasing with at least two points")

    last_t = [grid[0]]

    def rhs(t, y):
        last_t[0] = t
        dy = bloch_rhs(gen, t, y)
        if not np.all(np.isfinite(dy)):
            raise NumericalError(f"non-finite generator output at t={t!r}")
        return dy

    # a trajectory leaving the Bloch ball means the solver stepped across a
    # rate singularity
    def outside(t, y):
        return np.dot(y, y) - (1.0 + BALL_MARGIN) ** 2
    outside.terminal = True
    outside.direction = 1

    try:
        sol = solve_ivp(rhs, (grid[0], grid[-1]), B0, method=cfg.method, t_eval=grid,
                        rtol=cfg.rtol, atol=cfg.atol, max_step=cfg.max_step, events=outside)
    except NumericalError as exc:
        raise IntegrationError(f"generator evaluation failed: {exc}", last_t[0]) from exc
    if sol.status == 1:
        raise IntegrationError("state left the Bloch ball, likely across a rate singularity",
                               float(sol.t_events[0][0]))
    if sol.status != 0:
        raise IntegrationError(f"integration failed: {sol.message}", float(sol.t[-1]) if sol.t.size else last_t[0])

    B = sol.y.T
    dB = np.array([bloch_rhs(gen, t, b) for t, b in zip(grid, B)])
    if energy_field is None:
        h = np.array([gen.field_at(t) for t in grid])
    else:
        h = np.broadcast_to(np.asarray(energy_field, dtype=float), B.shape)
    F = np.sum(B**2, axis=1)
    uniform = np.allclose(np.diff(grid), grid[1] - grid[0], rtol=1e-9, atol=0)
    I_Q = qfi_flow_numeric(F, grid) if uniform and grid.size >= 3 else 2 * np.sum(B * dB, axis=1)
    return Trajectory(
        t=grid,
        B=B,
        F_M=F,
        I_Q=I_Q,
        I_E=0.5 * np.sum(h * dB, axis=1),
        rates={},
        provenance=provenance,
        omega0=float(np.linalg.norm(h[0])),
    )
