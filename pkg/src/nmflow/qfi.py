"""SLD quantum Fisher information of a qubit under a phase imprint exp(i theta n.sigma/2).

For rho = (I + B.sigma)/2 the information is |n x B|^2, maximised by any
direction orthogonal to B.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError


def _unit(n, tol=1e-12):
    n = np.asarray(n, dtype=float)
    if abs(np.linalg.norm(n) - 1.0) > tol:
        raise DomainError(f"direction must be a unit vector, |n| = {np.linalg.norm(n)!r}")
    return n


def qfi_for_direction(B, n):
    """|n x B|^2. ``B`` may be a single vector or an (N, 3) array."""
    c = np.cross(_unit(n), np.asarray(B, dtype=float))
    return np.sum(c * c, axis=-1)


def max_qfi(B):
    """|B|^2, the Fisher information at an optimal direction."""
    B = np.asarray(B, dtype=float)
    return np.sum(B * B, axis=-1)


@dataclass(frozen=True)
class BlochDecomposition:
    B: np.ndarray
    xi: float
    psi: float
    p1: float
    p2: float

    @property
    def eigenvectors(self):
        """|1>, |2> as columns in the (|e>, |g>) basis."""
        c, s = np.cos(self.psi / 2), np.sin(self.psi / 2)
        em, ep = np.exp(-0.5j * self.xi), np.exp(0.5j * self.xi)
        return np.array([[c * em, -s * em], [s * ep, c * ep]])

    @property
    def rho(self):
        b1, b2, b3 = self.B
        return 0.5 * np.array([[1 + b3, b1 - 1j * b2], [b1 + 1j * b2, 1 - b3]])


def decompose(B):
    """Angles and eigenvalues of rho; xi = 0 on the z axis by convention."""
    B = np.asarray(B, dtype=float)
    b1, b2, b3 = B
    rho_t = np.hypot(b1, b2)
    xi = 0.0 if rho_t == 0 else float(np.arctan2(b2, b1))
    psi = float(np.arctan2(rho_t, b3))
    r = float(np.linalg.norm(B))
    return BlochDecomposition(B, xi, psi, 0.5 * (1 + r), 0.5 * (1 - r))


def build_c_matrix(B):
    """Explicit-form matrix whose top eigenvectors are the optimal directions.

    Equal to ((p1 - p2)^2 / 2) (I - m m^T) for the unit Bloch direction m.
    """
    dec = decompose(B)
    gap = dec.p1 - dec.p2
    if gap == 0:
        raise DomainError("maximally mixed state: every direction is optimal (C = 0)")
    cx, sx = np.cos(dec.xi), np.sin(dec.xi)
    cp, sp = np.cos(dec.psi), np.sin(dec.psi)
    s2x, s2p = np.sin(2 * dec.xi), np.sin(2 * dec.psi)
    C = np.array([
        [2 * (cx**2 * cp**2 + sx**2), -s2x * sp**2, -cx * s2p],
        [-s2x * sp**2, 2 * (cx**2 + sx**2 * cp**2), -s2p * sx],
        [-cx * s2p, -s2p * sx, 2 * sp**2],
    ])
    return gap**2 / 4 * C


def c_matrix_from_eigensystem(B):
    """C_kl = sum_{i != j} (p_i - p_j)^2 / (p_i + p_j) 2 Re(<i|J_k|j><j|J_l|i>), J = sigma/2.

    Computed from a numerical diagonalisation; n^T C n equals |n x B|^2.
    """
    from .dynamics import PAULI

    B = np.asarray(B, dtype=float)
    rho = 0.5 * (np.eye(2) + sum(b * s for b, s in zip(B, PAULI)))
    p, vecs = np.linalg.eigh(rho)
    J = [0.5 * s for s in PAULI]
    C = np.zeros((3, 3))
    for i in range(2):
        for j in range(2):
            if i == j or p[i] + p[j] == 0:
                continue
            w = (p[i] - p[j]) ** 2 / (p[i] + p[j])
            elems = [vecs[:, i].conj() @ Jk @ vecs[:, j] for Jk in J]
            C += w * 2 * np.real(np.outer(elems, np.conj(elems)))
    return C


def optimal_directions(B):
    """The two orthonormal directions (-sin xi, cos xi, 0) and
    (cos psi cos xi, cos psi sin xi, -sin psi).

    Returns ``(n1, n2, degenerate)``; for B = 0 every direction is optimal and
    the canonical pair (y, x) is returned with ``degenerate=True``.
    """
    B = np.asarray(B, dtype=float)
    if not np.any(B):
        return np.array([0.0, 1.0, 0.0]), np.array([1.0, 0.0, 0.0]), True
    dec = decompose(B)
    n1 = np.array([-np.sin(dec.xi), np.cos(dec.xi), 0.0])
    n2 = np.array([np.cos(dec.psi) * np.cos(dec.xi), np.cos(dec.psi) * np.sin(dec.xi), -np.sin(dec.psi)])
    return n1, n2, False


def qfi_flow_numeric(F, t):
    """dF/dt by central differences, second-order one-sided at the ends."""
    F = np.asarray(F, dtype=float)
    t = np.asarray(t, dtype=float)
    if F.shape != t.shape or t.size < 3:
        raise DomainError("need at least 3 samples of matching shape")
    dt = np.diff(t)
    if np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
        raise DomainError("qfi_flow_numeric requires a uniform increasing grid")
    return np.gradient(F, dt[0], edge_order=2)
