"""Backflow interval detection, relation residuals and regime classification."""

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

MARKOVIAN = "markovian"
NM_WITH_ENERGY_BACKFLOW = "nm_with_energy_backflow"
NM_WITHOUT_ENERGY_BACKFLOW = "nm_without_energy_backflow"


@dataclass
class Trajectory:
    """Sampled solution: Bloch vectors, maximum QFI, QFI flow and energy current."""

    t: np.ndarray
    B: np.ndarray
    F_M: np.ndarray
    I_Q: np.ndarray
    I_E: np.ndarray
    rates: dict = field(default_factory=dict)
    provenance: str = "unknown"
    omega0: float = 1.0

    def __post_init__(self):
        n = len(self.t)
        if self.B.shape != (n, 3):
            raise DomainError("B must have shape (len(t), 3)")
        for name in ("F_M", "I_Q", "I_E"):
            if len(getattr(self, name)) != n:
                raise DomainError(f"{name} length differs from the time grid")
        for name, v in self.rates.items():
            if len(v) != n:
                raise DomainError(f"rate column {name!r} length differs from the time grid")
        if n > 1 and np.any(np.diff(self.t) <= 0):
            raise DomainError("time grid must be strictly increasing")

    @property
    def sigma_z(self):
        return self.B[:, 2]

    def __len__(self):
        return len(self.t)

    def subsample(self, step):
        sl = slice(None, None, step)
        return Trajectory(self.t[sl], self.B[sl], self.F_M[sl], self.I_Q[sl], self.I_E[sl],
                          {k: v[sl] for k, v in self.rates.items()}, self.provenance, self.omega0)

    def columns(self):
        cols = {"t": self.t, "B1": self.B[:, 0], "B2": self.B[:, 1], "B3": self.B[:, 2],
                "F_M": self.F_M, "I_Q": self.I_Q, "I_E": self.I_E}
        cols.update(self.rates)
        return cols


def _crossing(t0, t1, y0, y1):
    return t0 + (t1 - t0) * y0 / (y0 - y1)


def positive_intervals(t, y, threshold=0.0):
    """Maximal intervals where ``y > 0``, with linearly interpolated end points.

    An interval is kept only if ``y`` exceeds ``threshold`` somewhere inside it.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    pos = y > 0
    out = []
    i, n = 0, len(t)
    while i < n:
        if not pos[i]:
            i += 1
            continue
        j = i
        while j + 1 < n and pos[j + 1]:
            j += 1
        start = t[0] if i == 0 else _crossing(t[i - 1], t[i], y[i - 1], y[i])
        end = t[-1] if j == n - 1 else _crossing(t[j], t[j + 1], y[j], y[j + 1])
        if y[i:j + 1].max() > threshold:
            out.append((float(start), float(end)))
        i = j + 1
    return out


def merge_intervals(intervals, gap):
    """Merge intervals separated by less than ``gap``; idempotent."""
    merged = []
    for a, b in sorted(intervals):
        if merged and a - merged[-1][1] < gap:
            merged[-1] = (merged[-1][0], max(merged[-1][1], b))
        else:
            merged.append((a, b))
    return merged


def first_sign_change(t, y):
    """Interpolated time at which ``y`` first changes sign, or None."""
    s = np.sign(y)
    idx = np.flatnonzero(s[:-1] * s[1:] < 0)
    if idx.size == 0:
        return None
    i = idx[0]
    return float(_crossing(t[i], t[i + 1], y[i], y[i + 1]))


def classify(qfi_intervals, energy_intervals):
    if not qfi_intervals:
        return MARKOVIAN
    return NM_WITH_ENERGY_BACKFLOW if energy_intervals else NM_WITHOUT_ENERGY_BACKFLOW


@dataclass
class IntervalReport:
    qfi_backflow_intervals: list
    energy_backflow_intervals: list
    classification: str
    relation_residual_max: float = float("nan")
    t_span: tuple = (0.0, 0.0)
    grid_step: float = 0.0
    sigma_z_sign_change: float | None = None

    def restricted(self, t_end):
        """Report limited to [t_start, t_end], e.g. the phase where <sigma_z> > 0."""
        def clip(ivs):
            return [(a, min(b, t_end)) for a, b in ivs if a < t_end]
        q, e = clip(self.qfi_backflow_intervals), clip(self.energy_backflow_intervals)
        return IntervalReport(q, e, classify(q, e), self.relation_residual_max,
                              (self.t_span[0], min(self.t_span[1], t_end)), self.grid_step,
                              self.sigma_z_sign_change)

    def as_dict(self):
        return {
            "classification": self.classification,
            "qfi_backflow_intervals": [list(iv) for iv in self.qfi_backflow_intervals],
            "energy_backflow_intervals": [list(iv) for iv in self.energy_backflow_intervals],
            "relation_residual_max": self.relation_residual_max,
            "t_span": list(self.t_span),
            "sigma_z_sign_change": self.sigma_z_sign_change,
        }


def _normalised(y):
    scale = np.max(np.abs(y))
    return y / scale if scale > 0 else y


def detect_intervals(traj, threshold=1e-10):
    """Positive-flow intervals of I_Q and I_E and the resulting classification.

    ``threshold`` applies to each flow divided by its maximum magnitude, so
    flows that differ by a constant factor give identical intervals.
    """
    if threshold < 0:
        raise DomainError("threshold must be >= 0")
    if len(traj) < 3:
        raise DomainError("trajectory needs at least 3 samples")
    dt = float(np.min(np.diff(traj.t)))
    q = merge_intervals(positive_intervals(traj.t, _normalised(traj.I_Q), threshold), dt)
    e = merge_intervals(positive_intervals(traj.t, _normalised(traj.I_E), threshold), dt)
    return IntervalReport(q, e, classify(q, e), t_span=(float(traj.t[0]), float(traj.t[-1])),
                          grid_step=dt, sigma_z_sign_change=first_sign_change(traj.t, traj.sigma_z))


@dataclass
class RelationReport:
    model: str
    residual: float
    n_used: int
    n_excluded: int


def verify_relation(traj, model, *, b3_floor=1e-9):
    """Normalised maximum deviation from I_E = (omega0/2) I_Q (jc)
    or I_E = omega0 I_Q / (4 B3) (sbm)."""
    w0 = traj.omega0
    if model == "jc":
        dev = np.abs(traj.I_E - 0.5 * w0 * traj.I_Q)
        used = np.ones(len(traj), dtype=bool)
    elif model == "sbm":
        b3 = traj.sigma_z
        used = np.abs(b3) > b3_floor
        dev = np.zeros(len(traj))
        dev[used] = np.abs(traj.I_E[used] - w0 * traj.I_Q[used] / (4 * b3[used]))
    else:
        raise DomainError(f"unknown model {model!r}")
    scale = np.max(np.abs(traj.I_E))
    if not used.any():
        return RelationReport(model, float("nan"), 0, int((~used).sum()))
    resid = float(np.max(dev[used]) / scale) if scale > 0 else float(np.max(dev[used]))
    return RelationReport(model, resid, int(used.sum()), int((~used).sum()))


def _measure(ivs):
    return sum(b - a for a, b in ivs)


def _intersection(xs, ys):
    out = []
    for a, b in xs:
        for c, d in ys:
            lo, hi = max(a, c), min(b, d)
            if hi > lo:
                out.append((lo, hi))
    return out


def overlap_correlation(report):
    """Fraction of the positive-I_Q measure that is also positive-I_E.

    Energy end points within one grid step of a QFI end point are snapped to
    it, so crossings that fall in the same grid cell count as simultaneous.
    Returns None when there is no QFI backflow.
    """
    q = report.qfi_backflow_intervals
    if not q:
        return None
    ends = np.array([x for iv in q for x in iv])
    tol = report.grid_step

    def snap(x):
        k = np.argmin(np.abs(ends - x))
        return float(ends[k]) if abs(ends[k] - x) <= tol else x

    e = [(snap(a), snap(b)) for a, b in report.energy_backflow_intervals]
    total = _measure(q)
    if total == 0:
        return None
    return _measure(_intersection(q, e)) / total
