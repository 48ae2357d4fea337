"""Vectorised adaptive Gauss-Kronrod quadrature on finite intervals.

All panels of one refinement level are evaluated in a single call of the
integrand, so ``f`` must accept and return numpy arrays of any shape.
"""

import numpy as np

from .errors import QuadratureError

_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# 15 Kronrod nodes on [-1, 1]; the Gauss 7-point rule uses the odd-indexed ones.
NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[1:7:2] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[9:14:2] = _WG[2::-1]


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * NODES[None, :]
    y = np.asarray(f(x), dtype=float)
    kron = half * (y @ KRONROD_WEIGHTS)
    gauss = half * (y @ GAUSS_WEIGHTS)
    return kron, np.abs(kron - gauss), np.abs(half) * (np.abs(y) @ KRONROD_WEIGHTS)


def adaptive_gk(f, a, b, *, rtol=1e-9, atol=0.0, panel_width=None,
                relative_to="value", max_panels=500_000, max_levels=200):
    """Integrate ``f`` over ``[a, b]`` with globally adaptive GK15 panels.

    Parameters
    ----------
    f : callable
        Vectorised integrand.
    a, b : float
        Finite limits.
    rtol, atol : float
        Target for the summed error estimate,
        ``err <= max(atol, rtol * scale)``.
    panel_width : float, optional
        Upper bound on the width of the initial panels. Oscillatory
        integrands should pass a fraction of their period here.
    relative_to : {"value", "abs"}
        ``scale`` is ``|value|`` or the integral of ``|f|``; use "abs" when
        the result may be a near-total cancellation.

    Returns
    -------
    value, error : float
        Integral estimate and summed |K15 - G7| error estimate.

    Raises
    ------
    QuadratureError
        If the target is not met within ``max_levels`` refinements or the
        panel budget is exhausted.
    """
    a = float(a)
    b = float(b)
    if a == b:
        return 0.0, 0.0
    sign = 1.0
    if b < a:
        a, b, sign = b, a, -1.0
    n0 = 1 if panel_width is None else max(1, int(np.ceil((b - a) / panel_width)))
    edges = np.linspace(a, b, n0 + 1)
    lo, hi = edges[:-1], edges[1:]

    done_value = 0.0
    done_error = 0.0
    done_abs = 0.0
    for _ in range(max_levels):
        val, err, mag = _gk15(f, lo, hi)
        total = done_value + val.sum()
        total_err = done_error + err.sum()
        scale = done_abs + mag.sum() if relative_to == "abs" else abs(total)
        tol = max(atol, rtol * scale)
        if not np.isfinite(total):
            raise QuadratureError("integrand produced non-finite values", total, total_err)
        if total_err <= tol:
            return sign * total, total_err
        # Split the largest contributors until the untouched remainder is
        # below half of the tolerance.
        order = np.argsort(err)[::-1]
        remainder = done_error + np.cumsum(err[order][::-1])[::-1]
        # remainder[k] = done_error + error of panels order[k:]
        k = int(np.searchsorted(-remainder, -0.5 * tol, side="left"))
        k = max(k, 1)
        split = order[:k]
        keep = order[k:]
        done_value += val[keep].sum()
        done_error += err[keep].sum()
        done_abs += mag[keep].sum()
        mid = 0.5 * (lo[split] + hi[split])
        lo = np.concatenate([lo[split], mid])
        hi = np.concatenate([mid, hi[split]])
        if lo.size > max_panels:
            break
        if np.any(hi - lo <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(lo))):
            break
    raise QuadratureError("adaptive quadrature did not converge", sign * total, total_err)


def gauss_legendre_cumulative(f, t, order=4):
    """Cumulative integral of ``f`` on the nodes of ``t``.

    Each interval ``[t[i], t[i+1]]`` is integrated with an ``order``-point
    Gauss-Legendre rule; returns an array of the same length as ``t``
    starting at 0.
    """
    t = np.asarray(t, dtype=float)
    x, w = np.polynomial.legendre.leggauss(order)
    h = np.diff(t)
    nodes = t[:-1, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)
    inc = 0.5 * h * (np.asarray(f(nodes)) @ w)
    return np.concatenate([[0.0], np.cumsum(inc)])


def hermite_cumulative(y, dy, t):
    """Cumulative integral from samples and exact derivatives.

    Uses the endpoint-corrected trapezoid rule, exact for cubics on each
    interval.
    """
    h = np.diff(t)
    inc = 0.5 * h * (y[1:] + y[:-1]) + h * h / 12.0 * (dy[:-1] - dy[1:])
    return np.concatenate([[0.0], np.cumsum(inc)])
