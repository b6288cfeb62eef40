"""Power-law decay exponents from time series by log-log least squares."""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats

FLOOR = 1e-14
MIN_SAMPLES = 10


@dataclass(frozen=True)
class DecayFit:
    """Slope of log q against log(1+t).

    ``status`` is ``"ok"``, ``"super-polynomial"`` (the log-log curve bends
    down markedly over the window, as for exponential decay), or
    ``"below floor"`` (no fit: the quantity reached FLOOR before MIN_SAMPLES
    points were collected). When the floor is reached later, the window ends
    there and ``t_max`` shows where.
    """

    exponent: float
    stderr: float
    n_samples: int
    t_min: float
    t_max: float
    status: str = "ok"
    curvature: float = 0.0

    def to_dict(self):
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in asdict(self).items()}


def norm_pair(gamma):
    """Selector for ||u||_{H^gamma} + ||b||_{H^gamma} in a column table."""
    key = f"{float(gamma):g}"

    def select(cols):
        return np.asarray(cols[f"h_gamma_{key}_u"]) + np.asarray(cols[f"h_gamma_{key}_b"])

    select.__name__ = f"norm_pair_{key}"
    return select


def _columns(series):
    if isinstance(series, dict):
        return {k: np.asarray(v) for k, v in series.items()}
    rows = [s.columns() if hasattr(s, "columns") else s for s in series]
    return {k: np.array([r[k] for r in rows], dtype=float) for k in rows[0]}


def fit_decay(series, quantity, t_min=5.0, floor=FLOOR):
    """Fit q(t) ~ C (1+t)^p over t >= t_min.

    Args:
        series: Column table ``{"t": ..., name: ...}`` or a sequence of samples.
        quantity: Column name or a callable taking the column table.
        t_min: Start of the fit window.

    Raises:
        ValueError: fewer than MIN_SAMPLES points in the window, or a
            nonpositive value inside it.
    """
    cols = _columns(series)
    t = np.asarray(cols["t"], dtype=float)
    q = np.asarray(quantity(cols) if callable(quantity) else cols[quantity], dtype=float)
    win = t >= t_min
    t, q = t[win], q[win]
    if t.size < MIN_SAMPLES:
        raise ValueError(f"only {t.size} samples with t >= {t_min}; need {MIN_SAMPLES}")
    if np.any(~np.isfinite(q)) or np.any(q <= 0):
        raise ValueError("nonpositive or non-finite values in the fit window")
    hit = np.flatnonzero(q <= floor)
    if hit.size:
        t, q = t[: hit[0]], q[: hit[0]]
        if t.size < MIN_SAMPLES:
            return DecayFit(math.nan, math.nan, int(t.size), float(t_min), float(t_min), "below floor")
    x = np.log1p(t)
    yv = np.log(q)
    res = stats.linregress(x, yv)
    slope, se = float(res.slope), float(res.stderr)
    # slope change across the window from a quadratic fit in log(1+t)
    c2 = np.polyfit(x, yv, 2)[0] if t.size >= 3 else 0.0
    bend = float(2.0 * c2 * (x[-1] - x[0]))
    status = "super-polynomial" if bend < -max(0.5, 0.25 * abs(slope)) else "ok"
    return DecayFit(slope, se, int(t.size), float(t[0]), float(t[-1]), status, bend)
