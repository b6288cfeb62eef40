"""Functionals from the energy method: balance residuals, the cross term,
the Lyapunov functional E and its dissipation D, and a monitor for
dE/dt + D/2 <= 0 along sampled trajectories.

Norm conventions follow ``spectral``: H^s weights (1+|k|^2)^s and the
fractional derivative D^s acting as |k|^s.
"""

import math
from dataclasses import dataclass, field, fields

import numpy as np

from . import kernels
from .errors import ConfigError
from .mhd import advect_array, rhs_array
from .spectral import SpectralVector2, _lattice_sum


@dataclass(frozen=True)
class ProofParams:
    """Exponents of the decay estimate plus the Lyapunov weight.

    Args:
        r: Diophantine exponent (> 1).
        alpha, beta: Positive regularity/decay parameters.
        N_sob: Sobolev index of the data; needs N_sob >= (2 beta + 3) r + alpha + 2 beta + 5.
        gammas: Reporting indices, each in [r + alpha + 3, N_sob].
        A: Lyapunov weight; None means ``choose_A`` decides.
        S: Cross-term exponents in [0, r + alpha + 2]; None means the integers
           0, 1, ..., floor(r + alpha + 2).
    """

    r: float = 2.0
    alpha: float = 0.5
    beta: float = 0.5
    N_sob: float = 15.0
    gammas: tuple = (5.5, 8.0, 10.0)
    A: float = None
    S: tuple = None

    def __post_init__(self):
        if self.S is None:
            object.__setattr__(self, "S", tuple(float(s) for s in range(int(math.floor(self.top_cross + 1e-12)) + 1)))
        object.__setattr__(self, "S", tuple(float(s) for s in self.S))
        object.__setattr__(self, "gammas", tuple(float(g) for g in self.gammas))
        self.validate()

    @property
    def m(self):
        """Energy index r + alpha + 3."""
        return self.r + self.alpha + 3.0

    @property
    def top_cross(self):
        return self.r + self.alpha + 2.0

    @property
    def N_min(self):
        return (2.0 * self.beta + 3.0) * self.r + self.alpha + 2.0 * self.beta + 5.0

    def validate(self):
        if not self.r > 1:
            raise ConfigError(f"r = {self.r} must exceed 1", "r > 1")
        if not (self.alpha > 0 and self.beta > 0):
            raise ConfigError("alpha and beta must be positive", "alpha > 0, beta > 0")
        if self.N_sob < self.N_min - 1e-12:
            raise ConfigError(
                f"N_sob = {self.N_sob} < (2beta+3)r + alpha + 2beta + 5 = {self.N_min}",
                "N >= (2beta+3)r + alpha + 2beta + 5",
            )
        for g in self.gammas:
            if not (self.m - 1e-12 <= g <= self.N_sob + 1e-12):
                raise ConfigError(f"gamma = {g} outside [r+alpha+3, N] = [{self.m}, {self.N_sob}]",
                                  "r+alpha+3 <= gamma <= N")
        if not self.S or min(self.S) < 0 or max(self.S) > self.top_cross + 1e-12:
            raise ConfigError(f"S = {self.S} not within [0, r+alpha+2 = {self.top_cross}]",
                              "S subset of [0, r+alpha+2]")
        if self.A is not None and self.A < 1:
            raise ConfigError(f"A = {self.A} < 1", "A >= 1")

    def predicted_exponent(self, gamma):
        """Decay exponent -(N-gamma)(beta+1)/(N-r-alpha-3) for the H^gamma norm pair."""
        return -(self.N_sob - gamma) * (self.beta + 1.0) / (self.N_sob - self.m)


def choose_A(bg, pp):
    """A = 1 + (max S + 1)|n|, enough for E >= ||(u, b)||^2_{H^{r+alpha+3}}."""
    if pp.A is not None:
        return float(pp.A)
    return 1.0 + (max(pp.S) + 1.0) * bg.magnitude


# --------------------------------------------------------------------------
# Lattice-sum helpers on packed arrays


def _abs2(c):
    return c.real**2 + c.imag**2


def _sum(lat, kind, s, vals):
    return float(_lattice_sum(lat, kind, s, vals))


def _nk(lat, n):
    return n[0] * lat.k1 + n[1] * lat.k2


def _ip(lat, a, c, s=0.0):
    """sum_k |k|^(2s) Re(a conj c), summed over leading components (k=0 kept for s=0)."""
    vals = np.sum((a * np.conj(c)).real, axis=0)
    return _sum(lat, "inhom" if s == 0 else "hom", s, vals)


def _norm_sq(lat, a, s=0.0, kind="inhom"):
    return _sum(lat, kind, s, np.sum(_abs2(a), axis=0))


# --------------------------------------------------------------------------
# Residuals


def l2_balance_residual(state, bg, banded=True):
    """(<du/dt, u> + <db/dt, b> + ||grad b||^2) / (1 + ||u||^2 + ||b||^2_{H^1})."""
    lat = state.lattice
    y = state.as_array()
    dy = rhs_array(lat, y, bg.n, banded=banded)
    val = _ip(lat, dy[:2], y[:2]) + _ip(lat, dy[2:], y[2:]) + _norm_sq(lat, y[2:], 1.0, "hom")
    scale = 1.0 + _norm_sq(lat, y[:2]) + _norm_sq(lat, y[2:], 1.0)
    return abs(val) / scale


def _D(lat, a, s):
    return a if s == 0 else np.sqrt(lat.ksq) ** s * a


def hm_balance_residual(state, bg, m, banded=True):
    """Normalized mismatch between the H^m energy rate and its commutator form.

    Both sides use D^s = |k|^s for integer s = 0..m:
      rate = sum_s <D^s du, D^s u> + <D^s db, D^s b> + ||D^s grad b||^2
      comm = sum_{0<s<=m} -<[D^s, u.grad]u, D^s u> + <[D^s, b.grad]b, D^s u>
                          -<[D^s, u.grad]b, D^s b> + <[D^s, b.grad]u, D^s b>
    The n-coupling and transport terms cancel identically, so rate == comm
    for the spatially discrete system.
    """
    lat = state.lattice
    y = state.as_array()
    u, b = y[:2], y[2:]
    dy = rhs_array(lat, y, bg.n, banded=banded)
    m = int(m)
    rate = 0.0
    scale = 1.0
    for s in range(m + 1):
        rate += _ip(lat, _D(lat, dy[:2], s), _D(lat, u, s))
        rate += _ip(lat, _D(lat, dy[2:], s), _D(lat, b, s))
        rate += _norm_sq(lat, _D(lat, b, s + 1))
        scale += _norm_sq(lat, _D(lat, u, s)) + _norm_sq(lat, _D(lat, b, s)) + _norm_sq(lat, _D(lat, b, s + 1))

    adv = lambda v, f: advect_array(lat, v, f, banded)  # noqa: E731
    uu, bb, ub, bu = adv(u, u), adv(b, b), adv(u, b), adv(b, u)
    comm = 0.0
    for s in range(1, m + 1):
        Du, Db = _D(lat, u, s), _D(lat, b, s)
        c_uu = _D(lat, uu, s) - adv(u, Du)
        c_bb = _D(lat, bb, s) - adv(b, Db)
        c_ub = _D(lat, ub, s) - adv(u, Db)
        c_bu = _D(lat, bu, s) - adv(b, Du)
        comm += -_ip(lat, c_uu, Du) + _ip(lat, c_bb, Du) - _ip(lat, c_ub, Db) + _ip(lat, c_bu, Db)
    return abs(rate - comm) / scale


# --------------------------------------------------------------------------
# Cross term, E and D


def cross_term(state, bg, S):
    """sum_{s in S} sum_i <D^s b_i, D^s (n.grad u_i)> (zero mode dropped)."""
    lat = state.lattice
    y = state.as_array()
    ndu = 1j * _nk(lat, bg.n) * y[:2]
    return sum(_sum(lat, "hom", float(s), np.sum((y[2:] * np.conj(ndu)).real, axis=0)) for s in S)


def lyapunov_E(state, bg, pp, A=None):
    """A (||u||^2 + ||b||^2)_{H^{r+alpha+3}} - cross_term."""
    lat = state.lattice
    y = state.as_array()
    A = choose_A(bg, pp) if A is None else A
    return A * _norm_sq(lat, y, pp.m) - cross_term(state, bg, pp.S)


def lyapunov_E_merged(state, bg, pp, A=None):
    """Same value as ``lyapunov_E`` evaluated as one lattice sum with merged weights."""
    lat = state.lattice
    y = state.as_array()
    A = choose_A(bg, pp) if A is None else A
    ksq = lat.ksq
    w_cross = np.zeros_like(ksq)
    nz = ksq > 0
    for s in pp.S:
        w_cross[nz] += ksq[nz] ** s
    ndu = 1j * _nk(lat, bg.n) * y[:2]
    per_mode = A * (1.0 + ksq) ** pp.m * np.sum(_abs2(y), axis=0) - w_cross * np.sum((y[2:] * np.conj(ndu)).real, axis=0)
    return float(kernels.compensated_sum(np.ascontiguousarray(per_mode.ravel()[lat.desc_order])))


def dissipation_D(state, bg, pp, A=None):
    """A ||grad b||^2_{H^{r+alpha+3}} + ||n.grad u||^2_{H^{r+alpha+2}}."""
    lat = state.lattice
    y = state.as_array()
    A = choose_A(bg, pp) if A is None else A
    ndu = 1j * _nk(lat, bg.n) * y[:2]
    return A * _norm_sq(lat, y[2:], pp.m, "grad_inhom") + _norm_sq(lat, ndu, pp.m - 1.0)


# --------------------------------------------------------------------------
# Samples and the monitor


@dataclass
class EnergySample:
    """All monitored functionals at one time."""

    t: float
    l2_u: float
    l2_b: float
    grad_b_l2: float
    h_gamma_u: dict
    h_gamma_b: dict
    h_N_u: float
    h_N_b: float
    cross: float
    E: float
    D: float
    residual_l2: float
    residual_hm: float = math.nan
    dE_dt_fd: float = math.nan

    def columns(self):
        """Flat ``{name: value}`` in the fixed CSV column order."""
        out = {"t": self.t, "l2_u": self.l2_u, "l2_b": self.l2_b, "grad_b_l2": self.grad_b_l2}
        for g in sorted(self.h_gamma_u):
            out[f"h_gamma_{g:g}_u"] = self.h_gamma_u[g]
            out[f"h_gamma_{g:g}_b"] = self.h_gamma_b[g]
        out.update(
            h_N_u=self.h_N_u, h_N_b=self.h_N_b, cross=self.cross, E=self.E, D=self.D,
            residual_l2=self.residual_l2, dE_dt_fd=self.dE_dt_fd,
        )
        return out


def energy_sample(state, bg, pp, A=None, hm_order=None, banded=True):
    """Evaluate every monitored functional on ``state``."""
    lat = state.lattice
    y = state.as_array()
    u, b = y[:2], y[2:]
    A = choose_A(bg, pp) if A is None else A
    sq = lambda a, s, kind="inhom": math.sqrt(max(_norm_sq(lat, a, s, kind), 0.0))  # noqa: E731
    return EnergySample(
        t=float(state.t),
        l2_u=sq(u, 0.0),
        l2_b=sq(b, 0.0),
        grad_b_l2=sq(b, 1.0, "hom"),
        h_gamma_u={g: sq(u, g) for g in pp.gammas},
        h_gamma_b={g: sq(b, g) for g in pp.gammas},
        h_N_u=sq(u, pp.N_sob),
        h_N_b=sq(b, pp.N_sob),
        cross=cross_term(state, bg, pp.S),
        E=lyapunov_E(state, bg, pp, A),
        D=dissipation_D(state, bg, pp, A),
        residual_l2=l2_balance_residual(state, bg, banded),
        residual_hm=hm_balance_residual(state, bg, hm_order, banded) if hm_order is not None else math.nan,
    )


def fill_time_derivative(samples):
    """Set ``dE_dt_fd``: centered differences inside, one-sided at the ends."""
    n = len(samples)
    if n < 2:
        return samples
    t = np.array([s.t for s in samples])
    E = np.array([s.E for s in samples])
    d = np.gradient(E, t, edge_order=1) if n > 2 else np.full(n, (E[1] - E[0]) / (t[1] - t[0]))
    for s, v in zip(samples, d):
        s.dE_dt_fd = float(v)
    return samples


@dataclass
class MonitorReport:
    n_samples: int
    violations: list = field(default_factory=list)  # sample indices
    margins: list = field(default_factory=list)  # (dE/dt + D/2) / D per interior sample
    local_decay: list = field(default_factory=list)  # d log E / d log(1+t)
    E_increases: list = field(default_factory=list)  # indices i with E[i+1] > E[i] + tol
    tol_rel: float = 0.1
    tol_abs: float = 0.0

    @property
    def n_violations(self):
        return len(self.violations)

    def to_dict(self):
        finite = [m for m in self.margins if math.isfinite(m)]
        return {
            "n_samples": self.n_samples,
            "n_violations": self.n_violations,
            "violations": list(self.violations),
            "n_E_increases": len(self.E_increases),
            "worst_margin": float(max(finite)) if finite else None,
            "tol_rel": self.tol_rel,
            "tol_abs": self.tol_abs,
        }


def lyapunov_monitor(samples, tol_rel=0.1, tol_abs=None, monotone_tol=1e-9):
    """Check dE/dt + D/2 <= tol_rel*D + tol_abs at interior samples.

    dE/dt is the centered difference of neighbouring samples. ``tol_abs``
    defaults to 1e-12 * max|E| / (mean sample spacing). Also records
    sample-to-sample increases of E beyond ``monotone_tol * E[0]`` and the
    running exponent d log E / d log(1+t).

    Args:
        samples: Sequence of EnergySample, or of (t, E, D) triples.
    """
    if len(samples) < 3:
        raise ValueError(f"need at least 3 samples, got {len(samples)}")
    if isinstance(samples[0], EnergySample):
        t = np.array([s.t for s in samples], dtype=float)
        E = np.array([s.E for s in samples], dtype=float)
        D = np.array([s.D for s in samples], dtype=float)
    else:
        t, E, D = (np.array(col, dtype=float) for col in zip(*samples))
    if tol_abs is None:
        spacing = float(np.mean(np.diff(t)))
        tol_abs = 1e-12 * float(np.max(np.abs(E))) / spacing
    rep = MonitorReport(n_samples=len(t), tol_rel=tol_rel, tol_abs=tol_abs)
    for i in range(1, len(t) - 1):
        dEdt = (E[i + 1] - E[i - 1]) / (t[i + 1] - t[i - 1])
        excess = dEdt + 0.5 * D[i]
        rep.margins.append(excess / D[i] if D[i] > 0 else (0.0 if excess <= 0 else math.inf))
        if excess > tol_rel * D[i] + tol_abs:
            rep.violations.append(i)
        if E[i + 1] > 0 and E[i - 1] > 0:
            rep.local_decay.append(
                (math.log(E[i + 1]) - math.log(E[i - 1])) / (math.log1p(t[i + 1]) - math.log1p(t[i - 1]))
            )
        else:
            rep.local_decay.append(math.nan)
    thresh = monotone_tol * abs(E[0])
    rep.E_increases = [i for i in range(len(E) - 1) if E[i + 1] - E[i] > thresh]
    return rep


SAMPLE_FIELDS = [f.name for f in fields(EnergySample)]
