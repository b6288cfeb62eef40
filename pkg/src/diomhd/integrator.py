"""Integrating-factor RK4 time stepping with an advective CFL step size.

The magnetic diffusion Lap b is diagonal in Fourier space and is integrated
exactly through the substitution b~(k, t) = exp(|k|^2 t) b(k, t); classical
RK4 is applied to the transformed system (Lawson's scheme). The stage
formulas below never form exp(+|k|^2 t), so nothing overflows.
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BlowUpError
from .mhd import FlowState, rhs_array
from .spectral import spread_to_grid

log = logging.getLogger(__name__)

EPS_FLOOR = 1e-12


@dataclass(frozen=True)
class StepControl:
    cfl: float = 0.5
    dt_max: float = 0.05
    dt_min: float = 1e-8
    t_end: float = 1.0
    sample_interval: float = 0.5

    def __post_init__(self):
        if not 0 < self.cfl <= 1:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if not 0 < self.dt_min <= self.dt_max:
            raise ValueError(f"need 0 < dt_min <= dt_max, got {self.dt_min}, {self.dt_max}")
        if not self.sample_interval > 0:
            raise ValueError("sample_interval must be positive")


@dataclass
class IntegrationStats:
    """Accumulators filled by ``advance_to`` when passed in."""

    steps: int = 0
    dissipation: float = 0.0  # RK quadrature of the integral of ||grad b||^2 dt
    dt_min_used: float = math.inf
    dt_max_used: float = 0.0
    dt_history: list = field(default_factory=list)


def _max_speed(lattice, y):
    phys = spread_to_grid(y, lattice.max_mode, lattice.padded_dim)
    if not np.all(np.isfinite(phys)):
        return math.nan, math.nan
    umax = float(np.sqrt(np.max(phys[0] ** 2 + phys[1] ** 2)))
    bmax = float(np.sqrt(np.max(phys[2] ** 2 + phys[3] ** 2)))
    return umax, bmax


def choose_dt(state, bg, ctl):
    """CFL step cfl*h / (|n| + max|u| + max|b| + 1e-12), clamped to [dt_min, dt_max].

    Raises:
        BlowUpError: non-finite state, or the CFL step falls below dt_min.
    """
    lat = state.lattice
    y = state.as_array()
    if not np.all(np.isfinite(y)):
        raise BlowUpError(f"non-finite coefficients at t={state.t}", t=state.t)
    umax, bmax = _max_speed(lat, y)
    if not (math.isfinite(umax) and math.isfinite(bmax)):
        raise BlowUpError(f"non-finite physical field at t={state.t}", t=state.t)
    h = 2.0 * math.pi / lat.modes_per_dim
    dt = ctl.cfl * h / (bg.magnitude + umax + bmax + EPS_FLOOR)
    if dt < ctl.dt_min:
        raise BlowUpError(
            f"CFL step {dt:.3e} below dt_min={ctl.dt_min:.3e} at t={state.t:.6g} "
            f"(max|u|={umax:.3e}, max|b|={bmax:.3e}): blow-up suspected",
            t=state.t,
        )
    return min(dt, ctl.dt_max)


def _grad_b_sq(lattice, y):
    b = y[2:]
    return float(np.sum(lattice.ksq * (b.real**2 + b.imag**2)))


def _lawson_step(lattice, y, dt, n, banded=True):
    """One IF-RK4 step of packed state y; returns (y_new, dissipation increment)."""
    E = np.ones((4,) + lattice.ksq.shape)
    E[2:] = np.exp(-0.5 * dt * lattice.ksq)
    E2 = np.ones_like(E)
    E2[2:] = np.exp(-dt * lattice.ksq)  # not E * E: keeps pure diffusion bit-exact

    def N(z):
        return dt * rhs_array(lattice, z, n, banded=banded, diffusion=False)

    k1 = N(y)
    y2 = E * (y + 0.5 * k1)
    k2 = N(y2)
    y3 = E * y + 0.5 * k2
    k3 = N(y3)
    y4 = E2 * y + E * k3
    k4 = N(y4)
    y_new = E2 * y + (E2 * k1 + 2.0 * E * (k2 + k3) + k4) / 6.0
    q = dt * (
        _grad_b_sq(lattice, y) + 2.0 * _grad_b_sq(lattice, y2) + 2.0 * _grad_b_sq(lattice, y3) + _grad_b_sq(lattice, y4)
    ) / 6.0
    return y_new, q


def _check_finite(y, t, lattice):
    if np.all(np.isfinite(y)):
        return
    bad = np.argwhere(~np.isfinite(y))[0]
    comp = ("u1", "u2", "b1", "b2")[bad[0]]
    k = (int(lattice.wavenumbers[bad[1]]), int(lattice.wavenumbers[bad[2]]))
    raise BlowUpError(f"non-finite {comp} at mode k={k} after step ending t={t:.6g}", t=t, mode=(comp, k))


def step_if_rk4(state, bg, dt, banded=True):
    """Advance ``state`` by ``dt`` with integrating-factor RK4."""
    if dt == 0:
        return state
    lat = state.lattice
    y_new, _ = _lawson_step(lat, state.as_array(), dt, bg.n, banded)
    t_new = state.t + dt
    _check_finite(y_new, t_new, lat)
    return FlowState.from_array(t_new, lat, y_new)


def advance_to(state, bg, ctl, observer=None, stats=None, banded=True):
    """Step from ``state.t`` to ``ctl.t_end``, calling ``observer(state)`` at
    ``state.t``, at every multiple of ``ctl.sample_interval`` after it, and
    at ``t_end``.

    Steps are shortened to land exactly on sample times and on ``t_end``.
    """
    if ctl.t_end < state.t:
        raise ValueError(f"t_end={ctl.t_end} precedes state time {state.t}")
    lat = state.lattice
    t0 = state.t
    y = state.as_array()
    t = t0
    j = 1
    if observer is not None:
        observer(state)
    tol = 1e-12 * max(1.0, abs(ctl.t_end))
    while t < ctl.t_end - tol:
        next_sample = min(t0 + j * ctl.sample_interval, ctl.t_end)
        dt = choose_dt(FlowState.from_array(t, lat, y), bg, ctl)
        landing = next_sample - t <= dt * (1.0 + 1e-12)
        if landing:
            dt = next_sample - t
        y, q = _lawson_step(lat, y, dt, bg.n, banded)
        t = next_sample if landing else t + dt
        _check_finite(y, t, lat)
        if stats is not None:
            stats.steps += 1
            stats.dissipation += q
            stats.dt_min_used = min(stats.dt_min_used, dt)
            stats.dt_max_used = max(stats.dt_max_used, dt)
            stats.dt_history.append(dt)
        if landing:
            j += 1
            if observer is not None:
                observer(FlowState.from_array(t, lat, y))
    return FlowState.from_array(t, lat, y)
