import math

import numpy as np
import pytest

from diomhd.diagnostics import (
    ProofParams,
    choose_A,
    cross_term,
    dissipation_D,
    energy_sample,
    fill_time_derivative,
    hm_balance_residual,
    l2_balance_residual,
    lyapunov_E,
    lyapunov_E_merged,
    lyapunov_monitor,
)
from diomhd.errors import ConfigError
from diomhd.mhd import BackgroundField, FlowState
from diomhd.random_fields import random_solenoidal, random_state
from diomhd.spectral import SpectralVector2, get_lattice, sobolev_norm

from oracles import run_to

PHI = (1 + math.sqrt(5)) / 2
BG = BackgroundField((1.0, PHI))
PP = ProofParams()


def test_default_params():
    assert PP.m == 5.5
    assert PP.N_min == 14.5
    assert PP.S == (0.0, 1.0, 2.0, 3.0, 4.0)
    assert PP.predicted_exponent(5.5) == pytest.approx(-1.5)


@pytest.mark.parametrize(
    "kwargs, constraint",
    [
        (dict(r=1.0), "r > 1"),
        (dict(alpha=0.0), "alpha > 0, beta > 0"),
        (dict(N_sob=14.0), "N >= (2beta+3)r + alpha + 2beta + 5"),
        (dict(gammas=(5.0,)), "r+alpha+3 <= gamma <= N"),
        (dict(S=(0, 5)), "S subset of [0, r+alpha+2]"),
        (dict(A=0.5), "A >= 1"),
    ],
)
def test_param_constraints_named(kwargs, constraint):
    with pytest.raises(ConfigError) as info:
        ProofParams(**kwargs)
    assert info.value.constraint == constraint


def test_choose_A_examples():
    assert choose_A(BG, PP) == pytest.approx(1 + 5 * math.hypot(1, PHI))
    assert choose_A(BG, PP) == pytest.approx(10.51, abs=0.01)
    assert choose_A(BackgroundField((0.0, 0.0)), PP) == 1.0


def test_l2_residual_zero_and_random():
    lat = get_lattice(32)
    assert l2_balance_residual(FlowState.zeros(lat), BG) == 0.0
    for seed in range(3):
        assert l2_balance_residual(random_state(lat, seed), BG) <= 1e-11


def test_l2_residual_negative_control(monkeypatch):
    import diomhd.diagnostics as diag
    from diomhd import mhd

    lat = get_lattice(32)
    st = random_state(lat, 1)

    def no_diffusion(lattice, y, n, banded=True, diffusion=True):
        return mhd.rhs_array(lattice, y, n, banded=banded, diffusion=False)

    monkeypatch.setattr(diag, "rhs_array", no_diffusion)
    assert l2_balance_residual(st, BG) > 1e-3


def test_hm_residual():
    lat = get_lattice(32)
    assert hm_balance_residual(FlowState.zeros(lat), BG, 2) == 0.0
    st = random_state(lat, 2)
    for m in (1, 2, 3):
        assert hm_balance_residual(st, BG, m) <= 1e-9
    assert hm_balance_residual(st, BackgroundField((1e6, 1e6 * PHI)), 2) <= 1e-9


def test_cross_term_examples():
    lat = get_lattice(16)
    st = random_state(lat, 3)
    assert cross_term(st, BackgroundField((0.0, 0.0)), PP.S) == 0.0
    # b = n.grad u gives the positive diagonal sum
    y = st.as_array().copy()
    nk = BG.n[0] * lat.k1 + BG.n[1] * lat.k2
    y[2:] = 1j * nk * y[:2]
    st2 = FlowState.from_array(0.0, lat, y)
    ref = sum(sobolev_norm(SpectralVector2.from_array(lat, np.sqrt(lat.ksq) ** s * y[2:]), 0) ** 2 for s in PP.S)
    assert cross_term(st2, BG, PP.S) == pytest.approx(ref, rel=1e-13)


def test_cross_term_single_mode_by_hand():
    lat = get_lattice(16)
    u = np.zeros((2, 16, 16), complex)
    b = np.zeros((2, 16, 16), complex)
    i, j = lat.index((1, 0)), lat.index((-1, 0))
    u[1][i], u[1][j] = 0.3 + 0.1j, 0.3 - 0.1j
    b[1][i], b[1][j] = 0.2 - 0.4j, 0.2 + 0.4j
    st = FlowState(0.0, SpectralVector2.from_array(lat, u), SpectralVector2.from_array(lat, b))
    # n.k = 1 at k=(1,0); |k| = 1 so every s contributes equally; both +-k count
    per_mode = (b[1][i] * np.conj(1j * u[1][i])).real
    assert cross_term(st, BG, PP.S) == pytest.approx(2 * len(PP.S) * per_mode, rel=1e-14)


def test_E_and_D_zero_state():
    st = FlowState.zeros(get_lattice(16))
    assert lyapunov_E(st, BG, PP) == 0.0
    assert dissipation_D(st, BG, PP) == 0.0


def test_E_with_zero_velocity():
    lat = get_lattice(16)
    st = FlowState(0.0, SpectralVector2.zeros(lat), random_solenoidal(lat, 1))
    A = choose_A(BG, PP)
    assert cross_term(st, BG, PP.S) == 0.0
    assert lyapunov_E(st, BG, PP) == pytest.approx(A * sobolev_norm(st.b, PP.m) ** 2, rel=1e-14)


def test_E_two_summation_paths_agree():
    lat = get_lattice(32)
    for seed in range(3):
        st = random_state(lat, seed)
        assert lyapunov_E(st, BG, PP) == pytest.approx(lyapunov_E_merged(st, BG, PP), rel=1e-12)


def test_E_norm_equivalence():
    lat = get_lattice(32)
    A = choose_A(BG, PP)
    for seed in range(5):
        st = random_state(lat, seed, decay=seed)
        nsq = sobolev_norm(st.u, PP.m) ** 2 + sobolev_norm(st.b, PP.m) ** 2
        E = lyapunov_E(st, BG, PP)
        assert E - nsq >= -1e-12 * E
        assert E <= 2 * A * nsq


def test_D_small_forces_zero_state_on_diophantine_lattice():
    from diomhd.diophantine import diophantine_constant

    lat = get_lattice(16)
    cert = diophantine_constant(BG.n, 2.0, math.ceil(lat.radius))
    A = choose_A(BG, PP)
    for seed in range(3):
        st = random_state(lat, seed, decay=4)
        factor = math.sqrt(1e-21 / dissipation_D(st, BG, PP))
        st = FlowState(0.0, st.u * factor, st.b * factor)
        D = dissipation_D(st, BG, PP)
        assert D < 1e-20
        # D controls ||n.grad u||^2 >= c_K^2 ||u||^2 and A ||grad b||^2 >= A ||b||^2
        assert sobolev_norm(st.u, 0) ** 2 <= D / cert.c_K**2
        assert sobolev_norm(st.b, 0) ** 2 <= D / A


def test_monitor_zero_series():
    rep = lyapunov_monitor([(t, 0.0, 0.0) for t in np.linspace(0, 1, 5)])
    assert rep.n_violations == 0 and rep.E_increases == []


def test_monitor_flags_one_bump():
    t = np.linspace(0, 10, 41)
    E = np.exp(-t)
    D = 2 * np.exp(-t)
    E[20] *= 1.5
    rep = lyapunov_monitor(list(zip(t, E, D)))
    assert rep.violations == [19]
    assert rep.E_increases == [19]


def test_monitor_needs_three_samples():
    with pytest.raises(ValueError):
        lyapunov_monitor([(0, 1, 1), (1, 0.5, 0.5)])


def test_linear_regime_monitor_clean():
    lat = get_lattice(32)
    from diomhd.config import RunConfig
    from diomhd.runner import synthesize_initial_data

    st = synthesize_initial_data(RunConfig(modes_per_dim=32, epsilon=1e-6))
    samples = []
    from diomhd.integrator import StepControl, advance_to

    advance_to(st, BG, StepControl(t_end=5.0, sample_interval=0.25),
               observer=lambda s: samples.append(energy_sample(s, BG, PP)))
    fill_time_derivative(samples)
    rep = lyapunov_monitor(samples, tol_rel=0.1)
    assert rep.n_violations == 0
    assert rep.E_increases == []


def test_sample_columns_order():
    st = random_state(get_lattice(16), 0, scale=1e-3)
    cols = list(energy_sample(st, BG, PP).columns())
    assert cols == [
        "t", "l2_u", "l2_b", "grad_b_l2",
        "h_gamma_5.5_u", "h_gamma_5.5_b", "h_gamma_8_u", "h_gamma_8_b", "h_gamma_10_u", "h_gamma_10_b",
        "h_N_u", "h_N_b", "cross", "E", "D", "residual_l2", "dE_dt_fd",
    ]
