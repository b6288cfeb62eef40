"""Property suites run by ``diomhd verify``: each check is a boolean over a
seeded random sample, and the report aggregates per-suite counts."""

import math
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .checkpoint import checkpoint_read, checkpoint_write
from .config import RunConfig
from .diagnostics import hm_balance_residual, l2_balance_residual
from .diophantine import diophantine_constant, golden_vector, verify_homogeneous_poincare, verify_poincare
from .integrator import step_if_rk4
from .mhd import BackgroundField, FlowState, cancellation_suite, project_array
from .random_fields import random_scalar, random_state
from .runner import synthesize_initial_data
from .spectral import (
    SpectralVector2,
    forward_transform,
    get_lattice,
    inverse_transform,
    partial_derivative,
    sobolev_norm,
)


@dataclass
class SuiteResult:
    name: str
    passed: int = 0
    total: int = 0
    failures: list = field(default_factory=list)

    def check(self, label, ok):
        self.total += 1
        if ok:
            self.passed += 1
        else:
            self.failures.append(label)

    @property
    def ok(self):
        return self.passed == self.total


def _spectral(count, M):
    res = SuiteResult("spectral")
    lat = get_lattice(M)
    for seed in range(count):
        f = random_scalar(lat, seed, decay=3.0)
        g = forward_transform(inverse_transform(f), lat)
        res.check(f"roundtrip seed={seed}", np.max(np.abs(g.coeffs - f.coeffs)) <= 1e-13 * np.max(np.abs(f.coeffs)))
        rms = float(np.sqrt(np.mean(inverse_transform(f) ** 2)))
        res.check(f"parseval seed={seed}", abs(sobolev_norm(f, 0) - rms) <= 1e-12 * rms)
    grid = inverse_transform(random_scalar(lat, 0)).shape[0]
    x = 2 * np.pi * np.arange(grid) / grid
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    f = forward_transform(np.sin(3 * X1) * np.cos(2 * X2), lat)
    d = inverse_transform(partial_derivative(f, 1))
    res.check("exact derivative", np.max(np.abs(d - 3 * np.cos(3 * X1) * np.cos(2 * X2))) <= 1e-12)
    return res


def _mhd(count, M):
    res = SuiteResult("mhd")
    lat = get_lattice(M)
    n = golden_vector()
    for seed in range(count):
        st = random_state(lat, seed)
        for name, val in cancellation_suite(st.u, st.b, n):
            res.check(f"{name} seed={seed}", val <= 1e-11)
        p = project_array(lat, st.u.as_array() + 0.3 * st.b.as_array())
        res.check(f"projection idempotent seed={seed}", np.max(np.abs(project_array(lat, p) - p)) <= 1e-14)
    return res


def _integrator(M):
    res = SuiteResult("time_integrator")
    lat = get_lattice(M)
    b = np.zeros((2, M, M), complex)
    b[1][lat.index((1, 0))] = b[1][lat.index((-1, 0))] = 0.5
    st = FlowState(0.0, SpectralVector2.zeros(lat), SpectralVector2.from_array(lat, b))
    out = step_if_rk4(st, BackgroundField((0.0, 0.0)), 0.1)
    res.check("exact diffusion", np.max(np.abs(out.b.as_array() - b * np.exp(-0.1))) <= 1e-15)
    bg = BackgroundField(golden_vector())
    z = FlowState.zeros(lat)
    res.check("zero stays zero", not np.any(step_if_rk4(z, bg, 0.05).as_array()))
    st = random_state(lat, 1, scale=1e-3)
    res.check("dt = 0 identity", step_if_rk4(st, bg, 0.0) is st)
    return res


def _diagnostics(count, M):
    res = SuiteResult("energy_diagnostics")
    lat = get_lattice(M)
    bg = BackgroundField(golden_vector())
    for seed in range(count):
        st = random_state(lat, seed)
        res.check(f"L2 balance seed={seed}", l2_balance_residual(st, bg) <= 1e-11)
        for m in (1, 2, 3):
            res.check(f"H^{m} balance seed={seed}", hm_balance_residual(st, bg, m) <= 1e-9)
    return res


def _diophantine(count, M):
    res = SuiteResult("diophantine")
    lat = get_lattice(M)
    n = golden_vector()
    consts = [diophantine_constant(n, 2.0, K).c_K for K in (10, 50, 100)]
    res.check("c_K positive", all(c > 0 for c in consts))
    res.check("c_K nonincreasing", all(a >= b for a, b in zip(consts, consts[1:])))
    cert = diophantine_constant(n, 2.0, math.ceil(lat.radius))
    for seed in range(count):
        f = random_scalar(lat, seed, decay=1.0)
        for s in (0.0, 1.0, 5.5):
            res.check(f"poincare s={s} seed={seed}", verify_poincare(f, cert, s).holds)
            if s > 0:
                res.check(f"homogeneous s={s} seed={seed}", verify_homogeneous_poincare(f, cert, s).holds)
    res.check("resonant direction", diophantine_constant((1.0, 1.0), 2.0, 20).c_K == 0.0)
    return res


def _experiment(count, M):
    res = SuiteResult("experiment_cli")
    cfg = RunConfig(modes_per_dim=M, epsilon=1e-3)
    for seed in range(count):
        c = RunConfig(modes_per_dim=M, seed=seed)
        a, b = synthesize_initial_data(c), synthesize_initial_data(c)
        res.check(f"deterministic seed={seed}", np.array_equal(a.as_array(), b.as_array()))
        tot = sobolev_norm(a.u, c.N_sob) + sobolev_norm(a.b, c.N_sob)
        res.check(f"H^N budget seed={seed}", abs(tot - c.epsilon) <= 1e-12 * c.epsilon)
    st = synthesize_initial_data(cfg)
    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "state.ckpt")
        checkpoint_write(st, path)
        back = checkpoint_read(path, modes_per_dim=M)
        res.check("checkpoint roundtrip", np.array_equal(back.as_array(), st.as_array()) and back.t == st.t)
    return res


def run_verify(count=10, modes_per_dim=32):
    """Run every suite; returns a list of SuiteResult."""
    return [
        _spectral(count, modes_per_dim),
        _mhd(count, modes_per_dim),
        _integrator(16),
        _diagnostics(count, modes_per_dim),
        _diophantine(count, modes_per_dim),
        _experiment(min(count, 3), modes_per_dim),
    ]
