"""Run orchestration: initial data, time stepping, sampling, persistence and
the run summary."""

import csv
import io
import json
import logging
import math
import os
import tempfile
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from . import kernels
from .config import RunConfig
from .diagnostics import choose_A, energy_sample, fill_time_derivative, lyapunov_monitor
from .diophantine import diophantine_constant
from .checkpoint import checkpoint_write
from .errors import BlowUpError, LatticeMismatchError
from .fitting import MIN_SAMPLES, fit_decay, norm_pair
from .integrator import IntegrationStats, StepControl, advance_to
from .mhd import BackgroundField, FlowState, project_array
from .random_fields import hermitian_from_half
from .spectral import SpectralVector2, get_lattice, sobolev_norm

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1


def synthesize_initial_data(config):
    """Seeded random (u0, b0): |c(k)| proportional to (1+|k|^2)^(-(N+2)/2) with
    uniform random phases, Leray-projected, mean-zero, and scaled so that
    ||u0||_{H^N} + ||b0||_{H^N} = epsilon."""
    lat = get_lattice(config.modes_per_dim)
    rng = np.random.default_rng(config.seed)
    M = lat.modes_per_dim
    profile = (1.0 + lat.ksq) ** (-0.5 * (config.N_sob + 2.0))
    fields_ = []
    for _ in range(2):
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(2, M, M))
        c = hermitian_from_half(lat, profile * np.exp(1j * phase))
        c = project_array(lat, c)
        c[:, 0, 0] = 0.0
        fields_.append(c)
    if config.b_zero:
        fields_[1][:] = 0.0
    u = SpectralVector2.from_array(lat, fields_[0])
    b = SpectralVector2.from_array(lat, fields_[1])
    total = sobolev_norm(u, config.N_sob) + sobolev_norm(b, config.N_sob)
    scale = config.epsilon / total if total > 0 else 0.0
    flags = dict(solenoidal=True, mean_zero=True)
    return FlowState(
        0.0,
        SpectralVector2.from_array(lat, fields_[0] * scale, **flags),
        SpectralVector2.from_array(lat, fields_[1] * scale, **flags),
    )


@dataclass
class RunSummary:
    config: dict
    certificate: dict
    A: float
    final: dict = field(default_factory=dict)
    fits: dict = field(default_factory=dict)
    monitor: dict = field(default_factory=dict)
    balance: dict = field(default_factory=dict)
    sup_HN: float = 0.0
    decay_guarantee: bool = True
    status: str = "ok"
    steps: int = 0
    wall_clock_s: float = 0.0
    timestamp: str = ""
    backend: str = kernels.BACKEND
    schema_version: int = SCHEMA_VERSION

    def to_dict(self):
        return asdict(self)


def _atomic_write_text(path, text):
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def samples_to_csv(samples):
    """CSV text: a schema comment line, a header row, one row per sample."""
    buf = io.StringIO()
    buf.write(f"# diomhd timeseries schema={SCHEMA_VERSION}\n")
    if not samples:
        return buf.getvalue()
    cols = samples[0].columns()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(cols))
    for s in samples:
        w.writerow([repr(float(v)) for v in s.columns().values()])
    return buf.getvalue()


def read_timeseries(path):
    """Column table ``{name: ndarray}`` from a CSV written by ``samples_to_csv``."""
    with open(path, encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body], dtype=float).reshape(len(body), len(header))
    return {name: data[:, i] for i, name in enumerate(header)}


def _energy_l2(state):
    return 0.5 * (sobolev_norm(state.u, 0) ** 2 + sobolev_norm(state.b, 0) ** 2)


def run_simulation(config, write=True, initial_state=None, checkpoint_path=None):
    """Simulate per ``config``; returns (csv_path or None, RunSummary, samples).

    ``initial_state`` (e.g. from a checkpoint) replaces the synthesized data;
    ``checkpoint_path`` receives the final state.

    Raises:
        ConfigError: invalid configuration (before any compute).
        InvalidCertificateError: resonant n without ``allow_resonant``.
        BlowUpError: integration aborted (the partial series is still written).
        OSError: output could not be written.
    """
    config.validate()
    wall0 = time.perf_counter()
    n = config.background_vector()
    cert = diophantine_constant(n, config.r, config.certificate_K)
    if not cert.valid and not config.allow_resonant:
        cert.require_valid()
    bg = BackgroundField(n, config.r, cert.c_K)
    pp = config.proof_params()
    A = choose_A(bg, pp)
    state0 = initial_state if initial_state is not None else synthesize_initial_data(config)
    if state0.lattice.modes_per_dim != config.modes_per_dim:
        raise LatticeMismatchError(
            f"initial state has M={state0.lattice.modes_per_dim}, config has M={config.modes_per_dim}")
    ctl = StepControl(cfl=config.cfl, dt_max=config.dt_max, dt_min=config.dt_min,
                      t_end=config.t_end, sample_interval=config.sample_interval)
    hm = config.hm_order if config.hm_order >= 0 else None

    samples = []

    def observe(state):
        samples.append(energy_sample(state, bg, pp, A, hm_order=hm, banded=config.banded))

    stats = IntegrationStats()
    summary = RunSummary(config=config.to_dict(), certificate=cert.to_dict(), A=A, decay_guarantee=cert.valid)
    csv_path = None
    out_dir = config.output_path()
    try:
        final = advance_to(state0, bg, ctl, observer=observe, stats=stats, banded=config.banded)
    except BlowUpError as exc:
        summary.status = f"blow-up: {exc}"
        if write:
            fill_time_derivative(samples)
            _atomic_write_text(os.path.join(out_dir, f"{config.run_name}.csv"), samples_to_csv(samples))
            _atomic_write_text(os.path.join(out_dir, f"{config.run_name}.summary.json"),
                               json.dumps(summary.to_dict(), indent=2, default=_json_default))
        raise

    fill_time_derivative(samples)
    summary.steps = stats.steps
    e0, e1 = _energy_l2(state0), _energy_l2(final)
    drift = e1 - e0 + stats.dissipation
    summary.balance = {
        "energy_initial": e0,
        "energy_final": e1,
        "dissipation_integral": stats.dissipation,
        "drift": drift,
        "relative_drift": abs(drift) / e0 if e0 > 0 else 0.0,
    }
    last = samples[-1]
    summary.final = {"t": last.t, "l2_u": last.l2_u, "l2_b": last.l2_b, "h_N_u": last.h_N_u,
                     "h_N_b": last.h_N_b, "E": last.E, "D": last.D}
    summary.sup_HN = max(s.h_N_u + s.h_N_b for s in samples)
    if len(samples) >= 3:
        summary.monitor = lyapunov_monitor(samples).to_dict()
    summary.fits = _decay_fits(samples, pp, config)
    if not cert.valid:
        summary.fits["note"] = "resonant background: no decay guarantee"
    summary.wall_clock_s = time.perf_counter() - wall0
    summary.timestamp = time.strftime("%Y-%m-%dT%H:%M:%S%z")

    if write:
        csv_path = os.path.join(out_dir, f"{config.run_name}.csv")
        _atomic_write_text(csv_path, samples_to_csv(samples))
        _atomic_write_text(os.path.join(out_dir, f"{config.run_name}.summary.json"),
                           json.dumps(summary.to_dict(), indent=2, default=_json_default))
    if checkpoint_path:
        checkpoint_write(final, checkpoint_path)
    return csv_path, summary, samples


def _decay_fits(samples, pp, config):
    out = {}
    t = np.array([s.t for s in samples])
    if np.count_nonzero(t >= config.fit_t_min) < MIN_SAMPLES:
        return {"skipped": f"fewer than {MIN_SAMPLES} samples past t_min"}
    if all(s.E == 0.0 and s.h_N_u == 0.0 and s.h_N_b == 0.0 for s in samples):
        return {"skipped": "identically zero solution"}
    for g in pp.gammas:
        predicted = pp.predicted_exponent(g)
        try:
            fit = fit_decay(samples, norm_pair(g), t_min=config.fit_t_min)
        except ValueError as exc:
            out[f"{g:g}"] = {"error": str(exc), "predicted": predicted}
            continue
        passes = fit.status == "below floor" or fit.exponent <= predicted + 0.5
        out[f"{g:g}"] = dict(fit.to_dict(), predicted=predicted, one_sided_pass=bool(passes))
    try:
        fitE = fit_decay(samples, "E", t_min=config.fit_t_min)
        predE = -2.0 * (pp.beta + 1.0)
        out["E"] = dict(fitE.to_dict(), predicted=predE,
                        one_sided_pass=bool(fitE.status == "below floor" or fitE.exponent <= predE + 0.5))
    except ValueError as exc:
        out["E"] = {"error": str(exc)}
    return out


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


__all__ = ["RunConfig", "RunSummary", "run_simulation", "synthesize_initial_data", "read_timeseries",
           "samples_to_csv"]
