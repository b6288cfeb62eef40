"""Run configuration: flat ``key = value`` files plus overrides."""

import math
import os
from dataclasses import asdict, dataclass, fields, replace

from .diagnostics import ProofParams
from .diophantine import golden_vector, noble_vector
from .errors import ConfigError

MODES = ("simulate", "verify", "fit", "cancellations", "diophantine")
OUTPUT_DIR_ENV = "DIOMHD_OUTPUT_DIR"


@dataclass(frozen=True)
class RunConfig:
    modes_per_dim: int = 64
    n: str = "golden"
    r: float = 2.0
    alpha: float = 0.5
    beta: float = 0.5
    N_sob: float = 15.0
    gamma_list: tuple = (5.5, 8.0, 10.0)
    epsilon: float = 1e-3
    t_end: float = 50.0
    sample_interval: float = 0.5
    cfl: float = 0.5
    dt_max: float = 0.05
    dt_min: float = 1e-8
    seed: int = 0
    output_dir: str = "runs"
    run_name: str = "run"
    mode: str = "simulate"
    cert_K: int = 0  # 0: the lattice radius
    allow_resonant: bool = False
    banded: bool = True
    fit_t_min: float = 5.0
    hm_order: int = -1  # -1: skip the per-sample H^m residual
    b_zero: bool = False  # start with b0 = 0

    def background_vector(self):
        """Resolve ``n``: "golden", "noble:<seed>", or "a,b"."""
        spec = str(self.n).strip()
        if spec == "golden":
            return golden_vector()
        if spec.startswith("noble:"):
            return noble_vector(int(spec.split(":", 1)[1]))
        try:
            a, b = (float(x) for x in spec.replace("(", "").replace(")", "").split(","))
        except ValueError:
            raise ConfigError(f"cannot parse background vector n={spec!r}", "n") from None
        return (a, b)

    def proof_params(self):
        return ProofParams(r=self.r, alpha=self.alpha, beta=self.beta, N_sob=self.N_sob,
                           gammas=tuple(self.gamma_list))

    @property
    def certificate_K(self):
        """Scan radius, never below the lattice radius."""
        lattice_radius = math.ceil(math.sqrt(2.0) * (self.modes_per_dim // 2 - 1))
        return max(int(self.cert_K), lattice_radius)

    def validate(self):
        """Raise ConfigError naming the first violated constraint."""
        M = self.modes_per_dim
        if M < 4 or M % 2:
            raise ConfigError(f"modes_per_dim = {M} must be even and >= 4", "modes_per_dim even")
        if self.mode not in MODES:
            raise ConfigError(f"mode {self.mode!r} not in {MODES}", "mode")
        if self.epsilon < 0 or not math.isfinite(self.epsilon):
            raise ConfigError(f"epsilon = {self.epsilon} must be finite and >= 0", "epsilon >= 0")
        if self.t_end < 0:
            raise ConfigError("t_end must be >= 0", "t_end >= 0")
        if self.sample_interval <= 0:
            raise ConfigError("sample_interval must be positive", "sample_interval > 0")
        if not 0 < self.cfl <= 1:
            raise ConfigError(f"cfl = {self.cfl} outside (0, 1]", "0 < cfl <= 1")
        if not 0 < self.dt_min <= self.dt_max:
            raise ConfigError("need 0 < dt_min <= dt_max", "0 < dt_min <= dt_max")
        self.background_vector()
        self.proof_params()
        return self

    def output_path(self):
        return os.environ.get(OUTPUT_DIR_ENV) or self.output_dir

    def to_dict(self):
        d = asdict(self)
        d["gamma_list"] = list(self.gamma_list)
        return d


_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _coerce(name, raw):
    types = {f.name: f.type for f in fields(RunConfig)}
    if name not in types:
        raise ConfigError(f"unknown config key {name!r}", name)
    kind = types[name]
    raw = str(raw).strip()
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is bool:
            return _BOOL[raw.lower()]
        if kind is tuple:
            return tuple(float(x) for x in raw.replace("(", "").replace(")", "").split(",") if x.strip())
        return raw
    except (ValueError, KeyError):
        raise ConfigError(f"bad value {raw!r} for {name} ({kind.__name__})", name) from None


def parse_assignments(lines):
    """``key = value`` lines; blank lines and ``#`` comments are skipped."""
    out = {}
    for lineno, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}", "syntax")
        key, val = (s.strip() for s in line.split("=", 1))
        out[key] = _coerce(key, val)
    return out


def load_config(path=None, overrides=()):
    """Build a RunConfig from an optional file and ``key=value`` overrides."""
    values = {}
    if path:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_assignments(fh.read().splitlines()))
    values.update(parse_assignments(overrides))
    return replace(RunConfig(), **values)


def dump_config(cfg):
    lines = []
    for k, v in cfg.to_dict().items():
        if isinstance(v, list):
            v = ",".join(f"{x:g}" for x in v)
        lines.append(f"{k} = {v}")
    return "\n".join(lines) + "\n"
