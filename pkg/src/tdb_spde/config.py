"""Benchmark case configuration: dataclass, presets, and the INI-style file format.

A config file is flat ``key = value`` pairs grouped under the section headers
``[case]``, ``[discretization]``, ``[stochastic]``, ``[physics]`` and
``[run]``. Section placement is cosmetic: keys are looked up by name.
Lists (``r``, ``methods``) are comma separated.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

CASES = {
    "linadv-dirichlet": "1D linear advection-diffusion, stochastic Dirichlet inflow at x=0",
    "linadv-neumann": "1D linear advection-diffusion, stochastic Neumann inflow at x=0",
    "linadv-robin": "1D linear advection-diffusion, stochastic Robin inflow at x=0",
    "burgers-dirichlet": "1D viscous Burgers, stochastic Dirichlet inflow at x=0",
    "conv2d-linear": "2D forced convection, constant conductivity, stochastic bottom wall",
    "conv2d-nonlinear": "2D forced convection, temperature-dependent conductivity",
}
METHODS = ("dbo", "do", "pcm")
SECTIONS = ("case", "discretization", "stochastic", "physics", "run")


@dataclass
class CaseConfig:
    case: str
    # discretization
    n: int = 129
    n1: int = 33
    n2: int = 33
    dt: float = 5e-4
    t_final: float = 1.0
    t_switch: float = 0.0
    # stochastic
    d: int = 2
    sampling: str = "tensor"
    q: int = 4
    s: int = 64
    seed: int = 0
    # physics
    nu: float = 0.05
    c: float = 1.0
    a: float = 1.0
    b: float = 0.0
    reynolds: float = 3000.0
    prandtl: float = 1.0 / 300.0
    alpha: float = 1.0
    beta: float = 0.9
    sigma_t: float = 1.0
    sigma_x: float = 1.0
    l_t: float = 1.0
    l_x: float = 1.0
    bc_mean_amp: float = 0.5
    ic_mean_amp: float = 0.5
    velocity_file: str | None = None
    kl_points: int = 512
    kl_evaluation: str = "grid"
    # run
    r: list[int] = field(default_factory=lambda: [3])
    methods: list[str] = field(default_factory=lambda: ["dbo", "do", "pcm"])
    stride: int = 100
    out: str | None = None

    @property
    def is_2d(self) -> bool:
        return self.case.startswith("conv2d")

    @property
    def sample_count(self) -> int:
        return self.q**self.d if self.sampling == "tensor" else self.s

    @property
    def grid_points(self) -> int:
        return self.n1 * self.n2 if self.is_2d else self.n


# physics defaults per case (desk scale)
CASE_DEFAULTS = {
    "linadv-dirichlet": dict(a=1.0, b=0.0, sigma_t=1.0, sigma_x=1.0, l_t=1.0, l_x=1.0,
                             bc_mean_amp=0.5, ic_mean_amp=0.5, n=65, d=2, q=4, r=[3]),
    "linadv-neumann": dict(a=0.0, b=1.0, sigma_t=0.1, sigma_x=0.5, l_t=1.0, l_x=1.0,
                           bc_mean_amp=1.0, ic_mean_amp=1.0, n=65, d=2, q=4, r=[3]),
    "linadv-robin": dict(a=0.1, b=1.0, sigma_t=-0.1, sigma_x=0.01, l_t=1.0, l_x=1.0,
                         bc_mean_amp=1.0, ic_mean_amp=1.0, n=65, d=2, q=4, r=[3]),
    "burgers-dirichlet": dict(a=1.0, b=0.0, nu=0.05, sigma_t=0.01, sigma_x=0.005, l_t=3.0,
                              l_x=3.0, bc_mean_amp=1.0, ic_mean_amp=1.0, n=65, d=2, q=4,
                              dt=2.5e-4, t_switch=0.3, t_final=1.0, r=[3]),
    "conv2d-linear": dict(a=1.0, b=0.0, sigma_x=0.05, n1=33, n2=33, d=2, q=3, r=[3],
                          t_switch=1.0, t_final=2.0, bc_mean_amp=1.0, beta=0.0),
    "conv2d-nonlinear": dict(a=1.0, b=0.0, sigma_x=0.5, n1=33, n2=33, d=2, q=3, r=[3],
                             t_switch=1.0, t_final=2.0, bc_mean_amp=1.0, alpha=1.0, beta=0.9),
}

# large setups; sparse grids are replaced by Monte Carlo with the same sample count
LARGE_PRESETS = {
    "linadv-dirichlet": dict(n=405, d=8, sampling="mc", s=333, r=[5, 7, 9], t_final=5.0),
    "linadv-neumann": dict(n=405, d=8, sampling="mc", s=333, r=[5, 7, 9], t_final=5.0),
    "linadv-robin": dict(n=405, d=8, sampling="mc", s=333, r=[5, 7, 9], t_final=5.0),
    "burgers-dirichlet": dict(n=405, d=4, sampling="tensor", q=4, r=[4, 6, 8], dt=2.5e-4,
                              t_switch=0.3, t_final=5.0),
    "conv2d-linear": dict(n1=205, n2=125, d=6, sampling="tensor", q=3, r=[3, 5, 7],
                          t_switch=1.0, t_final=11.0),
    "conv2d-nonlinear": dict(n1=205, n2=125, d=6, sampling="tensor", q=3, r=[5, 7, 9],
                             t_switch=1.0, t_final=11.0),
}


def _coerce(name: str, raw: str):
    ftype = {f.name: f.type for f in dataclasses.fields(CaseConfig)}[name]
    raw = raw.strip()
    try:
        if name in ("r",):
            return [int(v) for v in raw.replace(" ", "").split(",") if v]
        if name == "methods":
            return [v.strip().lower() for v in raw.split(",") if v.strip()]
        if "int" in ftype and "list" not in ftype:
            return int(raw)
        if "float" in ftype:
            return float(raw)
        if name in ("out", "velocity_file") and raw.lower() in ("", "none"):
            return None
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {name!r}: {raw!r}") from exc


def make_config(case: str, preset: str = "desk", **overrides) -> CaseConfig:
    """Case defaults, then the preset, then explicit overrides."""
    if case not in CASES:
        raise ConfigError(f"unknown case {case!r}; known: {', '.join(CASES)}")
    values = dict(CASE_DEFAULTS[case])
    if preset == "paper":
        values.update(LARGE_PRESETS[case])
    elif preset != "desk":
        raise ConfigError(f"unknown preset {preset!r} (desk or paper)")
    values.update(overrides)
    names = {f.name for f in dataclasses.fields(CaseConfig)}
    unknown = set(values) - names
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return CaseConfig(case=case, **values)


def read_config(path, preset: str = "desk") -> CaseConfig:
    """Parse a config file into a validated :class:`CaseConfig`.

    With ``preset="paper"`` the size keys of the large preset win over the
    file; every other key is taken from the file.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    parser.read_string(text)
    bad = [s for s in parser.sections() if s not in SECTIONS]
    if bad:
        raise ConfigError(f"unknown sections {bad}; allowed: {list(SECTIONS)}")
    values = {}
    names = {f.name for f in dataclasses.fields(CaseConfig)}
    for section in parser.sections():
        for key, raw in parser.items(section):
            if key not in names:
                raise ConfigError(f"unknown key {key!r} in [{section}]")
            values[key] = raw
    if "case" not in values:
        raise ConfigError("config must set 'case'")
    case = values.pop("case").strip()
    overrides = {k: _coerce(k, v) for k, v in values.items()}
    if preset == "paper" and case in LARGE_PRESETS:
        # the large preset fixes problem size; the file still sets physics
        for key in LARGE_PRESETS[case]:
            overrides.pop(key, None)
    cfg = make_config(case, preset, **overrides)
    validate_config(cfg)
    return cfg


def validate_config(cfg: CaseConfig) -> CaseConfig:
    """Raise :class:`ConfigError` naming the first violated constraint."""
    if cfg.case not in CASES:
        raise ConfigError(f"unknown case {cfg.case!r}")
    for name in ("dt", "t_final", "nu", "reynolds", "prandtl", "l_t", "l_x"):
        if not getattr(cfg, name) > 0:
            raise ConfigError(f"{name} must be positive, got {getattr(cfg, name)}")
    for name in ("n", "n1", "n2", "d", "q", "s", "stride"):
        if getattr(cfg, name) < 1:
            raise ConfigError(f"{name} must be positive, got {getattr(cfg, name)}")
    if not 0 <= cfg.t_switch < cfg.t_final:
        raise ConfigError(f"need 0 <= t_switch < t_final, got {cfg.t_switch}, {cfg.t_final}")
    if cfg.sampling not in ("tensor", "mc"):
        raise ConfigError(f"sampling must be 'tensor' or 'mc', got {cfg.sampling!r}")
    if cfg.kl_evaluation not in ("grid", "nystrom"):
        raise ConfigError(f"kl_evaluation must be 'grid' or 'nystrom', got {cfg.kl_evaluation!r}")
    if cfg.kl_points < 3:
        raise ConfigError(f"kl_points must be at least 3, got {cfg.kl_points}")
    if not cfg.methods:
        raise ConfigError("methods must be nonempty")
    bad = [m for m in cfg.methods if m not in METHODS]
    if bad:
        raise ConfigError(f"unknown methods {bad}; allowed {list(METHODS)}")
    if "pcm" not in cfg.methods:
        cfg.methods = list(cfg.methods) + ["pcm"]
    if not cfg.r:
        raise ConfigError("r must list at least one rank")
    limit = min(cfg.grid_points, cfg.sample_count)
    for r in cfg.r:
        if not 1 <= r <= limit:
            raise ConfigError(f"rank r={r} violates 1 <= r <= min(n, s) = {limit}")
    if cfg.a == 0 and cfg.b == 0:
        raise ConfigError("boundary coefficients a and b cannot both be zero")
    return cfg
