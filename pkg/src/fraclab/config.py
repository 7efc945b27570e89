"""JSON run configuration: one file with a block per subsystem.

Every block is a dataclass; unknown keys and out-of-range values raise
``ConfigError``.  Subcommands read only the blocks they need.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import asdict, dataclass, field, fields

from .errors import ConfigError
from .lemmas import CASES
from .operator import BCS, MAX_NODES
from .manifold import WARPING_KINDS
from .solver import FORMS


def _num(name, value, lo=None, hi=None, lo_open=False, integer=False, allow_none=False):
    if value is None:
        if allow_none:
            return
        raise ConfigError(f"{name} is required")
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(f"{name} must be finite")
    if integer and int(value) != value:
        raise ConfigError(f"{name} must be an integer, got {value}")
    if lo is not None and (value <= lo if lo_open else value < lo):
        raise ConfigError(f"{name} must be {'>' if lo_open else '>='} {lo}, got {value}")
    if hi is not None and value > hi:
        raise ConfigError(f"{name} must be <= {hi}, got {value}")


def _num_list(name, values, lo=0.0, lo_open=True, min_len=1):
    if not isinstance(values, list) or len(values) < min_len:
        raise ConfigError(f"{name} must be a list of at least {min_len} numbers")
    for i, v in enumerate(values):
        _num(f"{name}[{i}]", v, lo=lo, lo_open=lo_open)


def _build(cls, data, path):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"'{path}' must be a JSON object")
    known = {f.name for f in fields(cls)}
    extra = sorted(set(data) - known)
    if extra:
        raise ConfigError(f"unknown key(s) in '{path}': {', '.join(extra)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise ConfigError(f"'{path}': {exc}") from exc


@dataclass
class ManifoldConfig:
    n: int = 2
    warping: dict = field(default_factory=lambda: {"kind": "flat"})
    r_max: float = 60.0
    nodes: int = 512
    core_spacing: float | None = None

    def __post_init__(self):
        _num("manifold.n", self.n, lo=1, hi=8, integer=True)
        _num("manifold.r_max", self.r_max, lo=0, lo_open=True)
        _num("manifold.nodes", self.nodes, lo=64, hi=MAX_NODES, integer=True)
        _num("manifold.core_spacing", self.core_spacing, lo=0, lo_open=True, allow_none=True)
        if not isinstance(self.warping, dict) or self.warping.get("kind", "flat") not in WARPING_KINDS:
            raise ConfigError(f"manifold.warping.kind must be one of {WARPING_KINDS}")
        if self.warping.get("kind") == "log-blend":
            _num("manifold.warping.c", self.warping.get("c", 0.5), lo=0, lo_open=True, hi=1)
        self.n, self.nodes = int(self.n), int(self.nodes)


@dataclass
class QuadratureConfig:
    panels: int = 200
    points_per_panel: int = 4
    rule: str = "gauss-legendre-log"
    s_min: float | None = None
    s_max: float | None = None

    def __post_init__(self):
        _num("operator.quadrature.panels", self.panels, lo=16, integer=True)
        _num("operator.quadrature.points_per_panel", self.points_per_panel, lo=1, hi=64, integer=True)
        _num("operator.quadrature.s_min", self.s_min, lo=0, lo_open=True, allow_none=True)
        _num("operator.quadrature.s_max", self.s_max, lo=0, lo_open=True, allow_none=True)
        if self.rule not in ("gauss-legendre-log", "trapezoid-log"):
            raise ConfigError(f"operator.quadrature.rule {self.rule!r} is unknown")


@dataclass
class OperatorConfig:
    bc: str = "dirichlet-outer"
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)

    def __post_init__(self):
        if self.bc not in BCS:
            raise ConfigError(f"operator.bc must be one of {BCS}, got {self.bc!r}")
        if isinstance(self.quadrature, dict) or self.quadrature is None:
            self.quadrature = _build(QuadratureConfig, self.quadrature, "operator.quadrature")


@dataclass
class WeightConfig:
    alpha: float = 1.0
    N: float | str = "auto"
    t_values: list = field(default_factory=lambda: [0.25, 1.0, 4.0, 16.0])
    spread_tol: float = 3.0
    interior: float = 0.9
    gold_tol: float = 1e-3
    gold_interior: float = 0.5
    gold_t_values: list | None = None
    refine_check: bool = False
    refine_tol: float = 0.1

    def __post_init__(self):
        _num("weight.alpha", self.alpha, lo=0, lo_open=True, hi=2)
        if self.N != "auto":
            _num("weight.N", self.N, lo=0, lo_open=True)
        _num_list("weight.t_values", self.t_values)
        _num("weight.spread_tol", self.spread_tol, lo=1)
        _num("weight.interior", self.interior, lo=0, lo_open=True, hi=1)
        _num("weight.gold_tol", self.gold_tol, lo=0, lo_open=True)
        _num("weight.gold_interior", self.gold_interior, lo=0, lo_open=True, hi=1)
        if self.gold_t_values is not None:
            _num_list("weight.gold_t_values", self.gold_t_values)
        _num("weight.refine_tol", self.refine_tol, lo=0, lo_open=True)
        if not isinstance(self.refine_check, bool):
            raise ConfigError("weight.refine_check must be true or false")


@dataclass
class NonlinearityConfig:
    p: float = 1.25
    form: str = "forcing"

    def __post_init__(self):
        _num("nonlinearity.p", self.p, lo=1, lo_open=True)
        if self.form not in FORMS:
            raise ConfigError(f"nonlinearity.form must be one of {FORMS}, got {self.form!r}")


@dataclass
class ThresholdConfig:
    blowup_factor: float = 1e8
    sample_dt: float = 0.05
    growth_sample: float = 1.05
    nl_cfl: float = 0.1
    max_steps: int = 2_000_000
    enforce_preconditions: bool = True

    def __post_init__(self):
        _num("simulation.thresholds.blowup_factor", self.blowup_factor, lo=1, lo_open=True)
        _num("simulation.thresholds.sample_dt", self.sample_dt, lo=0, lo_open=True)
        _num("simulation.thresholds.growth_sample", self.growth_sample, lo=1, lo_open=True)
        _num("simulation.thresholds.nl_cfl", self.nl_cfl, lo=0, lo_open=True, hi=0.1)
        _num("simulation.thresholds.max_steps", self.max_steps, lo=1, integer=True)
        if not isinstance(self.enforce_preconditions, bool):
            raise ConfigError("simulation.thresholds.enforce_preconditions must be true or false")


@dataclass
class SimulationConfig:
    dt: float = 0.01
    t_end: float = 50.0
    rho: float = 1.0
    amplitude: float | None = None
    mass: float | None = None
    f1_amplitude: float = 0.0
    f1_rho: float | None = None
    thresholds: ThresholdConfig = field(default_factory=ThresholdConfig)

    def __post_init__(self):
        _num("simulation.dt", self.dt, lo=0, lo_open=True)
        _num("simulation.t_end", self.t_end, lo=0, lo_open=True)
        _num("simulation.rho", self.rho, lo=0, lo_open=True)
        _num("simulation.amplitude", self.amplitude, allow_none=True)
        _num("simulation.mass", self.mass, allow_none=True)
        _num("simulation.f1_amplitude", self.f1_amplitude)
        _num("simulation.f1_rho", self.f1_rho, lo=0, lo_open=True, allow_none=True)
        if self.amplitude is None and self.mass is None:
            self.mass = 1.0
        elif self.amplitude is not None and self.mass is not None:
            raise ConfigError("simulation takes only one of amplitude and mass")
        if isinstance(self.thresholds, dict) or self.thresholds is None:
            self.thresholds = _build(ThresholdConfig, self.thresholds, "simulation.thresholds")


@dataclass
class LemmaCase:
    case: str
    gamma: float
    scales: list
    alpha: float = 1.0

    def __post_init__(self):
        if self.case not in CASES:
            raise ConfigError(f"lemmas.cases: unknown case {self.case!r}; expected one of {CASES}")
        _num("lemmas.cases.gamma", self.gamma, lo=0)
        _num("lemmas.cases.alpha", self.alpha, lo=0, lo_open=True)
        _num_list("lemmas.cases.scales", self.scales, min_len=5)


@dataclass
class LemmaConfig:
    cases: list | None = None
    tol: float = 0.05
    spot_tol: float = 1e-3

    def __post_init__(self):
        _num("lemmas.tol", self.tol, lo=0, lo_open=True)
        _num("lemmas.spot_tol", self.spot_tol, lo=0, lo_open=True)
        if self.cases is not None:
            if not isinstance(self.cases, list) or not self.cases:
                raise ConfigError("lemmas.cases must be a non-empty list")
            self.cases = [c if isinstance(c, LemmaCase) else _build(LemmaCase, c, "lemmas.cases")
                          for c in self.cases]


@dataclass
class LifespanConfig:
    N: float = 4.0
    phi0: float = 1.0
    C: float | None = None
    sweep_phi0: list = field(default_factory=lambda: [0.25 * 2.0**k for k in range(10)])
    tol: float = 0.01

    def __post_init__(self):
        _num("lifespan.N", self.N, lo=0, lo_open=True)
        _num("lifespan.phi0", self.phi0, lo=0, lo_open=True)
        _num("lifespan.C", self.C, lo=0, lo_open=True, allow_none=True)
        _num_list("lifespan.sweep_phi0", self.sweep_phi0, min_len=2)
        _num("lifespan.tol", self.tol, lo=0, lo_open=True)


SWEEP_COMMANDS = ("check-manifold", "verify-lemmas", "verify-weight", "simulate", "lifespan")


@dataclass
class SweepConfig:
    command: str = "simulate"
    grid: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in SWEEP_COMMANDS:
            raise ConfigError(f"sweep.command must be one of {SWEEP_COMMANDS}")
        if not isinstance(self.grid, dict):
            raise ConfigError("sweep.grid must map dotted keys to value lists")
        for key, vals in self.grid.items():
            if "." not in key or key.split(".")[0] not in _BLOCKS or key.startswith("sweep."):
                raise ConfigError(f"sweep.grid key {key!r} must be 'block.field'")
            if not isinstance(vals, list) or not vals:
                raise ConfigError(f"sweep.grid[{key!r}] must be a non-empty list")


_BLOCKS = {
    "manifold": ManifoldConfig,
    "operator": OperatorConfig,
    "weight": WeightConfig,
    "nonlinearity": NonlinearityConfig,
    "simulation": SimulationConfig,
    "lemmas": LemmaConfig,
    "lifespan": LifespanConfig,
    "sweep": SweepConfig,
}


@dataclass
class RunConfig:
    manifold: ManifoldConfig = field(default_factory=ManifoldConfig)
    operator: OperatorConfig = field(default_factory=OperatorConfig)
    weight: WeightConfig = field(default_factory=WeightConfig)
    nonlinearity: NonlinearityConfig = field(default_factory=NonlinearityConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    lemmas: LemmaConfig = field(default_factory=LemmaConfig)
    lifespan: LifespanConfig = field(default_factory=LifespanConfig)
    sweep: SweepConfig = field(default_factory=SweepConfig)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("config root must be a JSON object")
        extra = sorted(set(data) - set(_BLOCKS))
        if extra:
            raise ConfigError(f"unknown config block(s): {', '.join(extra)}")
        return cls(**{k: _build(c, data.get(k), k) for k, c in _BLOCKS.items()})

    def to_dict(self):
        return asdict(self)


def load_config(path):
    """Parse and validate a UTF-8 JSON config file."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
    return RunConfig.from_dict(data)


def with_overrides(data, overrides):
    """Copy of the raw config dict with dotted-key values replaced."""
    out = copy.deepcopy(data)
    for key, value in overrides.items():
        block, _, name = key.partition(".")
        node = out.setdefault(block, {})
        parts = name.split(".")
        for part in parts[:-1]:
            node = node.setdefault(part, {})
        node[parts[-1]] = value
    return out
