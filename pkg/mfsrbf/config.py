"""Configuration dataclasses and the JSON config loader.

Every default comes from :mod:`mfsrbf.constants`. Each dataclass validates itself in
``__post_init__`` and raises :class:`~mfsrbf.errors.ConfigError` naming the field;
:func:`load_run_config` prefixes the section so the message carries the full dotted key.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from typing import Any, Optional

from mfsrbf.constants import (
    BASE_SEED,
    BUDGET_BASE,
    BUDGET_PER_DIM,
    D0,
    DEFAULT_COSTS,
    DUPLICATE_TOL,
    EPS_PEN,
    FINAL_OPTIMUM_MODES,
    K_MIN,
    KMEANS_MAX_ITER,
    KMEANS_TOL,
    KSTAR_WINDOW,
    LCB_W_F,
    LCB_W_U,
    LSTSQ_CUTOFF,
    N_TAU,
    N_TAU_LOOCV,
    NOISE_DISTRIBUTIONS,
    OUTPUT_DIRECTORY,
    PROBLEMS,
    PSO_C_COGNITIVE,
    PSO_C_SOCIAL,
    PSO_CHI,
    PSO_ITERATIONS,
    PSO_PARTICLES_PER_DIM,
    REPETITIONS,
    STAGNATION_PATIENCE,
)
from mfsrbf.errors import ConfigError


@dataclass(frozen=True)
class SrbfConfig:
    n_tau: int = N_TAU
    n_tau_loocv: int = N_TAU_LOOCV
    k_min: int = K_MIN
    kstar_window: int = KSTAR_WINDOW
    duplicate_tol: float = DUPLICATE_TOL
    lstsq_cutoff: float = LSTSQ_CUTOFF
    kmeans_max_iter: int = KMEANS_MAX_ITER
    kmeans_tol: float = KMEANS_TOL
    seed: int = 0

    def __post_init__(self):
        if self.n_tau < 1:
            raise ConfigError("n_tau", "must be >= 1")
        if self.n_tau_loocv < 1:
            raise ConfigError("n_tau_loocv", "must be >= 1")
        if self.k_min < 1:
            raise ConfigError("k_min", "must be >= 1")
        if self.kstar_window < 0:
            raise ConfigError("kstar_window", "must be >= 0")
        if self.duplicate_tol < 0:
            raise ConfigError("duplicate_tol", "must be >= 0")
        if not 0 < self.lstsq_cutoff < 1:
            raise ConfigError("lstsq_cutoff", "must lie in (0, 1)")
        if self.kmeans_max_iter < 1:
            raise ConfigError("kmeans_max_iter", "must be >= 1")


@dataclass(frozen=True)
class AcquisitionConfig:
    d0: float = D0
    eps_pen: float = EPS_PEN
    w_f: float = LCB_W_F
    w_u: float = LCB_W_U

    def __post_init__(self):
        if self.d0 <= 0:
            raise ConfigError("d0", "must be > 0")
        if self.eps_pen <= 0:
            raise ConfigError("eps_pen", "must be > 0")
        if self.w_f < 0:
            raise ConfigError("w_f", "must be >= 0")
        if self.w_u < 0:
            raise ConfigError("w_u", "must be >= 0")


@dataclass(frozen=True)
class PsoConfig:
    n_particles: Optional[int] = None  # None -> PSO_PARTICLES_PER_DIM * D
    n_iterations: int = PSO_ITERATIONS
    chi: float = PSO_CHI
    c_cognitive: float = PSO_C_COGNITIVE
    c_social: float = PSO_C_SOCIAL

    def __post_init__(self):
        if self.n_particles is not None and self.n_particles < 2:
            raise ConfigError("n_particles", "must be >= 2")
        if self.n_iterations < 0:
            raise ConfigError("n_iterations", "must be >= 0")
        if not 0 < self.chi < 1:
            raise ConfigError("chi", "must lie in (0, 1)")
        if self.c_cognitive <= 0:
            raise ConfigError("c_cognitive", "must be > 0")
        if self.c_social <= 0:
            raise ConfigError("c_social", "must be > 0")

    def swarm_size(self, dim):
        return self.n_particles if self.n_particles is not None else max(2, PSO_PARTICLES_PER_DIM * dim)


@dataclass(frozen=True)
class NoiseConfig:
    fractions: Optional[tuple] = None  # sigma_l / R1 per level, None -> table defaults
    distribution: str = "normal"
    p4_noiseless_hf: bool = False
    r1_divisor: Optional[float] = None  # None -> problem table value

    def __post_init__(self):
        if self.fractions is not None:
            object.__setattr__(self, "fractions", tuple(float(f) for f in self.fractions))
            if any(f < 0 for f in self.fractions):
                raise ConfigError("fractions", "must be >= 0")
        if self.distribution not in NOISE_DISTRIBUTIONS:
            raise ConfigError("distribution", f"must be one of {NOISE_DISTRIBUTIONS}")
        if self.r1_divisor is not None and self.r1_divisor <= 0:
            raise ConfigError("r1_divisor", "must be > 0")


@dataclass(frozen=True)
class CampaignConfig:
    stagnation_patience: int = STAGNATION_PATIENCE
    final_optimum: str = "mean"

    def __post_init__(self):
        if self.stagnation_patience < 1:
            raise ConfigError("stagnation_patience", "must be >= 1")
        if self.final_optimum not in FINAL_OPTIMUM_MODES:
            raise ConfigError("final_optimum", f"must be one of {FINAL_OPTIMUM_MODES}")


@dataclass(frozen=True)
class ExternalConfig:
    command: tuple = ()
    dim: int = 1
    n_levels: int = 1
    lower: Optional[tuple] = None  # None -> 0 in every dimension
    upper: Optional[tuple] = None  # None -> 1 in every dimension
    x0: Optional[tuple] = None  # normalized baseline design, None -> domain centre

    def __post_init__(self):
        object.__setattr__(self, "command", tuple(str(c) for c in self.command))
        for name in ("lower", "upper", "x0"):
            value = getattr(self, name)
            if value is not None:
                value = tuple(float(v) for v in value)
                object.__setattr__(self, name, value)
                if len(value) != self.dim:
                    raise ConfigError(name, f"needs {self.dim} entries")
        if self.dim < 1:
            raise ConfigError("dim", "must be >= 1")
        if self.n_levels < 1:
            raise ConfigError("n_levels", "must be >= 1")


@dataclass(frozen=True)
class OutputConfig:
    directory: str = OUTPUT_DIRECTORY
    compressed_state: bool = False
    grid_resolution: Optional[int] = None

    def __post_init__(self):
        if self.grid_resolution is not None and self.grid_resolution < 2:
            raise ConfigError("grid_resolution", "must be >= 2")


@dataclass(frozen=True)
class RunConfig:
    problem: str = "P1"
    dim: Optional[int] = None
    n_levels: int = 1
    budget: Optional[float] = None  # None -> 40 + 5 D
    repetitions: int = REPETITIONS
    seed: int = BASE_SEED
    jobs: int = 1
    beta: Optional[tuple] = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    srbf: SrbfConfig = field(default_factory=SrbfConfig)
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    pso: PsoConfig = field(default_factory=PsoConfig)
    campaign: CampaignConfig = field(default_factory=CampaignConfig)
    output: OutputConfig = field(default_factory=OutputConfig)
    external: Optional[ExternalConfig] = None

    def __post_init__(self):
        if self.problem == "external":
            if self.external is None:
                raise ConfigError("external", "required when problem is 'external'")
            object.__setattr__(self, "dim", self.external.dim)
            object.__setattr__(self, "n_levels", self.external.n_levels)
        elif self.problem in PROBLEMS:
            info = PROBLEMS[self.problem]
            if self.dim is None:
                object.__setattr__(self, "dim", info["dims"][0])
            if self.dim not in info["dims"]:
                raise ConfigError("dim", f"{self.problem} supports D in {info['dims']}")
            if not 1 <= self.n_levels <= info["max_levels"]:
                raise ConfigError("n_levels", f"{self.problem} supports 1..{info['max_levels']} levels")
        else:
            raise ConfigError("problem", f"unknown problem {self.problem!r}")
        if self.budget is None:
            object.__setattr__(self, "budget", BUDGET_BASE + BUDGET_PER_DIM * self.dim)
        if self.budget <= 0:
            raise ConfigError("budget", "must be > 0")
        if self.repetitions < 1:
            raise ConfigError("repetitions", "must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs", "must be >= 1")
        if self.beta is not None:
            object.__setattr__(self, "beta", tuple(float(b) for b in self.beta))
            if len(self.beta) != self.n_levels:
                raise ConfigError("beta", f"needs {self.n_levels} entries")
        elif self.n_levels not in DEFAULT_COSTS:
            raise ConfigError("beta", f"required for {self.n_levels} levels (no default cost ratios)")

    def to_dict(self):
        return dataclasses.asdict(self)


_SECTIONS = {
    "noise": NoiseConfig,
    "srbf": SrbfConfig,
    "acquisition": AcquisitionConfig,
    "pso": PsoConfig,
    "campaign": CampaignConfig,
    "output": OutputConfig,
    "external": ExternalConfig,
}


def _build(cls, data, prefix):
    if not isinstance(data, dict):
        raise ConfigError(prefix or "<root>", "expected a JSON object")
    known = {f.name for f in dataclasses.fields(cls)}
    for key in data:
        if key not in known:
            raise ConfigError(f"{prefix}.{key}" if prefix else key, "unknown key")
    try:
        return cls(**data)
    except ConfigError as e:
        raise ConfigError(f"{prefix}.{e.key}" if prefix else e.key, str(e).split(": ", 1)[-1]) from None
    except TypeError as e:
        raise ConfigError(prefix or "<root>", str(e)) from None


def run_config_from_dict(data: dict[str, Any]) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    data = dict(data)
    for section, cls in _SECTIONS.items():
        if section in data and data[section] is not None:
            data[section] = _build(cls, data[section], section)
    return _build(RunConfig, data, "")


def load_run_config(path, **overrides) -> RunConfig:
    """Read a JSON config file; non-None keyword overrides replace top-level keys."""
    try:
        with open(path, "r") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError("<file>", f"invalid JSON in {path}: {e}") from None
    except OSError as e:
        raise ConfigError("<file>", f"cannot read {path}: {e}") from None
    if not isinstance(data, dict):
        raise ConfigError("<root>", "expected a JSON object")
    for key, value in overrides.items():
        if value is None:
            continue
        if key == "directory":
            data.setdefault("output", {})
            data["output"] = dict(data["output"], directory=value)
        else:
            data[key] = value
    return run_config_from_dict(data)


def write_run_config(config: RunConfig, path):
    d_name = os.path.dirname(path)
    if d_name:
        os.makedirs(d_name, exist_ok=True)
    with open(path, "w") as f:
        json.dump(config.to_dict(), f, indent=2, sort_keys=True)
        f.write("\n")
