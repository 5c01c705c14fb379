"""Analytical multi-fidelity benchmarks with synthetic evaluation noise.

Each problem of ``PROBLEMS`` provides three fidelity functions on a
box domain. A :class:`FidelityStack` selects N of them (N=1: f1; N=2: f1 and the
lowest table level; N=3: f1, f2, f3), adds zero-mean noise with
``sigma_l = fraction_l * R1`` and maps between the normalized unit hypercube and the
physical box. Noise draws come from a counter-based generator keyed by
``(seed, level, eval_index)``, so every evaluation is reproducible on its own.
"""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np
from scipy.stats import qmc

from mfsrbf.config import NoiseConfig
from mfsrbf.constants import (
    DEFAULT_COSTS,
    NOISE_FRACTIONS,
    PROBLEMS,
    R1_GRID_POINTS_1D,
    R1_SOBOL_LOG2,
)
from mfsrbf.errors import InvalidArgumentError

logger = logging.getLogger(__name__)


class Objective(Protocol):
    """What the campaign loop needs from an N-level objective."""

    dim: int
    n_levels: int
    costs: tuple

    def to_physical(self, x): ...

    def evaluate(self, level, x, eval_index): ...

    def true_high_fidelity(self, x): ...


# --- Table functions (vectorized over rows of X, physical coordinates) ---

def _forrester(X, table_level):
    x = X[:, 0]
    f1 = (6.0 * x - 2.0) ** 2 * np.sin(12.0 * x - 4.0)
    if table_level == 1:
        return f1
    if table_level == 2:
        return 0.75 * f1 + 5.0 * (x - 0.5) - 2.0
    return 0.5 * f1 + 10.0 * (x - 0.5) - 5.0


def _griewank(X, table_level):
    j = np.arange(1, X.shape[1] + 1)
    if table_level == 1:
        return np.sum(X**2, axis=1) / 25.0 - np.prod(np.cos(X / np.sqrt(j)), axis=1) + 1.0
    if table_level == 2:
        return -np.prod(np.cos(X / np.sqrt(j)), axis=1) + 1.0
    return np.sum(X**2, axis=1) / 20.0 - np.prod(np.cos(X / np.sqrt(j + 1)), axis=1) - 1.0


def _rosenbrock(X, table_level):
    head, tail = X[:, :-1], X[:, 1:]
    f1 = np.sum(100.0 * (tail - head**2) ** 2 + (1.0 - head) ** 2, axis=1)
    if table_level == 1:
        return f1
    if table_level == 2:
        return np.sum(50.0 * (tail - head**2) ** 2 + (-2.0 - head) ** 2, axis=1) - np.sum(0.5 * X, axis=1)
    return (f1 - 4.0 - np.sum(0.5 * X, axis=1)) / (10.0 + np.sum(0.25 * X, axis=1))


def resolution_error(Z, phi):
    """e_r(z, phi) = sum_j a cos^2(omega z_j + b + pi)."""
    theta = 1.0 - 0.0001 * phi
    a, omega, b = theta, 10.0 * np.pi * theta, 0.5 * np.pi * theta
    return np.sum(a * np.cos(omega * Z + b + np.pi) ** 2, axis=1)


def _rastrigin(X, table_level):
    info = PROBLEMS["P4"]
    Z = (X - info["shift"]) @ rotation_matrix(X.shape[1], info["theta"]).T
    f1 = np.sum(Z**2 + 1.0 - np.cos(10.0 * np.pi * Z), axis=1)
    if table_level == 1:
        return f1
    return f1 + resolution_error(Z, info["phi"][table_level - 1])


_TABLE_FUNCTIONS = {"P1": _forrester, "P2": _griewank, "P3": _rosenbrock, "P4": _rastrigin}


def table_function(problem, table_level, X):
    return _TABLE_FUNCTIONS[problem](np.atleast_2d(np.asarray(X, dtype=float)), table_level)


def table_levels(problem, n_levels):
    """Table rows used by an N-level stack, highest fidelity first."""
    max_levels = PROBLEMS[problem]["max_levels"]
    if not 1 <= n_levels <= max_levels:
        raise InvalidArgumentError(f"{problem} supports 1..{max_levels} levels, got {n_levels}")
    if n_levels == 2:
        return (1, 3)
    return tuple(range(1, n_levels + 1))


# --- Designs and geometry ---

def initial_design(dim):
    """Face-centred composite design without factorial points (2D+1 points)."""
    if dim < 1:
        raise InvalidArgumentError("dimension must be >= 1")
    design = [np.full(dim, 0.5)]
    for d in range(dim):
        for face in (0.0, 1.0):
            point = np.full(dim, 0.5)
            point[d] = face
            design.append(point)
    return np.array(design)


def rotation_matrix(dim, theta=0.2):
    """Givens rotations by theta in planes (1,2), (2,3), ..., applied in that order."""
    R = np.eye(dim)
    c, s = math.cos(theta), math.sin(theta)
    for i in range(dim - 1):
        G = np.eye(dim)
        G[i, i], G[i, i + 1] = c, -s
        G[i + 1, i], G[i + 1, i + 1] = s, c
        R = G @ R
    return R


def default_costs(n_levels):
    if n_levels not in DEFAULT_COSTS:
        raise InvalidArgumentError(f"no default cost ratios for N={n_levels}; pass beta explicitly")
    return DEFAULT_COSTS[n_levels]


def dense_range(func, lower, upper, dim, extra_points=None):
    """max - min of ``func`` over a deterministic dense sample of the box."""
    if dim == 1:
        U = np.linspace(0.0, 1.0, R1_GRID_POINTS_1D).reshape(-1, 1)
    else:
        U = qmc.Sobol(d=dim, scramble=False).random_base2(m=R1_SOBOL_LOG2)
    X = lower + (upper - lower) * U
    if extra_points is not None:
        X = np.vstack([X, np.atleast_2d(extra_points)])
    values = func(X)
    return float(np.max(values) - np.min(values))


@functools.lru_cache(maxsize=None)
def _raw_range(problem, dim):
    info = PROBLEMS[problem]
    x_check = np.full(dim, info["x_check"])
    return dense_range(lambda X: table_function(problem, 1, X), info["lower"], info["upper"], dim, x_check)


def list_problems():
    return [
        {
            "id": pid,
            "name": info["name"],
            "dims": info["dims"],
            "levels": tuple(range(1, info["max_levels"] + 1)),
            "domain": (info["lower"], info["upper"]),
        }
        for pid, info in PROBLEMS.items()
    ]


# --- Noise ---

@dataclass(frozen=True)
class NoiseModel:
    sigmas: tuple
    r1_noise: float
    seed: int = 0
    distribution: str = "normal"

    def draw(self, level, eval_index):
        sigma = self.sigmas[level - 1]
        if sigma == 0.0:
            return 0.0
        counter = (int(eval_index) << 64) | (int(level) << 128)
        rng = np.random.Generator(np.random.Philox(key=self.seed, counter=counter))
        if self.distribution == "uniform":
            return sigma * math.sqrt(3.0) * float(rng.uniform(-1.0, 1.0))
        return sigma * float(rng.standard_normal())


# --- Stack ---

@dataclass(frozen=True, eq=False)
class FidelityStack:
    """An N-level noisy analytical objective."""

    problem: str
    dim: int
    n_levels: int
    seed: int = 0
    costs: Optional[tuple] = None
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    table_levels: tuple = field(init=False, repr=False)
    noise_model: NoiseModel = field(init=False, repr=False)

    def __post_init__(self):
        if self.problem not in PROBLEMS:
            raise InvalidArgumentError(f"unknown problem {self.problem!r}")
        info = PROBLEMS[self.problem]
        if self.dim not in info["dims"]:
            raise InvalidArgumentError(f"{self.problem} supports D in {info['dims']}, got {self.dim}")
        if self.seed < 0:
            raise InvalidArgumentError("seed must be >= 0")
        levels = table_levels(self.problem, self.n_levels)
        costs = default_costs(self.n_levels) if self.costs is None else tuple(float(c) for c in self.costs)
        if len(costs) != self.n_levels:
            raise InvalidArgumentError(f"{len(costs)} cost ratios for {self.n_levels} levels")
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "table_levels", levels)

        divisor = self.noise.r1_divisor if self.noise.r1_divisor is not None else info["r1_divisor"]
        r1 = _raw_range(self.problem, self.dim) / divisor
        if self.noise.fractions is None:
            fractions = tuple(NOISE_FRACTIONS[t - 1] for t in levels)
        else:
            fractions = self.noise.fractions
            if len(fractions) != self.n_levels:
                raise InvalidArgumentError(f"{len(fractions)} noise fractions for {self.n_levels} levels")
        sigmas = [f * r1 for f in fractions]
        if self.problem == "P4" and self.noise.p4_noiseless_hf:
            sigmas[0] = 0.0
        object.__setattr__(
            self, "noise_model", NoiseModel(tuple(sigmas), r1, self.seed, self.noise.distribution)
        )
        logger.debug("%s D=%d N=%d sigmas=%s", self.problem, self.dim, self.n_levels, sigmas)

    @property
    def lower(self):
        return np.full(self.dim, PROBLEMS[self.problem]["lower"])

    @property
    def upper(self):
        return np.full(self.dim, PROBLEMS[self.problem]["upper"])

    @property
    def noise_sigmas(self):
        return self.noise_model.sigmas

    def to_physical(self, x):
        return self.lower + (self.upper - self.lower) * np.asarray(x, dtype=float)

    def to_normalized(self, x):
        return (np.asarray(x, dtype=float) - self.lower) / (self.upper - self.lower)

    def x_check(self):
        """Known optimum location, normalized."""
        return self.to_normalized(np.full(self.dim, PROBLEMS[self.problem]["x_check"]))

    def f_check(self):
        return PROBLEMS[self.problem]["f_check"]

    def _check_domain(self, x):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.dim,):
            raise InvalidArgumentError(f"expected {self.dim} coordinates, got {x.shape[0]}")
        slack = 1e-12 * (self.upper - self.lower)
        if np.any(x < self.lower - slack) or np.any(x > self.upper + slack):
            raise InvalidArgumentError(f"x={x.tolist()} outside the {self.problem} domain")
        return x

    def true_level(self, level, X):
        """Noiseless f_l over the rows of X (physical)."""
        if not 1 <= level <= self.n_levels:
            raise InvalidArgumentError(f"level {level} outside 1..{self.n_levels}")
        return table_function(self.problem, self.table_levels[level - 1], X)

    def evaluate(self, level, x, eval_index):
        """s_l(x) = f_l(x) + noise drawn under key (seed, level, eval_index)."""
        x = self._check_domain(x)
        return float(self.true_level(level, x[None, :])[0]) + self.noise_model.draw(level, eval_index)

    def true_high_fidelity(self, x):
        x = self._check_domain(x)
        return float(self.true_level(1, x[None, :])[0])


def function_range_r1(stack: FidelityStack):
    """R1 used for the noise levels (already divided by the problem's divisor)."""
    return stack.noise_model.r1_noise
