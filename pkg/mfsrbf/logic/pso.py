"""Deterministic particle swarm optimization on the unit hypercube.

Synchronous constriction-factor PSO without random multipliers:

    v <- chi * (v + c1 (p - x) + c2 (g - x))
    x <- x + v

Particles start on a Hammersley set with zero velocity. Components leaving the box
are clamped to it and their velocity is zeroed. The whole swarm is evaluated with one
call per iteration, so the objective receives an ``(n, D)`` array.
"""

from __future__ import annotations

import logging
from typing import NamedTuple, Optional

import numpy as np

from mfsrbf.config import PsoConfig
from mfsrbf.errors import InvalidArgumentError, OptimizationError

logger = logging.getLogger(__name__)


class PsoResult(NamedTuple):
    x_best: np.ndarray
    f_best: float
    history: np.ndarray  # running best after initialization and after each iteration
    n_nonfinite: int


def _primes(count):
    primes = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def radical_inverse(i, base):
    inv, f = 0.0, 1.0 / base
    while i > 0:
        i, digit = divmod(i, base)
        inv += digit * f
        f /= base
    return inv


def hammersley(n, dim):
    """n Hammersley points in [0,1]^dim.

    Point i has first coordinate (i + 0.5) / n; coordinate k >= 2 is the radical
    inverse of i + 1 in the (k-1)-th prime.
    """
    if n < 1 or dim < 1:
        raise InvalidArgumentError("need n >= 1 and dim >= 1")
    pts = np.empty((n, dim))
    pts[:, 0] = (np.arange(n) + 0.5) / n
    for k, base in enumerate(_primes(dim - 1), start=1):
        pts[:, k] = [radical_inverse(i + 1, base) for i in range(n)]
    return pts


def init_swarm(dim, config: Optional[PsoConfig] = None):
    """``(positions, velocities)`` for the configured swarm size."""
    config = config or PsoConfig()
    n = config.swarm_size(dim)
    return hammersley(n, dim), np.zeros((n, dim))


def _evaluate(objective, X):
    values = np.asarray(objective(X), dtype=float).reshape(-1)
    if values.shape != (len(X),):
        raise InvalidArgumentError(f"objective returned {values.shape[0]} values for {len(X)} positions")
    bad = ~np.isfinite(values)
    values = np.where(bad, np.inf, values)
    return values, int(bad.sum())


def minimize(objective, dim, config: Optional[PsoConfig] = None) -> PsoResult:
    """Minimize a vectorized objective over [0,1]^dim."""
    config = config or PsoConfig()
    x, v = init_swarm(dim, config)
    f, n_bad = _evaluate(objective, x)
    p, f_p = x.copy(), f.copy()
    i_best = int(np.argmin(f_p))  # first index wins ties
    g, f_g = p[i_best].copy(), f_p[i_best]
    history = [f_g]

    for _ in range(config.n_iterations):
        v = config.chi * (v + config.c_cognitive * (p - x) + config.c_social * (g - x))
        x = x + v
        out = (x < 0.0) | (x > 1.0)
        x = np.clip(x, 0.0, 1.0)
        v[out] = 0.0

        f, bad = _evaluate(objective, x)
        n_bad += bad
        improved = f < f_p
        p[improved] = x[improved]
        f_p[improved] = f[improved]
        i_best = int(np.argmin(f_p))
        if f_p[i_best] < f_g:
            g, f_g = p[i_best].copy(), f_p[i_best]
        history.append(f_g)

    if not np.isfinite(f_g):
        raise OptimizationError("every objective evaluation was non-finite")
    if n_bad:
        logger.warning("%d non-finite objective values treated as +inf", n_bad)
    return PsoResult(g, float(f_g), np.array(history), n_bad)
