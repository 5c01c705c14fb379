"""Campaign error metrics and repetition statistics.

All design-space distances are taken in the normalized unit hypercube and divided by
sqrt(D), so E_x and Delta_x lie in [0, 1].
"""

from __future__ import annotations

import logging
import math
from typing import NamedTuple, Optional

import numpy as np

from mfsrbf.errors import InvalidArgumentError
from mfsrbf.logic.benchmarks import initial_design

logger = logging.getLogger(__name__)


class ReferenceOptimum(NamedTuple):
    x_check: Optional[np.ndarray]  # normalized; None when unknown
    f_check: Optional[float]
    r1_metric: float


class BoxStats(NamedTuple):
    q1: float
    q2: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outliers: tuple
    n: int

    @property
    def iqr(self):
        return self.q3 - self.q1


def reference_optimum(stack):
    """Known optimum of an analytical stack; R1 is the range of noiseless f1 over the initial design."""
    design = initial_design(stack.dim)
    f1 = stack.true_level(1, stack.to_physical(design))
    return ReferenceOptimum(stack.x_check(), float(stack.f_check()), float(np.max(f1) - np.min(f1)))


def observed_reference(initial_values):
    """Reference for objectives without a known optimum: R1 from level-1 observations."""
    values = np.asarray(initial_values, dtype=float)
    if values.size == 0:
        raise InvalidArgumentError("no level-1 observations on the initial design")
    return ReferenceOptimum(None, None, float(values.max() - values.min()))


def _normalized_distance(a, b):
    a = np.asarray(a, dtype=float).reshape(-1)
    b = np.asarray(b, dtype=float).reshape(-1)
    return float(np.linalg.norm(a - b) / math.sqrt(a.size))


def _require_r1(ref: ReferenceOptimum):
    if not ref.r1_metric > 0:
        raise InvalidArgumentError("R1 is zero; the objective error is undefined")


def combined_error(e_x, e_f):
    return math.sqrt((e_x**2 + e_f**2) / 2.0)


def reference_errors(x_star, ref: ReferenceOptimum, stack, f_star=None):
    """``(E_x, E_f, E_t)`` of a normalized optimum estimate."""
    if ref.x_check is None:
        raise InvalidArgumentError("no reference optimum for this objective")
    _require_r1(ref)
    if f_star is None:
        f_star = stack.true_high_fidelity(stack.to_physical(x_star))
    e_x = _normalized_distance(x_star, ref.x_check)
    e_f = (f_star - ref.f_check) / ref.r1_metric
    return e_x, e_f, combined_error(e_x, e_f)


def relative_improvements(x_star, x0, stack, f_star=None, f_x0=None):
    """``(Delta_x, Delta_f)`` of x_star against the baseline design x0 (both normalized)."""
    if f_star is None:
        f_star = stack.true_high_fidelity(stack.to_physical(x_star))
    if f_x0 is None:
        f_x0 = stack.true_high_fidelity(stack.to_physical(x0))
    if f_x0 == 0:
        raise InvalidArgumentError("f(x0) is zero; the relative improvement is undefined")
    return _normalized_distance(x_star, x0), (f_star - f_x0) / f_x0


def prediction_error(surrogate_min, x_star, ref: ReferenceOptimum, stack, f_star=None):
    """E_p = (f_hat(x*) - f(x*)) / R1; negative when the surrogate is over-optimistic."""
    _require_r1(ref)
    if f_star is None:
        f_star = stack.true_high_fidelity(stack.to_physical(x_star))
    return (surrogate_min - f_star) / ref.r1_metric


def aggregate_stats(values):
    """Quartiles (linear interpolation), 1.5 IQR outliers and whiskers at the extreme inliers."""
    v = np.asarray(list(values), dtype=float).reshape(-1)
    if v.size == 0:
        raise InvalidArgumentError("aggregate_stats needs at least one value")
    q1, q2, q3 = np.percentile(v, [25, 50, 75])
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    is_out = (v < lo_fence) | (v > hi_fence)
    inliers = v[~is_out]
    return BoxStats(
        float(q1),
        float(q2),
        float(q3),
        float(inliers.min()),
        float(inliers.max()),
        tuple(float(x) for x in np.sort(v[is_out])),
        int(v.size),
    )


def campaign_metrics(record, stack, ref: Optional[ReferenceOptimum] = None, x0=None):
    """Metrics row of one finished campaign.

    ``ref`` defaults to the observed reference when ``stack`` has no known optimum.
    Every metric that cannot be computed is NaN.
    """
    x_star = np.asarray(record.final_x_star, dtype=float)
    if ref is None:
        ref = observed_reference(record.initial_level1_values)
    if x0 is None:
        x0 = getattr(stack, "x0", None)
    x0 = np.full(stack.dim, 0.5) if x0 is None else np.asarray(x0, dtype=float)

    f_star = float(stack.true_high_fidelity(stack.to_physical(x_star)))
    row = {
        "seed": record.seed,
        "termination": record.termination_reason,
        "cc": record.cc,
        "f_star": f_star,
        "surrogate_min": record.final_surrogate_min,
    }
    for l, j in enumerate(record.per_level_counts, start=1):
        row[f"J_{l}"] = j

    nan = float("nan")
    row["E_x"] = row["E_f"] = row["E_t"] = nan
    if ref.x_check is not None and ref.r1_metric > 0:
        row["E_x"], row["E_f"], row["E_t"] = reference_errors(x_star, ref, stack, f_star=f_star)
    try:
        row["Delta_x"], row["Delta_f"] = relative_improvements(x_star, x0, stack, f_star=f_star)
    except InvalidArgumentError as e:
        logger.warning("Delta metrics skipped: %s", e)
        row["Delta_x"], row["Delta_f"] = _normalized_distance(x_star, x0), nan
    if ref.r1_metric > 0:
        row["E_p"] = prediction_error(record.final_surrogate_min, x_star, ref, stack, f_star=f_star)
        row["abs_E_p"] = abs(row["E_p"])
    else:
        logger.warning("R1 is zero, E_p skipped")
        row["E_p"] = row["abs_E_p"] = nan
    return row
