"""Hierarchical multi-fidelity surrogate.

The MF prediction is the lowest-fidelity SRBF plus one SRBF per inter-level error,

    f_hat(x) = f_N(x) + sum_{l=1}^{N-1} eps_l(x),

with eps_l trained on s_l - f_hat_{l+1} at the points of level l. Level 1 is the
highest fidelity; every point sampled at level l is also sampled at all cheaper
levels, so the training sets are nested. Component uncertainties are combined by
root-sum-square.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from mfsrbf.config import SrbfConfig
from mfsrbf.errors import DuplicatePointError, EvaluationError, InvalidArgumentError, InvalidStateError
from mfsrbf.logic import srbf
from mfsrbf.logic.srbf import Prediction, RbfEnsemble, TrainingSet

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FidelityLevels:
    beta: tuple
    labels: Optional[tuple] = None

    def __post_init__(self):
        beta = tuple(float(b) for b in self.beta)
        object.__setattr__(self, "beta", beta)
        if not beta:
            raise InvalidArgumentError("at least one fidelity level is required")
        if abs(beta[0] - 1.0) > 1e-12:
            raise InvalidArgumentError(f"beta_1 must be 1, got {beta[0]}")
        if any(not 0.0 < b <= 1.0 for b in beta):
            raise InvalidArgumentError(f"cost ratios must lie in (0, 1], got {beta}")
        if any(b2 > b1 for b1, b2 in zip(beta, beta[1:])):
            logger.warning("cost ratios %s are not non-increasing with level", beta)
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(f"level {l}" for l in range(1, len(beta) + 1)))
        elif len(self.labels) != len(beta):
            raise InvalidArgumentError("one label per level is required")

    @classmethod
    def from_costs(cls, costs, labels=None):
        """Cost ratios beta_l = c_l / c_1 from absolute costs."""
        c1 = float(costs[0])
        if c1 <= 0:
            raise InvalidArgumentError("costs must be positive")
        return cls(tuple(float(c) / c1 for c in costs), labels)

    @property
    def n_levels(self):
        return len(self.beta)


@dataclass(frozen=True, eq=False)
class MfSurrogate:
    """Training sets and fitted components; ``error_models[l-1]`` is eps_l.

    Components not fitted yet are ``None`` while the hierarchy is being built.
    ``kstar_history`` lists K* in the same order as :meth:`components`.
    """

    levels: FidelityLevels
    training: tuple
    lowest_model: Optional[RbfEnsemble] = None
    error_models: tuple = ()
    kstar_history: tuple = ()
    flags: tuple = field(default=())

    @property
    def n_levels(self):
        return self.levels.n_levels

    @property
    def dim(self):
        return self.training[0].dim

    def components(self):
        """Fitted ensembles in fidelity-selection order: eps_1 .. eps_{N-1}, f_N."""
        return tuple(self.error_models) + (self.lowest_model,)

    def component_predictions(self, x):
        comps = self.components()
        if any(c is None for c in comps):
            raise InvalidStateError("hierarchy is not fully fitted")
        return [srbf.predict(c, x) for c in comps]

    def all_points(self):
        """Union of all training points (the lowest level holds every point)."""
        pts = np.vstack([t.points for t in self.training])
        return np.unique(pts, axis=0)

    def predict_many(self, X):
        return predict_level_many(self, 1, X)

    def to_dict(self):
        return {
            "beta": list(self.levels.beta),
            "labels": list(self.levels.labels),
            "training": [t.to_dict() for t in self.training],
            "lowest_model": self.lowest_model.to_dict() if self.lowest_model else None,
            "error_models": [m.to_dict() if m else None for m in self.error_models],
            "kstar_history": list(self.kstar_history),
            "flags": list(self.flags),
        }

    @classmethod
    def from_dict(cls, data):
        levels = FidelityLevels(tuple(data["beta"]), tuple(data["labels"]))
        dim = len(data["lowest_model"]["centers"][0]) if data.get("lowest_model") else None
        return cls(
            levels=levels,
            training=tuple(TrainingSet.from_dict(t, dim) for t in data["training"]),
            lowest_model=RbfEnsemble.from_dict(data["lowest_model"]) if data.get("lowest_model") else None,
            error_models=tuple(RbfEnsemble.from_dict(m) if m else None for m in data["error_models"]),
            kstar_history=tuple(data.get("kstar_history", ())),
            flags=tuple(data.get("flags", ())),
        )


@dataclass(frozen=True)
class BudgetLedger:
    """Running cost CC = sum_l beta_l J_l in units of one highest-fidelity evaluation."""

    beta: tuple
    per_level_counts: tuple
    budget: float
    cc: float = 0.0

    @classmethod
    def start(cls, levels: FidelityLevels, budget):
        return cls(levels.beta, (0,) * levels.n_levels, float(budget))

    def charge(self, l_star):
        """Record one sample at level l_star and, by nesting, all cheaper levels."""
        if not 1 <= l_star <= len(self.beta):
            raise InvalidArgumentError(f"level {l_star} outside 1..{len(self.beta)}")
        counts = tuple(j + 1 if l >= l_star else j for l, j in enumerate(self.per_level_counts, start=1))
        charged = replace(self, per_level_counts=counts)
        return replace(charged, cc=computational_cost(charged))

    @property
    def remaining(self):
        return self.budget - self.cc


def computational_cost(ledger: BudgetLedger):
    return math.fsum(b * j for b, j in zip(ledger.beta, ledger.per_level_counts))


def check_nesting(training, tol):
    """Every point of level l is present (within tol) at level l+1."""
    for upper, lower in zip(training, training[1:]):
        if upper.size == 0:
            continue
        if lower.size == 0 or cdist(upper.points, lower.points).min(axis=1).max() > tol:
            return False
    return True


def _level_components(model: MfSurrogate, l):
    N = model.n_levels
    if not 1 <= l <= N:
        raise InvalidArgumentError(f"level {l} outside 1..{N}")
    comps = [model.lowest_model] + [model.error_models[i - 1] for i in range(l, N)]
    if any(c is None for c in comps):
        raise InvalidStateError(f"components below level {l} are not fitted yet")
    return comps


def predict_level_many(model: MfSurrogate, l, X):
    """f_hat_l over rows of X: ``(mean, uncertainty)`` arrays."""
    comps = _level_components(model, l)
    X = np.asarray(X, dtype=float).reshape(-1, model.dim)
    mean = np.zeros(len(X))
    var = np.zeros(len(X))
    for comp in comps:
        m, u = srbf.predict_many(comp, X)
        mean += m
        var += u**2
    return mean, np.sqrt(var)


def predict_level(model: MfSurrogate, l, x) -> Prediction:
    mean, unc = predict_level_many(model, l, np.asarray(x, dtype=float).reshape(1, -1))
    return Prediction(float(mean[0]), float(unc[0]))


def predict_mf(model: MfSurrogate, x) -> Prediction:
    return predict_level(model, 1, x)


def inter_level_errors(model: MfSurrogate, l) -> TrainingSet:
    """Training set of eps_l: s_l(x_j) - f_hat_{l+1}(x_j) over the points of level l."""
    N = model.n_levels
    if not 1 <= l <= N - 1:
        raise InvalidArgumentError(f"inter-level errors exist for levels 1..{N - 1}, got {l}")
    train = model.training[l - 1]
    if train.size == 0:
        raise InvalidStateError(f"level {l} has no training data")
    try:
        mean, _ = predict_level_many(model, l + 1, train.points)
    except InvalidStateError:
        raise InvalidStateError(f"eps_{l} requested before levels {l + 1}..{N} were fitted") from None
    return TrainingSet(train.points, train.values - mean, train.duplicate_tol)


def fit_hierarchy(training, levels: FidelityLevels, prev_kstars=None, config: Optional[SrbfConfig] = None,
                  fixed_kstars=None) -> MfSurrogate:
    """Fit f_N, then eps_{N-1} down to eps_1, each with its own K* search.

    ``fixed_kstars`` (component order, ``None`` entries searched) bypasses LOOCV;
    values above a component's J are clamped to J, which gives interpolation.
    """
    config = config or SrbfConfig()
    training = tuple(training)
    N = levels.n_levels
    if len(training) != N:
        raise InvalidArgumentError(f"{len(training)} training sets for {N} levels")
    if training[-1].size < 3:
        raise InvalidArgumentError("the lowest fidelity needs at least 3 training points")
    if not check_nesting(training, config.duplicate_tol):
        raise InvalidArgumentError("training sets are not nested")
    prev = tuple(prev_kstars) if prev_kstars else (None,) * N
    fixed = tuple(fixed_kstars) if fixed_kstars else (None,) * N

    def choose(i, train):
        if fixed[i] is not None:
            return max(1, min(int(fixed[i]), train.size))
        return srbf.select_num_centers(train, prev[i], config)

    flags = []
    kstars = [None] * N
    kstars[-1] = choose(N - 1, training[-1])
    lowest = srbf.fit_ensemble(training[-1], kstars[-1], config)
    if lowest.truncated:
        flags.append(f"lstsq-truncated:level {N}")
    model = MfSurrogate(levels, training, lowest, (None,) * (N - 1), tuple(kstars), ())

    for l in range(N - 1, 0, -1):
        errors = inter_level_errors(model, l)
        if errors.size < 3:
            flags.append(f"degenerate-bootstrap:eps_{l}")
        kstars[l - 1] = choose(l - 1, errors)
        eps = srbf.fit_ensemble(errors, kstars[l - 1], config)
        if eps.truncated:
            flags.append(f"lstsq-truncated:eps_{l}")
        error_models = model.error_models[: l - 1] + (eps,) + model.error_models[l:]
        model = replace(model, error_models=error_models, kstar_history=tuple(kstars))

    return replace(model, flags=tuple(flags))


def initial_training(stack, design, levels: FidelityLevels, duplicate_tol):
    """Evaluate every design point at every level (sample j gets eval_index j)."""
    design = np.atleast_2d(np.asarray(design, dtype=float))
    training = []
    for l in range(1, levels.n_levels + 1):
        values = []
        for j, x in enumerate(design):
            try:
                values.append(float(stack.evaluate(l, stack.to_physical(x), j)))
            except EvaluationError as e:
                raise EvaluationError(f"initial design failed at level {l}: {e}", level=l) from e
        training.append(TrainingSet(design, values, duplicate_tol))
    return tuple(training)


def add_observation(model: MfSurrogate, ledger: BudgetLedger, x, l_star, stack, config: Optional[SrbfConfig] = None):
    """Sample x at l_star and every cheaper level, charge the ledger, refit.

    Returns ``(model, ledger, observed)`` with ``observed`` mapping level -> value.
    Nothing changes unless every level evaluates successfully.
    """
    config = config or SrbfConfig()
    N = model.n_levels
    if not 1 <= l_star <= N:
        raise InvalidArgumentError(f"level {l_star} outside 1..{N}")
    x = np.asarray(x, dtype=float).reshape(-1)
    for l in range(l_star, N + 1):
        if model.training[l - 1].nearest_distance(x) <= config.duplicate_tol:
            raise DuplicatePointError(f"x={x.tolist()} already sampled at level {l}")

    x_phys = stack.to_physical(x)
    observed = {}
    for l in range(l_star, N + 1):
        eval_index = model.training[l - 1].size
        try:
            value = float(stack.evaluate(l, x_phys, eval_index))
        except EvaluationError as e:
            raise EvaluationError(f"evaluation failed at level {l}: {e}", level=l) from e
        except (OSError, ValueError, ArithmeticError) as e:
            raise EvaluationError(f"evaluation failed at level {l}: {e}", level=l) from e
        if not math.isfinite(value):
            raise EvaluationError(f"non-finite value at level {l}", level=l)
        observed[l] = value

    training = tuple(
        t.append(x, observed[l]) if l >= l_star else t for l, t in enumerate(model.training, start=1)
    )
    ledger = ledger.charge(l_star)
    refit = fit_hierarchy(training, model.levels, model.kstar_history, config)
    return refit, ledger, observed
