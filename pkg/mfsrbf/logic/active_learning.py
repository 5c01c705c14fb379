"""Penalized LCB acquisition, fidelity selection and the stopping rule.

The next design point minimizes

    psi(x) = w_f * f_hat(x) - w_U * U(x) + P(x)

where P penalizes proposals closer than d0 to any existing training point. The
fidelity to query there is the argmax of the uncertainty-to-cost ratios of the
hierarchy components.
"""

from __future__ import annotations

import logging
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from mfsrbf.config import AcquisitionConfig, CampaignConfig, PsoConfig
from mfsrbf.errors import InvalidArgumentError
from mfsrbf.logic import pso

logger = logging.getLogger(__name__)


class TerminationReason(str, Enum):
    BUDGET = "budget"
    STAGNATION = "stagnation"
    EVALUATION_FAILURE = "evaluation-failure"


def nearest_distances(X, all_points):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    all_points = np.atleast_2d(np.asarray(all_points, dtype=float))
    if all_points.size == 0:
        raise InvalidArgumentError("penalty needs at least one existing training point")
    return cdist(X, all_points.reshape(-1, X.shape[1])).min(axis=1)


def penalty_many(X, all_points, config: Optional[AcquisitionConfig] = None):
    config = config or AcquisitionConfig()
    d = nearest_distances(X, all_points)
    return np.where(d < config.d0, (config.d0 - d) / (config.d0 * config.eps_pen), 0.0)


def penalty(x, all_points, config: Optional[AcquisitionConfig] = None):
    """(1/eps) (d0 - d) / d0 inside the d0-ball of the nearest training point, else 0."""
    return float(penalty_many(np.asarray(x, dtype=float).reshape(1, -1), all_points, config)[0])


def acquisition_many(model, X, all_points, config: Optional[AcquisitionConfig] = None):
    """psi over the rows of X; ``model`` only needs ``predict_many``."""
    config = config or AcquisitionConfig()
    mean, unc = model.predict_many(X)
    return config.w_f * mean - config.w_u * unc + penalty_many(X, all_points, config)


def acquisition(model, x, all_points, config: Optional[AcquisitionConfig] = None):
    return float(acquisition_many(model, np.asarray(x, dtype=float).reshape(1, -1), all_points, config)[0])


def propose_point(model, all_points, bounds=None, config: Optional[AcquisitionConfig] = None,
                  pso_config: Optional[PsoConfig] = None):
    """PSO minimizer of psi; ``bounds`` is ``(lower, upper)``, the unit box when omitted."""
    config = config or AcquisitionConfig()
    all_points = np.atleast_2d(np.asarray(all_points, dtype=float))
    dim = all_points.shape[1]
    if bounds is None:
        lower, upper = np.zeros(dim), np.ones(dim)
    else:
        lower, upper = (np.broadcast_to(np.asarray(b, dtype=float), (dim,)) for b in bounds)

    def objective(U):
        return acquisition_many(model, lower + (upper - lower) * U, all_points, config)

    result = pso.minimize(objective, dim, pso_config)
    return lower + (upper - lower) * result.x_best


def fidelity_selection_vector(component_uncertainties, beta):
    """phi_l = U_l / beta_l, components ordered eps_1 .. eps_{N-1}, f_N."""
    u = np.asarray(component_uncertainties, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if u.shape != beta.shape:
        raise InvalidArgumentError(f"{u.size} uncertainties for {beta.size} levels")
    return u / beta


def select_fidelity(model, x_star, levels):
    """l* = maxloc(phi), ties resolved toward the cheapest (largest) level."""
    if levels.n_levels == 1:
        return 1
    uncertainties = [p.uncertainty for p in model.component_predictions(x_star)]
    phi = fidelity_selection_vector(uncertainties, levels.beta)
    l_star = len(phi) - int(np.argmax(phi[::-1]))
    logger.debug("phi=%s -> l*=%d", np.array2string(phi, precision=4), l_star)
    return l_star


def update_stagnation(counter, anchor, x, near, d0):
    """Advance the stagnation streak; returns ``(counter, anchor)``.

    A streak is a run of proposals that land within d0 of an existing sample at
    their fidelity and stay within d0 of the streak's first proposal, the anchor.
    A proposal that is near a sample but away from the anchor starts a new streak.
    """
    if not near:
        return 0, None
    x = np.asarray(x, dtype=float).reshape(-1)
    if anchor is None or np.linalg.norm(x - np.asarray(anchor, dtype=float)) >= d0:
        return 1, x
    return counter + 1, anchor


def should_stop(ledger, budget, stagnation_counter, config: Optional[CampaignConfig] = None, failed=False):
    """``(stop, reason)``; reason is ``None`` while the campaign continues."""
    config = config or CampaignConfig()
    if failed:
        return True, TerminationReason.EVALUATION_FAILURE
    if ledger.cc >= budget:
        return True, TerminationReason.BUDGET
    if stagnation_counter >= config.stagnation_patience:
        return True, TerminationReason.STAGNATION
    return False, None
