"""Stochastic radial basis function (SRBF) regression.

A fitted model is an ensemble of power-kernel RBF expansions

    g(x, tau) = sum_j w_j(tau) * ||x - c_j|| ** tau

sharing k-means centers and differing in the exponent tau in [1, 3]. The prediction
is the ensemble mean; the uncertainty is half the 2.5-97.5 percentile spread of the
members. Using fewer centers than training points turns interpolation into least
squares regression, which filters evaluation noise; the number of centers is chosen
by leave-one-out cross-validation.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from mfsrbf.config import SrbfConfig
from mfsrbf.constants import (
    BAND_PERCENTILES,
    DUPLICATE_TOL,
    KMEANS_MAX_ITER,
    KMEANS_TOL,
    LSTSQ_CUTOFF,
    TAU_MAX,
    TAU_MIN,
)
from mfsrbf.errors import DuplicatePointError, InvalidArgumentError

logger = logging.getLogger(__name__)

_PREDICT_CHUNK = 256  # query rows evaluated per block in predict_many


class Prediction(NamedTuple):
    mean: float
    uncertainty: float


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Design points in the unit hypercube with their observed values."""

    points: np.ndarray
    values: np.ndarray
    duplicate_tol: float = field(default=DUPLICATE_TOL, repr=False)

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        values = np.array(self.values, dtype=float).reshape(-1)
        if points.ndim == 1:
            # flat input: scalar coordinates of 1-D points, or one point with one value
            points = points.reshape(1, -1) if len(values) == 1 else points.reshape(-1, 1)
        if len(points) != len(values):
            raise InvalidArgumentError(f"{len(points)} points but {len(values)} values")
        if np.any(points < 0.0) or np.any(points > 1.0):
            raise InvalidArgumentError("training points must lie in the unit hypercube")
        if len(points) > 1:
            d = cdist(points, points)
            np.fill_diagonal(d, np.inf)
            if d.min() <= self.duplicate_tol:
                raise DuplicatePointError("training set holds two points within the duplicate tolerance")
        points.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "values", values)

    @classmethod
    def empty(cls, dim, duplicate_tol=DUPLICATE_TOL):
        return cls(np.zeros((0, dim)), np.zeros(0), duplicate_tol)

    @property
    def size(self):
        return len(self.values)

    @property
    def dim(self):
        return self.points.shape[1]

    def nearest_distance(self, x):
        if self.size == 0:
            return np.inf
        return float(cdist(np.atleast_2d(x), self.points).min())

    def append(self, x, value):
        x = np.asarray(x, dtype=float).reshape(1, -1)
        if self.nearest_distance(x) <= self.duplicate_tol:
            raise DuplicatePointError(f"point {x.ravel().tolist()} already in the training set")
        return TrainingSet(np.vstack([self.points, x]), np.append(self.values, value), self.duplicate_tol)

    def without(self, i):
        keep = np.arange(self.size) != i
        return TrainingSet(self.points[keep], self.values[keep], self.duplicate_tol)

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(np.ascontiguousarray(self.points).tobytes())
        h.update(np.ascontiguousarray(self.values).tobytes())
        return f"{self.size}:{h.hexdigest()[:16]}"

    def to_dict(self):
        return {"points": self.points.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, data, dim=None, duplicate_tol=DUPLICATE_TOL):
        points = np.array(data["points"], dtype=float)
        if points.size == 0 and dim is not None:
            points = points.reshape(0, dim)
        return cls(points, data["values"], duplicate_tol)


@dataclass(frozen=True, eq=False)
class RbfEnsemble:
    """A fitted SRBF model: shared centers, one weight vector per tau sample."""

    centers: np.ndarray  # (K, D)
    tau_samples: np.ndarray  # (M,)
    weights: np.ndarray  # (M, K)
    training_fingerprint: str
    truncated: bool = False  # some member hit the least-squares cutoff

    def __post_init__(self):
        for name in ("centers", "tau_samples", "weights"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def kstar(self):
        return len(self.centers)

    def to_dict(self):
        return {
            "centers": self.centers.tolist(),
            "tau_samples": self.tau_samples.tolist(),
            "weights": self.weights.tolist(),
            "kstar": self.kstar,
            "training_fingerprint": self.training_fingerprint,
            "truncated": self.truncated,
        }

    @classmethod
    def from_dict(cls, data):
        return cls(
            centers=np.array(data["centers"], dtype=float, ndmin=2),
            tau_samples=np.array(data["tau_samples"], dtype=float),
            weights=np.array(data["weights"], dtype=float, ndmin=2),
            training_fingerprint=data["training_fingerprint"],
            truncated=bool(data.get("truncated", False)),
        )


def stratified_taus(m):
    """Midpoints of m equal strata of [TAU_MIN, TAU_MAX]."""
    if m < 1:
        raise InvalidArgumentError("need at least one tau sample")
    return TAU_MIN + (TAU_MAX - TAU_MIN) * (np.arange(1, m + 1) - 0.5) / m


def design_matrix(points, centers, tau):
    return cdist(np.atleast_2d(points), np.atleast_2d(centers)) ** tau


def kmeans_centers(points, K, seed=0, max_iter=KMEANS_MAX_ITER, tol=KMEANS_TOL):
    """Deterministic Lloyd k-means.

    Points are sorted lexicographically, seeded by greedy farthest-point selection
    starting from the point nearest the centroid, then refined by Lloyd iterations
    until the relative inertia change drops to ``tol``. The seeding draws no random
    numbers, so ``seed`` does not change the result.
    """
    points = np.array(points, dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    J = len(points)
    if not 1 <= K <= J:
        raise InvalidArgumentError(f"K={K} must lie in [1, {J}]")
    pts = points[np.lexsort(points.T[::-1])]
    if K == J:
        return pts.copy()

    # Farthest-point seeding
    first = int(np.argmin(np.linalg.norm(pts - pts.mean(axis=0), axis=1)))
    chosen = [first]
    min_dist = np.linalg.norm(pts - pts[first], axis=1)
    for _ in range(1, K):
        nxt = int(np.argmax(min_dist))
        chosen.append(nxt)
        min_dist = np.minimum(min_dist, np.linalg.norm(pts - pts[nxt], axis=1))
    centers = pts[chosen].copy()

    prev_inertia = None
    rows = np.arange(J)
    for _ in range(max_iter):
        d2 = cdist(pts, centers, "sqeuclidean")
        labels = np.argmin(d2, axis=1)
        inertia = float(d2[rows, labels].sum())
        for k in range(K):
            members = labels == k
            if members.any():  # empty clusters keep their previous center
                centers[k] = pts[members].mean(axis=0)
        if prev_inertia is not None and abs(prev_inertia - inertia) <= tol * prev_inertia:
            break
        prev_inertia = inertia
    return centers


def fit_weights(train: TrainingSet, centers, tau, cutoff=LSTSQ_CUTOFF):
    """Minimum-norm least-squares weights for one tau.

    Returns ``(weights, truncated)``; ``truncated`` is set when singular values below
    ``cutoff`` times the largest were discarded.
    """
    if not TAU_MIN <= tau <= TAU_MAX:
        raise InvalidArgumentError(f"tau={tau} outside [{TAU_MIN}, {TAU_MAX}]")
    centers = np.array(centers, dtype=float).reshape(-1, train.dim)
    if len(centers) > train.size:
        raise InvalidArgumentError(f"{len(centers)} centers for {train.size} training points")
    A = design_matrix(train.points, centers, tau)
    weights, _, rank, _ = linalg.lstsq(A, train.values, cond=cutoff)
    return weights, bool(rank < min(A.shape))


def fit_ensemble(train: TrainingSet, K, config: Optional[SrbfConfig] = None, taus=None) -> RbfEnsemble:
    config = config or SrbfConfig()
    if not 1 <= K <= train.size:
        raise InvalidArgumentError(f"K={K} must lie in [1, {train.size}]")
    centers = kmeans_centers(train.points, K, config.seed, config.kmeans_max_iter, config.kmeans_tol)
    taus = stratified_taus(config.n_tau) if taus is None else np.asarray(taus, dtype=float)
    weights = np.empty((len(taus), K))
    truncated = False
    for m, tau in enumerate(taus):
        weights[m], cut = fit_weights(train, centers, tau, config.lstsq_cutoff)
        truncated = truncated or cut
    if truncated:
        logger.debug("least-squares cutoff truncated the fit (J=%d, K=%d)", train.size, K)
    return RbfEnsemble(centers, taus, weights, train.fingerprint(), truncated)


def member_values(model: RbfEnsemble, X):
    """g(x, tau_m) for every member m and query row x, shape (M, n)."""
    dists = cdist(np.atleast_2d(X), model.centers)
    powered = dists[None, :, :] ** model.tau_samples[:, None, None]
    return np.einsum("mnk,mk->mn", powered, model.weights)


def predict_many(model: RbfEnsemble, X):
    """Vectorized predict: returns ``(mean, uncertainty)`` arrays of length n."""
    X = np.asarray(X, dtype=float).reshape(-1, model.centers.shape[1])
    mean = np.empty(len(X))
    unc = np.empty(len(X))
    for start in range(0, len(X), _PREDICT_CHUNK):
        block = slice(start, start + _PREDICT_CHUNK)
        G = member_values(model, X[block])
        lo, hi = np.percentile(G, BAND_PERCENTILES, axis=0)
        mean[block] = G.mean(axis=0)
        unc[block] = np.maximum(0.5 * (hi - lo), 0.0)
    return mean, unc


def predict(model: RbfEnsemble, x) -> Prediction:
    mean, unc = predict_many(model, np.asarray(x, dtype=float).reshape(1, -1))
    return Prediction(float(mean[0]), float(unc[0]))


def loocv_rmse(train: TrainingSet, K, config: Optional[SrbfConfig] = None):
    """Leave-one-out RMSE of a K-center ensemble over the reduced tau subset."""
    config = config or SrbfConfig()
    J = train.size
    if J < 3:
        raise InvalidArgumentError(f"LOOCV needs at least 3 points, got {J}")
    if not 1 <= K <= J - 1:
        raise InvalidArgumentError(f"K={K} must lie in [1, {J - 1}] for LOOCV")
    taus = stratified_taus(config.n_tau_loocv)
    residuals = np.empty(J)
    for i in range(J):
        model = fit_ensemble(train.without(i), K, config, taus=taus)
        mean, _ = predict_many(model, train.points[i : i + 1])
        residuals[i] = train.values[i] - mean[0]
    return float(np.sqrt(np.mean(residuals**2)))


def select_num_centers(train: TrainingSet, prev_kstar=None, config: Optional[SrbfConfig] = None):
    """K* = argmin LOOCV RMSE, searched near ``prev_kstar`` when one is given."""
    config = config or SrbfConfig()
    J = train.size
    if J < 3:
        k = max(1, J - 1)
        logger.warning("only %d training points, using K=%d without LOOCV", J, k)
        return k
    k_max = J - 1
    k_min = min(config.k_min, k_max)
    if prev_kstar is None:
        candidates = list(range(k_min, k_max + 1))
    else:
        w = config.kstar_window
        candidates = [k for k in range(prev_kstar - w, prev_kstar + w + 1) if k_min <= k <= k_max]
        if not candidates:
            candidates = [min(max(prev_kstar, k_min), k_max)]

    best_k, best_rmse = candidates[0], np.inf
    for k in candidates:  # ascending, so ties keep the smaller K
        rmse = loocv_rmse(train, k, config)
        logger.debug("LOOCV K=%d RMSE=%.6g", k, rmse)
        if rmse < best_rmse:
            best_k, best_rmse = k, rmse
    return best_k
