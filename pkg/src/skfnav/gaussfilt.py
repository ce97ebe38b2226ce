"""Gaussian filtering with the scaled unscented transform.

Prediction and update over arbitrary nonlinear state/observation maps, plus
the constant-free marginal log-likelihood increment used to score competing
observation models.  Maps are vectorized: they take an ``(n, d)`` array of
points and return an ``(n, d_out)`` array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .exceptions import (
    CovarianceError,
    DynamicsDivergedError,
    InvalidMeasurementError,
    SingularInnovationError,
)

# Diagonal jitter ladder applied before declaring a covariance non-PSD.
_JITTERS = tuple(1e-12 * 10.0**i for i in range(7))  # 1e-12 .. 1e-6
_EIG_FLOOR = -1e-9


def symmetrize(mat: np.ndarray) -> np.ndarray:
    return 0.5 * (mat + mat.T)


@dataclass(frozen=True)
class GaussianBelief:
    """Gaussian state estimate: mean vector and symmetric covariance."""

    mean: np.ndarray
    cov: np.ndarray

    @classmethod
    def create(cls, mean, cov) -> "GaussianBelief":
        mean = np.asarray(mean, dtype=float).reshape(-1)
        cov = symmetrize(np.asarray(cov, dtype=float))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(
                f"covariance shape {cov.shape} does not match state dimension {mean.size}"
            )
        return cls(mean=mean, cov=cov)

    @property
    def dim(self) -> int:
        return self.mean.size


@dataclass(frozen=True)
class SigmaPointParams:
    """Scaled unscented-transform tuning (alpha, beta, kappa)."""

    alpha: float = 0.1
    beta: float = 2.0
    kappa: float = 0.0

    def scaled_dim(self, dim: int) -> float:
        """alpha^2 (d + kappa); must be positive for finite weights."""
        scale = self.alpha**2 * (dim + self.kappa)
        if scale <= 0.0:
            raise ValueError(f"alpha^2 (d + kappa) = {scale} must be positive")
        return scale

    def weights(self, dim: int) -> tuple[np.ndarray, np.ndarray]:
        """Mean and covariance weights for ``2 d + 1`` points."""
        lam = self.scaled_dim(dim) - dim
        wm = np.full(2 * dim + 1, 1.0 / (2.0 * (dim + lam)))
        wc = wm.copy()
        wm[0] = lam / (dim + lam)
        wc[0] = wm[0] + (1.0 - self.alpha**2 + self.beta)
        return wm, wc


@dataclass(frozen=True)
class PredictedObservation:
    """Predicted measurement mean and innovation covariance (noise included)."""

    mu: np.ndarray
    D: np.ndarray


def _sqrt_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix S with S S^T = cov, tolerating slightly indefinite inputs.

    Tries Cholesky first, then an eigenvalue factorization with negative
    eigenvalues above ``_EIG_FLOOR`` clipped to zero, then Cholesky with an
    escalating diagonal jitter.  Raises CovarianceError when all fail.
    """
    try:
        return np.linalg.cholesky(cov)
    except np.linalg.LinAlgError:
        pass
    try:
        eigvals, eigvecs = np.linalg.eigh(symmetrize(cov))
    except np.linalg.LinAlgError:
        eigvals = np.array([-np.inf])
    if np.all(np.isfinite(eigvals)) and eigvals.min() >= _EIG_FLOOR:
        return eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
    for jitter in _JITTERS:
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(cov.shape[0]))
        except np.linalg.LinAlgError:
            continue
    raise CovarianceError("covariance not PSD")


def sigma_points(
    belief: GaussianBelief, params: SigmaPointParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Weighted point set ``(points (2d+1, d), mean weights, cov weights)``."""
    dim = belief.dim
    scale = params.scaled_dim(dim)
    factor = _sqrt_factor(belief.cov)
    spread = np.sqrt(scale) * factor.T  # rows are scaled factor columns
    points = np.empty((2 * dim + 1, dim))
    points[0] = belief.mean
    points[1 : dim + 1] = belief.mean + spread
    points[dim + 1 :] = belief.mean - spread
    wm, wc = params.weights(dim)
    return points, wm, wc


def _moments(
    points: np.ndarray, wm: np.ndarray, wc: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    mean = wm @ points
    dev = points - mean
    cov = (dev.T * wc) @ dev
    return mean, symmetrize(cov)


def predict(
    belief: GaussianBelief,
    dynamics: Callable[[np.ndarray], np.ndarray],
    Q: np.ndarray,
    params: SigmaPointParams,
) -> GaussianBelief:
    """Unscented prediction through ``dynamics`` with additive noise ``Q``."""
    points, wm, wc = sigma_points(belief, params)
    propagated = np.asarray(dynamics(points), dtype=float)
    if not np.all(np.isfinite(propagated)):
        raise DynamicsDivergedError("dynamics diverged: non-finite propagated state")
    mean, cov = _moments(propagated, wm, wc)
    return GaussianBelief.create(mean, cov + Q)


def update(
    belief: GaussianBelief,
    observation: Callable[[np.ndarray], np.ndarray],
    y: np.ndarray,
    R: np.ndarray,
    params: SigmaPointParams,
) -> tuple[GaussianBelief, PredictedObservation]:
    """Unscented measurement update; returns the posterior and the predicted
    observation (mean and innovation covariance) used for likelihood scoring."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if not np.all(np.isfinite(y)):
        raise InvalidMeasurementError("invalid measurement: non-finite entries")
    points, wm, wc = sigma_points(belief, params)
    obs_points = np.asarray(observation(points), dtype=float)
    if obs_points.shape[1] != y.size:
        raise InvalidMeasurementError(
            f"measurement dimension {y.size} does not match observation map "
            f"output {obs_points.shape[1]}"
        )
    mu = wm @ obs_points
    dev_y = obs_points - mu
    D = symmetrize((dev_y.T * wc) @ dev_y + R)
    dev_x = points - belief.mean
    cross = (dev_x.T * wc) @ dev_y
    chol = _cholesky_innovation(D)
    # K = cross D^{-1} via two triangular solves
    gain = _cho_solve(chol, cross.T).T
    mean = belief.mean + gain @ (y - mu)
    cov = belief.cov - gain @ D @ gain.T
    return GaussianBelief.create(mean, cov), PredictedObservation(mu=mu, D=D)


def _cholesky_innovation(D: np.ndarray) -> np.ndarray:
    try:
        chol = np.linalg.cholesky(D)
    except np.linalg.LinAlgError as exc:
        raise SingularInnovationError("innovation covariance singular") from exc
    diag = np.diag(chol)
    if diag.min() <= 0.0 or (diag.max() / diag.min()) ** 2 > 1e14:
        raise SingularInnovationError("innovation covariance singular")
    return chol

def _cho_solve(chol: np.ndarray, b: np.ndarray) -> np.ndarray:
    z = np.linalg.solve(chol, b)
    return np.linalg.solve(chol.T, z)


def log_likelihood_increment(y: np.ndarray, pred: PredictedObservation) -> float:
    """Constant-free log-likelihood term ``-log|D| - (y-mu)^T D^{-1} (y-mu)``.

    Comparable across filters sharing an observation stream; not a calibrated
    probability.
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    chol = _cholesky_innovation(pred.D)
    resid = y - pred.mu
    white = np.linalg.solve(chol, resid)
    log_det = 2.0 * np.sum(np.log(np.diag(chol)))
    return float(-log_det - white @ white)
