"""Strapdown inertial navigation: state propagation from IMU readings.

State propagation runs in four stages per step: attitude update, specific
force transform into the inertial frame (with trapezoidal attitude
averaging), velocity update with gravity, and trapezoidal position update.
The Earth frame is treated as inertial (no transport rate or Coriolis terms)
with axes North, East, down-positive.  Units: feet, seconds, radians.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .constants import EARTH_RADIUS_FT, GRAV_PARAM, PITCH_GUARD
from .exceptions import GimbalLockError

STATE_NAMES = (
    "h", "L", "lam", "v", "gamma", "alpha",
    "phi", "theta", "psi",
)


@dataclass(frozen=True)
class NavState15:
    """15-component navigation state.

    Altitude (ft), two position angles (rad), speed (ft/s), flight-path angle
    (rad), azimuth (rad), roll/pitch/yaw (rad), accelerometer bias (ft/s^2)
    and gyroscope bias (rad/s) three-vectors.
    """

    h: float
    L: float
    lam: float
    v: float
    gamma: float
    alpha: float
    phi: float
    theta: float
    psi: float
    b_a: np.ndarray = field(default_factory=lambda: np.zeros(3))
    b_g: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        if self.v < 0.0:
            raise ValueError("speed must be non-negative")
        if abs(self.gamma) > np.pi / 2 + 1e-12:
            raise ValueError("flight-path angle outside [-pi/2, pi/2]")
        if abs(self.theta) >= PITCH_GUARD:
            raise GimbalLockError("pitch at Euler-rate singularity")
        object.__setattr__(self, "b_a", np.asarray(self.b_a, dtype=float).reshape(3))
        object.__setattr__(self, "b_g", np.asarray(self.b_g, dtype=float).reshape(3))

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            [[self.h, self.L, self.lam, self.v, self.gamma, self.alpha,
              self.phi, self.theta, self.psi], self.b_a, self.b_g]
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "NavState15":
        vec = np.asarray(vec, dtype=float).reshape(15)
        return cls(*vec[:9], b_a=vec[9:12], b_g=vec[12:15])


@dataclass(frozen=True)
class ImuSample:
    """Specific force (ft/s^2) and angular rate (rad/s), body frame."""

    f_b: np.ndarray
    omega_b: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "f_b", np.asarray(self.f_b, dtype=float).reshape(3))
        object.__setattr__(self, "omega_b", np.asarray(self.omega_b, dtype=float).reshape(3))
        if not (np.all(np.isfinite(self.f_b)) and np.all(np.isfinite(self.omega_b))):
            raise ValueError("IMU sample must be finite")


def attitude_matrix(phi: float, theta: float, psi: float) -> np.ndarray:
    """Rotation matrix taking body-frame vectors to the inertial frame."""
    return kernels.attitude_batch(
        np.array([phi]), np.array([theta]), np.array([psi])
    )[0]


def euler_rates(state: NavState15, omega_meas: np.ndarray) -> np.ndarray:
    """Euler-angle rates from a (biased) gyro reading.

    Applies the roll/pitch kinematic matrix to ``omega_meas - b_g``; the
    matrix divides by cos(pitch), hence the singularity guard on the state.
    """
    w = np.asarray(omega_meas, dtype=float).reshape(3) - state.b_g
    sp, cp = np.sin(state.phi), np.cos(state.phi)
    tt, ct = np.tan(state.theta), np.cos(state.theta)
    return np.array([
        w[0] + sp * tt * w[1] + cp * tt * w[2],
        cp * w[1] - sp * w[2],
        (sp * w[1] + cp * w[2]) / ct,
    ])


def attitude_update(state: NavState15, omega_meas: np.ndarray, dt: float) -> np.ndarray:
    """Forward-Euler attitude propagation; returns wrapped (roll, pitch, yaw)."""
    rates = euler_rates(state, omega_meas)
    angles = np.array([state.phi, state.theta, state.psi]) + rates * dt
    return kernels.wrap_angle(angles)


def gravity(h: float) -> np.ndarray:
    """Inertial gravity vector (N, E, D) at altitude ``h`` ft; down-positive."""
    return np.array([0.0, 0.0, GRAV_PARAM / (EARTH_RADIUS_FT + h) ** 2])


def nav_to_inertial_velocity(v: float, gamma: float, alpha: float) -> np.ndarray:
    """(speed, flight-path angle, azimuth) -> (v_N, v_E, v_D)."""
    cg = np.cos(gamma)
    return np.array([v * cg * np.cos(alpha), v * cg * np.sin(alpha), -v * np.sin(gamma)])


def inertial_to_nav_velocity(v_i: np.ndarray) -> tuple[float, float, float]:
    """(v_N, v_E, v_D) -> (speed, flight-path angle, azimuth); zero speed maps
    to zero angles."""
    v_i = np.asarray(v_i, dtype=float).reshape(3)
    speed = float(np.linalg.norm(v_i))
    if speed == 0.0:
        return 0.0, 0.0, 0.0
    gamma = float(np.arcsin(np.clip(-v_i[2] / speed, -1.0, 1.0)))
    alpha = float(np.arctan2(v_i[1], v_i[0]))
    return speed, gamma, alpha


def strapdown_step(state: NavState15, imu: ImuSample, dt: float) -> NavState15:
    """Propagate one navigation step; IMU biases pass through unchanged."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    out = kernels.strapdown_batch(
        state.as_vector()[None, :], imu.f_b, imu.omega_b, dt
    )[0]
    return NavState15.from_vector(out)


def propagate_imu_bias(
    b_a: np.ndarray,
    b_g: np.ndarray,
    sigma_a: np.ndarray,
    sigma_g: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """One random-walk step for each bias vector.

    ``sigma_a`` / ``sigma_g`` are per-step covariance matrices (a scalar or
    length-3 vector is taken as a diagonal).
    """
    def step(bias, sigma):
        bias = np.asarray(bias, dtype=float).reshape(3)
        sigma = np.asarray(sigma, dtype=float)
        if sigma.ndim < 2:
            sigma = np.diag(np.broadcast_to(sigma, 3).astype(float))
        if not np.any(sigma):
            return bias.copy()
        eigvals, eigvecs = np.linalg.eigh(sigma)
        root = eigvecs * np.sqrt(np.clip(eigvals, 0.0, None))
        return bias + root @ rng.standard_normal(3)

    return step(b_a, sigma_a), step(b_g, sigma_g)


def synthesize_imu(
    true_f_b: np.ndarray,
    true_omega_b: np.ndarray,
    b_a: np.ndarray,
    b_g: np.ndarray,
    noise_std_a: float | np.ndarray,
    noise_std_g: float | np.ndarray,
    rng: np.random.Generator,
) -> ImuSample:
    """Biased, noisy IMU reading: truth plus bias plus white Gaussian noise."""
    f = np.asarray(true_f_b, dtype=float).reshape(3) + np.asarray(b_a, dtype=float)
    w = np.asarray(true_omega_b, dtype=float).reshape(3) + np.asarray(b_g, dtype=float)
    f = f + np.broadcast_to(noise_std_a, 3) * rng.standard_normal(3)
    w = w + np.broadcast_to(noise_std_g, 3) * rng.standard_normal(3)
    return ImuSample(f_b=f, omega_b=w)
