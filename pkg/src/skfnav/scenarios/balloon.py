"""Drifting-balloon scenario: planar advection truth plus corrupted fixes.

The state is (longitude, latitude) in degrees, advected through a velocity
field by explicit Euler steps with additive process noise.  Position fixes
arrive every ``delta`` steps, corrupted by the configured offset model
strictly after the switch time, with one coefficient set shared by both
channels.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from ..biasmodels import BiasSpec, SwitchSpec, augment, bias_eval
from ..exceptions import ConfigError
from ..gaussfilt import SigmaPointParams
from ..switching import SwitchingFilter
from .fields import AnalyticField


@dataclass(frozen=True)
class BalloonConfig:
    x0: tuple = (-35.0, 25.0)
    n_steps: int = 500
    dt: float = 0.01  # hours
    q_x: float = 1e-6
    q_p: float = 1e-6
    r: float = 1e-6
    delta: int = 1
    bias: BiasSpec = dc_field(default_factory=lambda: BiasSpec("quadratic"))
    true_switch_step: Optional[int] = None
    seed: int = 0
    capacity: int = 10

    def __post_init__(self):
        if self.n_steps <= 0:
            raise ConfigError("n_steps must be positive")
        if self.dt <= 0:
            raise ConfigError("dt must be positive")
        if self.delta < 1:
            raise ConfigError("sampling period must be at least 1")
        if min(self.q_x, self.q_p, self.r) < 0:
            raise ConfigError("noise variances must be non-negative")
        if self.true_switch_step is not None:
            self.switch().validate(self.n_steps, self.dt)

    def switch(self) -> Optional[SwitchSpec]:
        if self.true_switch_step is None:
            return None
        return SwitchSpec.at_step(self.true_switch_step, self.dt)


@dataclass(frozen=True)
class BalloonTruth:
    """Simulated trajectory, fixes, and the noise draws behind them."""

    times: np.ndarray        # (n+1,)
    states: np.ndarray       # (n+1, 2)
    epochs: np.ndarray       # measurement step indices
    measurements: np.ndarray  # (n_epochs, 2)
    meas_noise: np.ndarray
    bias_offsets: np.ndarray
    proc_noise: np.ndarray   # (n, 2)

    def measurement_map(self) -> dict[int, np.ndarray]:
        return {int(k): self.measurements[i] for i, k in enumerate(self.epochs)}


def simulate_balloon(cfg: BalloonConfig, field=None) -> BalloonTruth:
    """Generate truth states and corrupted fixes for one seeded run."""
    field = field if field is not None else AnalyticField()
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_steps
    times = np.arange(n + 1) * cfg.dt
    proc_noise = np.sqrt(cfg.q_x) * rng.standard_normal((n, 2))
    states = np.empty((n + 1, 2))
    states[0] = cfg.x0
    for k in range(n):
        u, v = field.eval(states[k, 0], states[k, 1], times[k])
        states[k + 1] = states[k] + cfg.dt * np.array([float(u), float(v)]) + proc_noise[k]

    epochs = np.arange(cfg.delta, n + 1, cfg.delta)
    meas_noise = np.sqrt(cfg.r) * rng.standard_normal((epochs.size, 2))
    switch = cfg.switch()
    measurements = np.empty((epochs.size, 2))
    bias_offsets = np.zeros((epochs.size, 2))
    for i, k in enumerate(epochs):
        if switch is not None and times[k] > switch.t_s:
            bias_offsets[i] = np.broadcast_to(
                bias_eval(cfg.bias, switch.t_s, times[k]), (2,)
            )
        measurements[i] = states[k] + bias_offsets[i] + meas_noise[i]
    return BalloonTruth(
        times=times,
        states=states,
        epochs=epochs,
        measurements=measurements,
        meas_noise=meas_noise,
        bias_offsets=bias_offsets,
        proc_noise=proc_noise,
    )


def build_balloon_filter(
    cfg: BalloonConfig,
    field=None,
    sigma_params: SigmaPointParams = SigmaPointParams(),
    keep_history: bool = True,
) -> SwitchingFilter:
    """Switching filter over the 5-component augmented balloon state."""
    field = field if field is not None else AnalyticField()
    _, Q_aug = augment(np.zeros(2), np.zeros(3), cfg.q_x * np.eye(2), cfg.q_p)

    def dynamics(points: np.ndarray, k: int) -> np.ndarray:
        t = (k - 1) * cfg.dt
        u, v = field.eval(points[:, 0], points[:, 1], t)
        out = points.copy()
        out[:, 0] += cfg.dt * u
        out[:, 1] += cfg.dt * v
        return out

    return SwitchingFilter(
        dynamics=dynamics,
        observed=np.array([0, 1]),
        d_x=2,
        d_theta=3,
        Q_aug=Q_aug,
        R=cfg.r * np.eye(2),
        x0=np.asarray(cfg.x0, dtype=float),
        C0=np.eye(2),
        dt=cfg.dt,
        delta=cfg.delta,
        capacity=cfg.capacity,
        sigma_params=sigma_params,
        keep_history=keep_history,
    )


def write_truth_csv(path, truth: BalloonTruth) -> None:
    """Truth trajectory as CSV rows (step, time, lon, lat), 17 digits."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time", "lon", "lat"])
        for k, (t, state) in enumerate(zip(truth.times, truth.states)):
            writer.writerow([k, f"{t:.17g}", f"{state[0]:.17g}", f"{state[1]:.17g}"])


def write_measurements_csv(path, truth: BalloonTruth) -> None:
    """Position fixes as CSV rows (step, time, y_lon, y_lat)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "time", "y_lon", "y_lat"])
        for k, y in zip(truth.epochs, truth.measurements):
            writer.writerow([k, f"{truth.times[k]:.17g}", f"{y[0]:.17g}", f"{y[1]:.17g}"])


def noise_to_range_ratio(r: float, trajectory: np.ndarray) -> float:
    """Two measurement standard deviations as a percentage of the trajectory
    range, worst channel."""
    trajectory = np.asarray(trajectory, dtype=float)
    if trajectory.size == 0:
        raise ConfigError("empty trajectory")
    spans = trajectory.max(axis=0) - trajectory.min(axis=0)
    if np.any(spans <= 0):
        raise ConfigError("degenerate zero-range trajectory")
    return float(np.max(100.0 * 2.0 * np.sqrt(r) / spans))
