"""Branched switching filter for corruption-onset detection.

One never-pruned nominal branch runs the clean observation model.  At every
observation epoch the nominal branch is updated twice: once with the clean
model (staying nominal) and once with the corrupted model anchored at the
current epoch, which spawns a new corrupted branch.  Existing corrupted
branches update with their own onset hypothesis.  Each branch accumulates the
constant-free log-likelihood of its observation stream, and the population of
corrupted branches is pruned to a fixed capacity by discarding the lowest
accumulated score (the nominal branch is exempt).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from .biasmodels import quadratic_offsets
from .exceptions import (
    ConfigError,
    DynamicsDivergedError,
    InvalidMeasurementError,
    SkfnavError,
)
from .gaussfilt import (
    GaussianBelief,
    SigmaPointParams,
    log_likelihood_increment,
    predict,
    update,
)


@dataclass
class Branch:
    """One onset hypothesis: assumed switch step, accumulated score, belief.

    A branch whose numerics diverge (hostile measurements can drive the
    nominal model into singular territory) is frozen: it keeps its last
    belief and score but no longer updates, spawns, or accumulates evidence.
    """

    s_index: int
    t_s: float
    log_lik: float
    belief: GaussianBelief
    is_nominal: bool = False
    frozen: bool = False
    history: Optional[list] = None

    def record(self):
        if self.history is not None:
            self.history.append(
                (self.belief.mean.copy(), np.diag(self.belief.cov).copy(), self.log_lik)
            )


@dataclass
class BranchSet:
    """Nominal branch plus up to ``capacity - 1`` corrupted branches."""

    nominal: Branch
    corrupted: list[Branch] = field(default_factory=list)
    capacity: int = 10

    def __post_init__(self):
        if self.capacity < 2:
            raise ConfigError("branch capacity must be at least 2")

    def all_branches(self) -> list[Branch]:
        return [self.nominal] + list(self.corrupted)

    def __len__(self) -> int:
        return 1 + len(self.corrupted)


@dataclass(frozen=True)
class SwitchEstimate:
    """Most likely onset hypothesis and posterior weights over survivors."""

    best: Branch
    t_s: Optional[float]  # None when the nominal branch wins
    s_indices: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class StepDiagnostics:
    """Bookkeeping emitted by one filter step (for tests and reporting)."""

    k: int
    epoch: bool
    spawned_s: Optional[int] = None
    pruned: tuple = ()
    scores_before_prune: tuple = ()
    n_branches: int = 1
    frozen: tuple = ()


def init(
    x0: np.ndarray,
    C0: np.ndarray,
    d_theta: int,
    capacity: int = 10,
    keep_history: bool = True,
) -> BranchSet:
    """Fresh branch set: nominal hypothesis with zero-mean unit-variance
    corruption parameters appended to the state."""
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    C0 = np.asarray(C0, dtype=float)
    if C0.shape != (x0.size, x0.size):
        raise ConfigError(
            f"initial covariance shape {C0.shape} does not match state size {x0.size}"
        )
    mean = np.concatenate([x0, np.zeros(d_theta)])
    cov = np.zeros((x0.size + d_theta, x0.size + d_theta))
    cov[: x0.size, : x0.size] = C0
    cov[x0.size :, x0.size :] = np.eye(d_theta)
    belief = GaussianBelief.create(mean, cov)
    nominal = Branch(
        s_index=0,
        t_s=0.0,
        log_lik=0.0,
        belief=belief,
        is_nominal=True,
        history=[] if keep_history else None,
    )
    nominal.record()
    return BranchSet(nominal=nominal, corrupted=[], capacity=capacity)


def predict_all(
    branches: BranchSet,
    dynamics: Callable[[np.ndarray], np.ndarray],
    Q_aug: np.ndarray,
    params: SigmaPointParams,
) -> BranchSet:
    """Standard prediction applied to every branch; scores unchanged."""
    def advance(branch: Branch) -> Branch:
        try:
            belief = predict(branch.belief, dynamics, Q_aug, params)
        except DynamicsDivergedError as exc:
            raise DynamicsDivergedError(
                f"branch t_s={branch.t_s}: {exc}", step=exc.step
            ) from exc
        return replace(branch, belief=belief)

    return BranchSet(
        nominal=advance(branches.nominal),
        corrupted=[advance(b) for b in branches.corrupted],
        capacity=branches.capacity,
    )


def prune(branches: BranchSet) -> tuple[BranchSet, list[Branch]]:
    """Drop lowest-score corrupted branches until the set fits its capacity.

    Ties discard the latest hypothesis (least evidence so far).  The nominal
    branch is never discarded.
    """
    survivors = list(branches.corrupted)
    removed = []
    while len(survivors) > branches.capacity - 1:
        victim = min(survivors, key=lambda b: (b.log_lik, -b.s_index))
        survivors.remove(victim)
        removed.append(victim)
    return (
        BranchSet(nominal=branches.nominal, corrupted=survivors, capacity=branches.capacity),
        removed,
    )


def estimate(branches: BranchSet) -> SwitchEstimate:
    """Select the highest-score branch and weight all survivors.

    Weights are ``exp(score - max score)`` normalized over the surviving
    branches; exact ties resolve to the nominal branch.
    """
    all_branches = branches.all_branches()
    scores = np.array([b.log_lik for b in all_branches])
    best = all_branches[int(np.argmax(scores))]
    shifted = np.exp(scores - scores.max())
    weights = shifted / shifted.sum()
    return SwitchEstimate(
        best=best,
        t_s=None if best.is_nominal else best.t_s,
        s_indices=np.array([b.s_index for b in all_branches]),
        weights=weights,
    )


def model_average(branches: BranchSet) -> GaussianBelief:
    """Moment-matched Gaussian of the score-weighted branch mixture."""
    est = estimate(branches)
    all_branches = branches.all_branches()
    mean = sum(w * b.belief.mean for w, b in zip(est.weights, all_branches))
    cov = sum(
        w * (b.belief.cov + np.outer(b.belief.mean - mean, b.belief.mean - mean))
        for w, b in zip(est.weights, all_branches)
    )
    return GaussianBelief.create(mean, cov)


def reports_no_corruption(
    est: SwitchEstimate, n_steps: int, tail_frac: float = 0.05
) -> bool:
    """End-of-timeline convention: a winning hypothesis in the final fraction
    of the run (or the nominal branch itself) means no corruption detected."""
    if est.best.is_nominal:
        return True
    return est.best.s_index >= (1.0 - tail_frac) * n_steps


class SwitchingFilter:
    """Runs the branched filter over a measurement stream.

    ``dynamics(points, k)`` propagates an ``(n, d_aug)`` array of augmented
    states from step ``k - 1`` to ``k``.  The observation model selects
    ``observed`` state columns; corrupted branches add the quadratic offset
    implied by the parameter block of each sigma point.
    """

    def __init__(
        self,
        *,
        dynamics: Callable[[np.ndarray, int], np.ndarray],
        observed: np.ndarray,
        d_x: int,
        d_theta: int,
        Q_aug: np.ndarray,
        R: np.ndarray,
        x0: np.ndarray,
        C0: np.ndarray,
        dt: float,
        delta: int = 1,
        capacity: int = 10,
        sigma_params: SigmaPointParams = SigmaPointParams(),
        keep_history: bool = True,
    ):
        if delta < 1:
            raise ConfigError("sampling period must be at least 1 step")
        self.dynamics = dynamics
        self.observed = np.asarray(observed, dtype=int)
        self.d_x = d_x
        self.d_theta = d_theta
        self.Q_aug = np.asarray(Q_aug, dtype=float)
        self.R = np.asarray(R, dtype=float)
        self.dt = dt
        self.delta = delta
        self.params = sigma_params
        self.branches = init(x0, C0, d_theta, capacity=capacity, keep_history=keep_history)
        self.k = 0

    # -- observation maps ------------------------------------------------
    def _observe_nominal(self, points: np.ndarray) -> np.ndarray:
        return points[:, self.observed].copy()

    def _observe_corrupted(self, points: np.ndarray, s_index: int, k: int) -> np.ndarray:
        z = points[:, self.observed].copy()
        if k > s_index:
            tau = (k - s_index) * self.dt
            z += quadratic_offsets(points[:, self.d_x :], tau, self.observed.size)
        return z

    # -- stepping ---------------------------------------------------------
    def _predict_branch(self, branch: Branch, k: int) -> Branch:
        if branch.frozen:
            return branch
        try:
            belief = predict(
                branch.belief, lambda pts: self.dynamics(pts, k), self.Q_aug, self.params
            )
        except SkfnavError:
            return replace(branch, frozen=True)
        return replace(branch, belief=belief)

    def _update_branch(self, branch: Branch, obs_map, y, s_index, is_nominal, k) -> Branch:
        """Measurement update plus score increment; divergence freezes the
        branch in place.  Spawning (``s_index == k``) copies the history."""
        history = branch.history
        if not is_nominal and s_index == k and history is not None:
            history = list(history)
        try:
            belief, pred = update(branch.belief, obs_map, y, self.R, self.params)
            log_lik = branch.log_lik + log_likelihood_increment(y, pred)
            frozen = False
        except SkfnavError:
            belief, log_lik, frozen = branch.belief, branch.log_lik, True
        return Branch(
            s_index=s_index,
            t_s=s_index * self.dt,
            log_lik=log_lik,
            belief=belief,
            is_nominal=is_nominal,
            frozen=frozen,
            history=history,
        )

    def step(self, y: Optional[np.ndarray] = None) -> StepDiagnostics:
        """Advance one step; ``y`` must be supplied exactly at observation
        epochs (every ``delta``-th step) and omitted elsewhere."""
        self.k += 1
        k = self.k
        is_epoch = (k % self.delta) == 0
        if y is not None:
            if not is_epoch:
                raise ConfigError(f"measurement supplied at non-epoch step {k}")
            y = np.asarray(y, dtype=float).reshape(-1)
            if y.size != self.observed.size:
                raise InvalidMeasurementError(
                    f"measurement dimension {y.size} != {self.observed.size}"
                )

        self.branches = BranchSet(
            nominal=self._predict_branch(self.branches.nominal, k),
            corrupted=[self._predict_branch(b, k) for b in self.branches.corrupted],
            capacity=self.branches.capacity,
        )

        spawned_s = None
        pruned_info: tuple = ()
        scores_before: tuple = ()
        if y is not None:
            pre_nominal = self.branches.nominal
            if pre_nominal.frozen:
                new_nominal = pre_nominal
                updated = list(self.branches.corrupted)
            else:
                new_nominal = self._update_branch(
                    pre_nominal, self._observe_nominal, y, 0, True, k
                )
                updated = list(self.branches.corrupted)
                updated.append(self._update_branch(
                    pre_nominal,
                    lambda pts: self._observe_corrupted(pts, k, k),
                    y, k, False, k,
                ))
                spawned_s = k
            updated = [
                b if b.frozen or b.s_index == spawned_s else self._update_branch(
                    b,
                    lambda pts, s=b.s_index: self._observe_corrupted(pts, s, k),
                    y, b.s_index, False, k,
                )
                for b in updated
            ]
            candidate = BranchSet(
                nominal=new_nominal, corrupted=updated, capacity=self.branches.capacity
            )
            scores_before = tuple((b.s_index, b.log_lik) for b in candidate.corrupted)
            self.branches, removed = prune(candidate)
            pruned_info = tuple((b.s_index, b.log_lik) for b in removed)

        for branch in self.branches.all_branches():
            branch.record()
        return StepDiagnostics(
            k=k,
            epoch=is_epoch,
            spawned_s=spawned_s,
            pruned=pruned_info,
            scores_before_prune=scores_before,
            n_branches=len(self.branches),
            frozen=tuple(
                b.s_index for b in self.branches.all_branches() if b.frozen
            ),
        )

    def run(self, measurements: dict[int, np.ndarray], n_steps: int) -> list[StepDiagnostics]:
        """Step through ``k = 1..n_steps`` pulling measurements by step index."""
        return [self.step(measurements.get(k)) for k in range(1, n_steps + 1)]

    def estimate(self) -> SwitchEstimate:
        return estimate(self.branches)
