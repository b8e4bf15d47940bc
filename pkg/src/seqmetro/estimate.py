"""Estimators on outcome strings and Monte-Carlo checks of the Cramer-Rao rate."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from .chain import Trajectory, sample_many
from .fisher import ParamSpec, chain_fisher
from .scan import maximize_1d

MIN_MODEL_PROB = 1e-300
MAX_FAILURE_FRACTION = 0.01


class EstimationError(ValueError):
    pass


@dataclass(frozen=True)
class TransitionCounts:
    """``counts[k, k']`` is the number of times ``k'`` was followed by ``k``."""

    counts: np.ndarray
    first: int
    n_transitions: int

    @property
    def p_hat(self) -> np.ndarray:
        """Empirical ``P(k|k')``; columns never left are NaN."""
        col = self.counts.sum(axis=0)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(col > 0, self.counts / np.where(col > 0, col, 1), np.nan)

    @property
    def visited(self) -> np.ndarray:
        return self.counts.sum(axis=0) > 0


def _outcomes(traj) -> np.ndarray:
    return traj.outcomes if isinstance(traj, Trajectory) else np.asarray(traj, dtype=np.int64)


def count_transitions(traj, n_outcomes: int) -> TransitionCounts:
    w = _outcomes(traj)
    if w.size < 2:
        raise ValueError("need at least two outcomes to count transitions")
    C = np.zeros((n_outcomes, n_outcomes), dtype=np.int64)
    np.add.at(C, (w[1:], w[:-1]), 1)
    return TransitionCounts(C, int(w[0]), int(w.size - 1))


def empirical_distribution(traj, n_outcomes: int) -> np.ndarray:
    w = _outcomes(traj)
    if w.size < 1:
        raise ValueError("empty trajectory")
    return np.bincount(w, minlength=n_outcomes) / w.size


def subsample(traj, delta: int) -> Trajectory:
    """Keep outcomes ``1, delta + 1, 2 delta + 1, ...``."""
    if delta < 1:
        raise ValueError(f"spacing must be >= 1, got {delta}")
    w = _outcomes(traj)
    seed = traj.seed if isinstance(traj, Trajectory) else None
    init = traj.init if isinstance(traj, Trajectory) else "specified"
    n = traj.n_outcomes if isinstance(traj, Trajectory) else None
    return Trajectory(w[::delta], seed=seed, init=init, n_outcomes=n)


def log_likelihood(counts: TransitionCounts, model: Callable, theta: float) -> float:
    """``log p(w_1) + sum C(k|k') log P_theta(k|k')``.

    Columns never visited contribute nothing. An observed transition with
    model probability below ``1e-300`` raises ``EstimationError``.
    """
    P, init = model(theta)
    M = np.asarray(P, dtype=float)
    p0 = float(np.asarray(init)[counts.first])
    mask = counts.counts > 0
    if p0 < MIN_MODEL_PROB:
        raise EstimationError(f"first outcome {counts.first} has model probability {p0:.3e} at theta={theta}")
    bad = mask & (M < MIN_MODEL_PROB)
    if bad.any():
        k, kp = map(int, np.argwhere(bad)[0])
        raise EstimationError(f"observed transition {kp}->{k} has model probability "
                              f"{M[k, kp]:.3e} at theta={theta}")
    return float(np.log(p0) + np.sum(counts.counts[mask] * np.log(M[mask])))


@dataclass(frozen=True)
class Estimate:
    theta: float
    objective: float = float("nan")
    flags: tuple = ()


def mle(traj, model: Callable, bracket: tuple[float, float], n_grid: int = 25,
        n_outcomes: int | None = None) -> Estimate:
    """Maximum-likelihood estimate on ``bracket``.

    A log-spaced (linear if the bracket touches zero) grid locates the best
    cell, then golden-section refines to ``1e-6 max(|theta|, 1)``. A maximum
    on the bracket edge carries the ``"boundary"`` flag.
    """
    lo, hi = map(float, bracket)
    if not lo < hi:
        raise ValueError("bracket must satisfy lo < hi")
    if n_outcomes is None:
        n_outcomes = np.asarray(model(lo)[0]).shape[0]
    counts = count_transitions(traj, n_outcomes)

    def ll(t):
        try:
            return log_likelihood(counts, model, t)
        except EstimationError:
            return -np.inf
    xs = np.geomspace(lo, hi, n_grid) if lo > 0 else np.linspace(lo, hi, n_grid)
    ys = np.array([ll(x) for x in xs])
    if not np.isfinite(ys).any():
        # surface the offending transition
        log_likelihood(counts, model, float(xs[n_grid // 2]))
    best = float(xs[int(np.argmax(ys))])
    tol = 1e-6 * max(abs(best), 1.0)
    res = maximize_1d(ll, xs, tol=tol) if np.isfinite(ys).all() else None
    if res is None:
        return Estimate(best, float(np.max(ys)), ("boundary",) if best in (lo, hi) else ())
    return Estimate(res.argmax[0], res.value, res.flags)


def invert_transition(traj, fn: Callable[[float], float], k: int, kp: int,
                      bracket: tuple[float, float], n_outcomes: int | None = None) -> Estimate:
    """Solve ``fn(theta) = P_hat(k|k')`` for theta (transition-counting estimator)."""
    w = _outcomes(traj)
    n = n_outcomes or int(max(w.max(), k, kp)) + 1
    ph = count_transitions(w, n).p_hat[k, kp]
    if not np.isfinite(ph):
        raise EstimationError(f"outcome {kp} never left; P_hat({k}|{kp}) undefined")
    return _invert(fn, ph, bracket)


def invert_empirical(traj, fn: Callable[[float], float], k: int,
                     bracket: tuple[float, float], n_outcomes: int | None = None) -> Estimate:
    """Solve ``fn(theta) = q_hat_k`` using the empirical distribution."""
    w = _outcomes(traj)
    n = n_outcomes or int(max(w.max(), k)) + 1
    return _invert(fn, empirical_distribution(w, n)[k], bracket)


def _invert(fn, target: float, bracket) -> Estimate:
    lo, hi = map(float, bracket)
    flo, fhi = fn(lo) - target, fn(hi) - target
    if flo == 0:
        return Estimate(lo, 0.0, ("boundary",))
    if fhi == 0:
        return Estimate(hi, 0.0, ("boundary",))
    if np.sign(flo) == np.sign(fhi):
        edge = lo if abs(flo) < abs(fhi) else hi
        return Estimate(edge, float(min(abs(flo), abs(fhi))), ("boundary",))
    t = brentq(lambda x: fn(x) - target, lo, hi, xtol=1e-12 * max(1.0, abs(lo)), rtol=1e-12)
    return Estimate(float(t), 0.0)


@dataclass(frozen=True)
class McReport:
    """Monte-Carlo spread of an estimator against ``1 / (N F_{2|1})``."""

    n_trajectories: int
    N: int
    estimator: str
    theta0: float
    mean: float
    variance: float
    F_2g1: float
    bound: float
    ratio: float
    ratio_se: float
    bias: float
    n_failures: int
    seed: object = None
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n_trajectories < 2:
            raise ValueError("need at least two trajectories for a variance")
        if self.variance < 0:
            raise ValueError("negative variance")

    def as_dict(self) -> dict:
        return {
            "n_trajectories": self.n_trajectories, "N": self.N, "estimator": self.estimator,
            "theta0": self.theta0, "mean": self.mean, "variance": self.variance,
            "F_2g1": self.F_2g1, "bound": self.bound, "ratio": self.ratio,
            "ratio_se": self.ratio_se, "bias": self.bias, "n_failures": self.n_failures,
            "seed": self.seed,
        }


ESTIMATORS = ("mle", "inversion", "empirical")


def monte_carlo(model: Callable, theta0: float, estimator: str, N: int, n_traj: int, seed,
                bracket: tuple[float, float], F_2g1: float | None = None,
                transition: tuple[int, int] = (0, 0), level: int = 0) -> McReport:
    """Sample ``n_traj`` stationary strings at ``theta0`` and estimate each.

    ``estimator`` is ``"mle"``, ``"inversion"`` (of ``P(k|k')`` given by
    ``transition``) or ``"empirical"`` (inversion of the stationary
    probability of ``level``). Trajectory ``i`` uses the child RNG stream
    ``(seed, i)``. ``ratio = variance * N * F_{2|1}``; ``ratio_se`` is its
    Gaussian sampling standard error ``ratio * sqrt(2 / (n - 1))``.
    """
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}; choose from {ESTIMATORS}")
    if n_traj < 2:
        raise ValueError("n_traj must be >= 2 for a variance estimate")
    if N < 2:
        raise ValueError("N must be >= 2")
    P0, init0 = model(theta0)
    n = P0.n_outcomes
    if F_2g1 is None:
        F_2g1 = chain_fisher(lambda t: model(t)[0], ParamSpec("theta", theta0)).F_2g1
    paths = sample_many(P0, N, n_traj, init=init0, seed=seed)
    k, kp = transition
    estimates, failures = [], 0
    for w in paths:
        try:
            if estimator == "mle":
                est = mle(w, model, bracket, n_outcomes=n)
            elif estimator == "inversion":
                est = invert_transition(w, lambda t: float(np.asarray(model(t)[0])[k, kp]),
                                        k, kp, bracket, n_outcomes=n)
            else:
                est = invert_empirical(w, lambda t: float(np.asarray(model(t)[1])[level]),
                                       level, bracket, n_outcomes=n)
        except (EstimationError, ValueError):
            failures += 1
            continue
        if "boundary" in est.flags:
            failures += 1
            continue
        estimates.append(est.theta)
    if failures > MAX_FAILURE_FRACTION * n_traj:
        raise EstimationError(f"{failures} of {n_traj} estimates failed")
    est = np.asarray(estimates)
    m = len(est)
    mean = float(est.mean())
    var = float(est.var(ddof=1))
    ratio = var * N * F_2g1
    return McReport(m, N, estimator, float(theta0), mean, var, float(F_2g1), 1.0 / (N * F_2g1),
                    ratio, float(ratio * np.sqrt(2.0 / (m - 1))), mean - theta0, failures, seed)
