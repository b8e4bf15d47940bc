"""The outcome Markov chain induced by repeated projective measurement.

Column convention: ``P[k, kp] = P(k | k')`` -- column ``k'`` is the
previous outcome and every column sums to one.
"""
from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .channels import POVM, MeasureEvolveStep, ProjectiveBasis, outcome_probabilities, step
from .qcore import DensityMatrix, evolve

ENTRY_TOL = 1e-12
COLUMN_TOL = 1e-10
STATIONARY_TOL = 1e-10
DEGENERACY_TOL = 1e-8


class DegenerateChainError(ValueError):
    """The chain has no unique stationary distribution."""

    def __init__(self, multiplicity: int, eigenvalues):
        self.multiplicity = multiplicity
        self.eigenvalues = np.asarray(eigenvalues)
        super().__init__(
            f"unit eigenvalue has multiplicity {multiplicity} (tolerance {DEGENERACY_TOL:g}); "
            "stationary distribution is not unique")


@dataclass(frozen=True)
class TransitionMatrix:
    """Column-stochastic outcome transition matrix with per-column waiting times."""

    matrix: np.ndarray
    waiting_times: tuple | None = None

    def __post_init__(self):
        P = np.array(self.matrix, dtype=float, copy=True)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise ValueError(f"transition matrix must be square, got shape {P.shape}")
        if not np.all(np.isfinite(P)):
            raise ValueError("transition matrix has non-finite entries")
        if P.min() < -ENTRY_TOL or P.max() > 1 + ENTRY_TOL:
            raise ValueError(f"transition probabilities outside [0, 1]: [{P.min():.3e}, {P.max():.3e}]")
        err = np.max(np.abs(P.sum(axis=0) - 1.0))
        if err > COLUMN_TOL:
            raise ValueError(f"columns do not sum to one (max error {err:.3e})")
        P = np.clip(P, 0.0, 1.0)
        P.flags.writeable = False
        object.__setattr__(self, "matrix", P)
        if self.waiting_times is not None:
            taus = tuple(float(t) for t in self.waiting_times)
            if len(taus) != P.shape[0]:
                raise ValueError("need one waiting time per column")
            object.__setattr__(self, "waiting_times", taus)

    @property
    def n_outcomes(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return np.array(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class StationaryDistribution:
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float, copy=True)
        if q.min() < 0 or abs(q.sum() - 1) > 1e-12:
            raise ValueError("stationary distribution must be non-negative and normalized")
        q.flags.writeable = False
        object.__setattr__(self, "q", q)

    def __array__(self, dtype=None, copy=None):
        return np.array(self.q, dtype=dtype)


@dataclass(frozen=True)
class Trajectory:
    outcomes: np.ndarray
    seed: object = None
    init: str = "specified"
    n_outcomes: int | None = field(default=None, compare=False)

    def __post_init__(self):
        w = np.array(self.outcomes, dtype=np.int64, copy=True).reshape(-1)
        if w.size and w.min() < 0:
            raise ValueError("outcome indices must be non-negative")
        if self.n_outcomes is not None and w.size and w.max() >= self.n_outcomes:
            raise ValueError(f"outcome index {w.max()} out of range for {self.n_outcomes} outcomes")
        if self.init not in ("stationary", "specified"):
            raise ValueError(f"unknown initial-distribution tag {self.init!r}")
        w.flags.writeable = False
        object.__setattr__(self, "outcomes", w)

    def __len__(self) -> int:
        return self.outcomes.size


def _is_subspace_povm(m: POVM, tol: float = 1e-10) -> bool:
    effs = m.effects
    for i, a in enumerate(effs):
        if np.max(np.abs(a @ a - a)) > tol:
            return False
        for b in effs[i + 1:]:
            if np.max(np.abs(a @ b)) > tol:
                return False
    return True


def transition_matrix(s: MeasureEvolveStep, check_tol: float = 1e-10) -> TransitionMatrix:
    """Build ``P(k|k')`` from a measure-evolve step.

    For a projective basis column ``k'`` is ``<k| E^{k'}(|k'><k'|) |k>``.
    A POVM is accepted only if its effects are projectors onto mutually
    orthogonal subspaces; the column is then computed from the normalized
    subspace projector and, as a guard, from every basis state of the
    subspace. If those disagree the outcome process is not Markov order 1
    and ``ValueError`` is raised.
    """
    m = s.measurement
    n = m.n_outcomes
    P = np.empty((n, n))
    if isinstance(m, ProjectiveBasis):
        for kp in range(n):
            out = step(m.projector(kp), s, kp)
            P[:, kp] = outcome_probabilities(out, m)
        return TransitionMatrix(P, s.waiting_times)
    if not _is_subspace_povm(m):
        raise ValueError("POVM effects are not orthogonal projectors; "
                         "the outcome process is not Markov order 1")
    for kp, eff in enumerate(m.effects):
        rank = int(round(np.trace(eff).real))
        rho = DensityMatrix(eff / rank)
        P[:, kp] = outcome_probabilities(evolve(s.propagators[kp], rho), m)
        w, v = np.linalg.eigh(eff)
        for j in np.flatnonzero(w > 0.5):
            col = outcome_probabilities(evolve(s.propagators[kp], DensityMatrix.pure(v[:, j])), m)
            if np.max(np.abs(col - P[:, kp])) > check_tol:
                raise ValueError(f"transitions out of subspace {kp} depend on the state inside it; "
                                 "the outcome process is not Markov order 1")
    return TransitionMatrix(P, s.waiting_times)


def _check_unique(P: np.ndarray) -> None:
    ev = np.linalg.eigvals(P)
    mult = int(np.sum(np.abs(ev - 1.0) <= DEGENERACY_TOL))
    if mult != 1:
        raise DegenerateChainError(mult, ev)


def stationary(P: TransitionMatrix | np.ndarray, check: bool = True) -> StationaryDistribution:
    """Unique fixed point ``q = P q``.

    Shifted inverse iteration near eigenvalue 1, with a bordered linear
    solve as fallback. Raises ``DegenerateChainError`` when more than one
    eigenvalue lies within ``DEGENERACY_TOL`` of 1.
    """
    M = np.asarray(P, dtype=float)
    n = M.shape[0]
    if check:
        _check_unique(M)
    if n == 1:
        return StationaryDistribution(np.ones(1))

    A = M - (1.0 + 1e-10) * np.eye(n)
    q = np.full(n, 1.0 / n)
    try:
        for _ in range(4):
            q = np.linalg.solve(A, q)
            q = q / q.sum()
    except np.linalg.LinAlgError:
        q = np.full(n, np.nan)
    q = _clean(q)
    if q is None or np.max(np.abs(q - M @ q)) > STATIONARY_TOL:
        B = np.vstack([M - np.eye(n), np.ones((1, n))])
        rhs = np.zeros(n + 1)
        rhs[-1] = 1.0
        q = _clean(np.linalg.lstsq(B, rhs, rcond=None)[0])
        if q is None:
            raise ValueError("stationary solve failed")
    return StationaryDistribution(q)


def _clean(q: np.ndarray):
    if not np.all(np.isfinite(q)):
        return None
    if q.min() < -1e-12:
        return None
    q = np.clip(q, 0.0, None)
    return q / q.sum()


def _as_seed_sequence(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def child_seed(seed, i: int) -> np.random.SeedSequence:
    """Independent stream for trajectory ``i`` derived from ``seed``."""
    base = _as_seed_sequence(seed)
    return np.random.SeedSequence(base.entropy, spawn_key=tuple(base.spawn_key) + (int(i),))


def _cumulative(P: np.ndarray) -> np.ndarray:
    cum = np.cumsum(P, axis=0)
    cum[-1, :] = 1.0
    return cum


def _init_vector(P: TransitionMatrix, init) -> tuple[np.ndarray, str]:
    n = P.n_outcomes
    if init is None or (isinstance(init, str) and init == "stationary"):
        return stationary(P).q, "stationary"
    p = np.asarray(init, dtype=float)
    if p.shape != (n,) or p.min() < 0 or abs(p.sum() - 1) > 1e-10:
        raise ValueError("initial distribution must be a normalized vector over outcomes")
    return p / p.sum(), "specified"


def sample(P: TransitionMatrix, N: int, init=None, seed=None) -> Trajectory:
    """Sample a length-``N`` outcome string.

    ``init`` is a distribution over the first outcome, or ``None`` /
    ``"stationary"`` for the stationary one. The walk consumes exactly
    ``N`` uniforms from ``default_rng(seed)`` so ``sample_many`` reproduces
    it trajectory by trajectory.
    """
    if N < 1:
        raise ValueError(f"trajectory length must be >= 1, got {N}")
    p0, tag = _init_vector(P, init)
    rng = np.random.default_rng(seed)
    u = rng.random(N).tolist()
    c0 = np.cumsum(p0)
    c0[-1] = 1.0
    cum = _cumulative(P.matrix).T.tolist()
    n = P.n_outcomes
    out = [0] * N
    k = min(bisect_right(c0.tolist(), u[0]), n - 1)
    out[0] = k
    for t in range(1, N):
        k = min(bisect_right(cum[k], u[t]), n - 1)
        out[t] = k
    return Trajectory(np.array(out), seed=seed, init=tag, n_outcomes=n)


def sample_many(P: TransitionMatrix, N: int, n_traj: int, init=None, seed=None) -> np.ndarray:
    """``(n_traj, N)`` outcomes; row ``i`` equals ``sample(..., seed=child_seed(seed, i))``."""
    if N < 1 or n_traj < 1:
        raise ValueError("N and n_traj must be >= 1")
    p0, _ = _init_vector(P, init)
    n = P.n_outcomes
    u = np.empty((n_traj, N))
    for i in range(n_traj):
        u[i] = np.random.default_rng(child_seed(seed, i)).random(N)
    c0 = np.cumsum(p0)
    c0[-1] = 1.0
    cumT = _cumulative(P.matrix).T  # cumT[k'] is the cumulative column of k'
    out = np.empty((n_traj, N), dtype=np.int64)
    k = np.minimum(np.searchsorted(c0, u[:, 0], side="right"), n - 1)
    out[:, 0] = k
    for t in range(1, N):
        k = np.minimum((cumT[k] <= u[:, t, None]).sum(axis=1), n - 1)
        out[:, t] = k
    return out


def sequence_probability(P: TransitionMatrix, init, traj: Trajectory | Sequence[int]) -> tuple[float, float]:
    """``(P(w_1..w_N), log P(w_1..w_N))`` for the Markov chain."""
    w = traj.outcomes if isinstance(traj, Trajectory) else np.asarray(traj, dtype=np.int64)
    M = np.asarray(P.matrix if isinstance(P, TransitionMatrix) else P, dtype=float)
    p0 = np.asarray(init, dtype=float)
    if w.size == 0:
        return 1.0, 0.0
    if w.min() < 0 or w.max() >= M.shape[0]:
        raise ValueError("trajectory index out of range")
    factors = np.concatenate([[p0[w[0]]], M[w[1:], w[:-1]]])
    with np.errstate(divide="ignore"):
        logp = float(np.sum(np.log(factors)))
    return float(np.exp(logp)), logp
