"""Fisher information functionals for outcome Markov chains."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .chain import TransitionMatrix, stationary

EPS_P = 1e-12
EPS_D = 1e-8
ENUMERATION_LIMIT = 10**7


@dataclass(frozen=True)
class ParamSpec:
    """Point at which derivatives are taken.

    The finite-difference step is ``h * max(|value|, 1)``.
    """

    name: str
    value: float
    h: float = 1e-5
    mode: str = "central"

    def __post_init__(self):
        if not np.isfinite(self.value):
            raise ValueError(f"parameter value must be finite, got {self.value}")
        if not self.h > 0:
            raise ValueError(f"derivative step must be positive, got {self.h}")
        if self.mode not in ("central", "analytic-if-available"):
            raise ValueError(f"unknown derivative mode {self.mode!r}")

    @property
    def delta(self) -> float:
        return self.h * max(abs(self.value), 1.0)

    def at(self, value: float) -> "ParamSpec":
        return ParamSpec(self.name, value, self.h, self.mode)


@dataclass(frozen=True)
class FisherReport:
    """Fisher information rates of a Markov-order-1 outcome chain.

    ``F_2g1_by_prev[k']`` is the information of the transition column
    ``k'``; ``F_2g1`` is their ``q``-weighted mean. ``extras`` carries
    model-specific cross-check values.
    """

    theta: float
    taus: tuple
    F_1: float
    F_2g1: float
    F_2g1_by_prev: np.ndarray
    q: np.ndarray
    F_reference: float = float("nan")
    flags: tuple = ()
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        by_prev = np.array(self.F_2g1_by_prev, dtype=float, copy=True)
        q = np.array(self.q, dtype=float, copy=True)
        by_prev.flags.writeable = False
        q.flags.writeable = False
        object.__setattr__(self, "F_2g1_by_prev", by_prev)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        object.__setattr__(self, "flags", tuple(self.flags))
        for name in ("F_1", "F_2g1"):
            v = getattr(self, name)
            if not v >= -1e-12:
                raise ValueError(f"{name} = {v} is negative or NaN")
        if abs(self.F_2g1 - float(q @ by_prev)) > 1e-10 * max(1.0, abs(self.F_2g1)):
            raise ValueError("F_2g1 is not the q-weighted mean of the per-column values")

    def sequential(self, N: int) -> float:
        return f_sequential(self.F_1, self.F_2g1, N)


def d_theta(f: Callable, p: ParamSpec):
    """Central difference ``[f(t + d) - f(t - d)] / (2 d)`` with ``d = p.delta``."""
    d = p.delta
    hi = np.asarray(f(p.value + d), dtype=float)
    lo = np.asarray(f(p.value - d), dtype=float)
    if not (np.all(np.isfinite(hi)) and np.all(np.isfinite(lo))):
        raise ValueError(f"non-finite function value near {p.name}={p.value}")
    out = (hi - lo) / (2 * d)
    return float(out) if out.ndim == 0 else out


def fi_of_distribution(p, dp, flags: list | None = None,
                       eps_p: float = EPS_P, eps_d: float = EPS_D) -> float:
    """Classical Fisher information ``sum_w (dp_w)^2 / p_w``.

    Outcomes with ``p <= eps_p`` contribute nothing if ``|dp| <= eps_d``;
    otherwise ``p`` is floored at ``eps_p`` and ``"singular-term"`` is
    appended to ``flags``.
    """
    p = np.asarray(p, dtype=float)
    dp = np.asarray(dp, dtype=float)
    if p.shape != dp.shape or p.ndim != 1:
        raise ValueError(f"shape mismatch: p {p.shape}, dp {dp.shape}")
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(dp))):
        raise ValueError("non-finite probability or derivative")
    if p.min() < -EPS_P or abs(p.sum() - 1) > 1e-10:
        raise ValueError("p is not a probability distribution")
    if abs(dp.sum()) > 1e-8:
        raise ValueError(f"derivative does not sum to zero (sum {dp.sum():.3e})")
    small = p <= eps_p
    singular = small & (np.abs(dp) > eps_d)
    if singular.any() and flags is not None:
        flags.append("singular-term")
    denom = np.where(singular, eps_p, p)
    keep = ~small | singular
    return float(np.sum(dp[keep] ** 2 / denom[keep]))


def f_conditional(P, dP, q, flags: list | None = None) -> tuple[float, np.ndarray]:
    """``(F_{2|1}, [F_{2|1=k'}])`` from transition probabilities and derivatives."""
    P = np.asarray(P, dtype=float)
    dP = np.asarray(dP, dtype=float)
    q = np.asarray(q, dtype=float)
    if P.shape != dP.shape or P.shape[1] != q.size:
        raise ValueError(f"shape mismatch: P {P.shape}, dP {dP.shape}, q {q.shape}")
    by_prev = np.array([fi_of_distribution(P[:, k], dP[:, k], flags) for k in range(P.shape[1])])
    return float(q @ by_prev), by_prev


def f_sequential(F1: float, F2g1: float, N: int) -> float:
    """Information in ``N`` outcomes of an order-1 chain: ``F_1 + (N-1) F_{2|1}``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    return F1 + (N - 1) * F2g1


def chain_fisher(model: Callable[[float], TransitionMatrix], p: ParamSpec,
                 reference: float = float("nan")) -> FisherReport:
    """Fisher report for a chain ``theta -> P_theta`` with stationary start.

    Derivatives of ``P`` and of the stationary ``q`` are central
    differences of the model and of the stationary solve.
    """
    P = model(p.value)
    flags: list[str] = []
    q = stationary(P).q
    dP = d_theta(lambda t: model(t).matrix, p)
    dq = d_theta(lambda t: stationary(model(t)).q, p)
    F1 = fi_of_distribution(q, dq, flags)
    F2, by_prev = f_conditional(P.matrix, dP, q, flags)
    return FisherReport(p.value, P.waiting_times or (), F1, F2, by_prev, q, reference,
                        tuple(dict.fromkeys(flags)))


def sequence_distribution(P, init, N: int) -> np.ndarray:
    """Probabilities of all ``n^N`` outcome strings, shape ``(n,)*N``."""
    P = np.asarray(P, dtype=float)
    arr = np.asarray(init, dtype=float)
    for _ in range(N - 1):
        arr = np.einsum("...j,kj->...jk", arr, P)
    return arr


def enumerate_fi(model: Callable[[float], tuple], p: ParamSpec, N: int,
                 flags: list | None = None) -> float:
    """Brute-force Fisher information of ``N`` sequential outcomes.

    ``model(theta)`` returns ``(TransitionMatrix, init)``; the joint
    probabilities of all ``n^N`` strings are differentiated by central
    differences. Independent of the ``F_1 + (N-1) F_{2|1}`` decomposition.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    P0, init0 = model(p.value)
    n = np.asarray(P0).shape[0]
    if n ** N > ENUMERATION_LIMIT:
        raise ValueError(f"{n}^{N} sequences exceed the enumeration limit {ENUMERATION_LIMIT}")

    def probs(theta):
        P, init = model(theta)
        return sequence_distribution(P, init, N).reshape(-1)

    prob = probs(p.value)
    if not np.all(np.isfinite(prob)):
        raise ValueError("non-finite sequence probability")
    dprob = d_theta(probs, p)
    # string probabilities are legitimately tiny, so only exact zeros are special
    zero = prob <= 0.0
    if np.any(zero & (dprob != 0.0)) and flags is not None:
        flags.append("singular-term")
    denom = np.where(zero, EPS_P, prob)
    return float(np.sum(np.where(zero & (dprob == 0.0), 0.0, dprob ** 2 / denom)))


def stationary_model(model: Callable[[float], TransitionMatrix]) -> Callable[[float], tuple]:
    """Wrap ``theta -> P`` as ``theta -> (P, stationary q)`` for enumeration."""
    def wrapped(theta):
        P = model(theta)
        return P, stationary(P).q
    return wrapped


def convexity_gap(report: FisherReport) -> float:
    return abs(report.F_2g1 - float(report.q @ report.F_2g1_by_prev))

