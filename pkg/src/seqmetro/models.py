"""Physical models: D-level thermometry probe and the dissipative Rabi qubit.

Thermometry
-----------
Ground state ``|e_0>`` (index 0) and a (D-1)-fold degenerate excited level.
The bath drives ``(1 + nbar) D[|e_0><e_i|] + nbar D[|e_i><e_0|]`` for every
excited ``i``; only ``nbar`` is estimated. Outcome-conditioned waiting
times are ``tau_g`` after a ground outcome and ``tau_e`` after an excited
one.

Rabi
----
``H = Omega sigma_x`` with decay ``D[sigma_minus]``; ``Omega`` is estimated.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from .chain import TransitionMatrix, stationary, transition_matrix
from .channels import POVM, MeasureEvolveStep, ProjectiveBasis
from .fisher import (FisherReport, ParamSpec, chain_fisher, d_theta, f_conditional,
                     fi_of_distribution)
from .qcore import SIGMA_MINUS, SIGMA_X, Superoperator, liouvillian, spectrum

ROUTE_TOL = 1e-6


# --------------------------------------------------------------------------- thermometry

@dataclass(frozen=True)
class ThermometryModel:
    D: int
    nbar: float
    measurement: str = "full"
    tau_g: float = 1.0
    tau_e: float = 1.0

    def __post_init__(self):
        if int(self.D) != self.D or self.D < 2:
            raise ValueError(f"probe needs D >= 2 levels, got {self.D}")
        if not (np.isfinite(self.nbar) and self.nbar > 0):
            raise ValueError(f"nbar must be positive, got {self.nbar}")
        if self.measurement not in ("full", "coarse"):
            raise ValueError(f"measurement must be 'full' or 'coarse', got {self.measurement!r}")
        for t in (self.tau_g, self.tau_e):
            if not (np.isfinite(t) and t >= 0):
                raise ValueError(f"waiting times must be finite and >= 0, got {t}")
        object.__setattr__(self, "D", int(self.D))

    @property
    def n_outcomes(self) -> int:
        return self.D if self.measurement == "full" else 2

    def with_taus(self, tau_g: float, tau_e: float | None = None) -> "ThermometryModel":
        return replace(self, tau_g=float(tau_g), tau_e=float(tau_g if tau_e is None else tau_e))

    def with_nbar(self, nbar: float) -> "ThermometryModel":
        return replace(self, nbar=float(nbar))

    def column_taus(self) -> tuple:
        return (self.tau_g,) + (self.tau_e,) * (self.n_outcomes - 1)


@dataclass(frozen=True)
class ThermoRates:
    """Relaxation factors at one waiting time, with their nbar-derivatives.

    ``f = exp(-tau (D nbar + 1))``, ``g = exp(-tau (nbar + 1))``,
    ``x = q_e (1 - f)`` (ground -> excited), ``y = 1 - x - f = q_0 (1 - f)``
    (excited -> ground).
    """

    tau: float
    f: float
    g: float
    x: float
    y: float
    q0: float
    qe: float
    qi: float
    df: float
    dg: float
    dx: float
    dy: float
    dq0: float
    dqe: float


def thermal_distribution(D: int, nbar: float) -> tuple[np.ndarray, np.ndarray]:
    """Thermal populations ``(q_0, q_i, ...)`` and their nbar-derivatives."""
    z = 1.0 + D * nbar
    q0 = (1.0 + nbar) / z
    qi = nbar / z
    dq0 = (1.0 - D) / z**2
    dqi = 1.0 / z**2
    return (np.array([q0] + [qi] * (D - 1)), np.array([dq0] + [dqi] * (D - 1)))


def thermo_rates(D: int, nbar: float, tau: float) -> ThermoRates:
    z = 1.0 + D * nbar
    q0 = (1.0 + nbar) / z
    qe = 1.0 - q0
    dq0 = (1.0 - D) / z**2
    dqe = -dq0
    f = np.exp(-tau * (D * nbar + 1.0))
    g = np.exp(-tau * (nbar + 1.0))
    df = -tau * D * f
    dg = -tau * g
    x = qe * (1.0 - f)
    y = q0 * (1.0 - f)
    dx = dqe * (1.0 - f) - qe * df
    dy = dq0 * (1.0 - f) - q0 * df
    return ThermoRates(tau, f, g, x, y, q0, qe, qe / (D - 1), df, dg, dx, dy, dq0, dqe)


def transition_from_rates(D: int, ground: ThermoRates, excited: ThermoRates,
                          coarse: bool = False) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form ``P(k|k')`` and ``dP/dnbar``.

    ``ground`` supplies the rates for the column of the ground outcome,
    ``excited`` for the excited columns.
    """
    rg, re = ground, excited
    if coarse:
        P = np.array([[1.0 - rg.x, re.y],
                      [rg.x, 1.0 - re.y]])
        dP = np.array([[-rg.dx, re.dy],
                       [rg.dx, -re.dy]])
        return P, dP
    P = np.empty((D, D))
    dP = np.empty((D, D))
    P[0, 0], dP[0, 0] = 1.0 - rg.x, -rg.dx
    P[1:, 0], dP[1:, 0] = rg.x / (D - 1), rg.dx / (D - 1)
    P[0, 1:], dP[0, 1:] = re.y, re.dy
    off = (1.0 - re.y - re.g) / (D - 1)          # = (q_e (1-f) + f - g) / (D-1)
    doff = (-re.dy - re.dg) / (D - 1)
    P[1:, 1:], dP[1:, 1:] = off, doff
    idx = np.arange(1, D)
    P[idx, idx] = re.g + off
    dP[idx, idx] = re.dg + doff
    return P, dP


def _rates_pair(m: ThermometryModel, nbar: float | None = None):
    nbar = m.nbar if nbar is None else nbar
    return thermo_rates(m.D, nbar, m.tau_g), thermo_rates(m.D, nbar, m.tau_e)


def thermo_transition_analytic(m: ThermometryModel, tau: float | None = None) -> TransitionMatrix:
    """Closed-form transition matrix; ``tau`` overrides both waiting times."""
    if tau is not None:
        m = m.with_taus(tau)
    rg, re = _rates_pair(m)
    P, _ = transition_from_rates(m.D, rg, re, coarse=m.measurement == "coarse")
    return TransitionMatrix(P, m.column_taus())


def thermo_transition_derivative(m: ThermometryModel) -> np.ndarray:
    """Closed-form ``dP(k|k')/dnbar``."""
    rg, re = _rates_pair(m)
    return transition_from_rates(m.D, rg, re, coarse=m.measurement == "coarse")[1]


def thermo_w_matrix(m: ThermometryModel | int, nbar: float | None = None) -> np.ndarray:
    """Classical rate matrix on the populations (columns sum to zero)."""
    if isinstance(m, ThermometryModel):
        D, nbar = m.D, m.nbar
    else:
        D = int(m)
    W = np.zeros((D, D))
    W[0, 1:] = nbar + 1.0
    W[1:, 0] = nbar
    W[0, 0] = -(D - 1) * nbar
    W[np.arange(1, D), np.arange(1, D)] = -(nbar + 1.0)
    return W


def thermo_transition_w(m: ThermometryModel, nbar: float | None = None) -> TransitionMatrix:
    """Transition matrix from ``exp(W tau)``, column by column."""
    nbar = m.nbar if nbar is None else nbar
    W = thermo_w_matrix(m.D, nbar)
    cache = {t: scipy.linalg.expm(W * t) for t in {m.tau_g, m.tau_e}}
    P = np.empty((m.D, m.D))
    P[:, 0] = cache[m.tau_g][:, 0]
    P[:, 1:] = cache[m.tau_e][:, 1:]
    if m.measurement == "coarse":
        P = np.array([[P[0, 0], P[0, 1]], [1.0 - P[0, 0], 1.0 - P[0, 1]]])
    return TransitionMatrix(P, m.column_taus())


def thermo_generator(D: int, nbar: float) -> Superoperator:
    """Lindblad generator of the thermalizing bath on the D-level probe."""
    jumps = []
    for i in range(1, D):
        down = np.zeros((D, D))
        down[0, i] = 1.0
        jumps.append((1.0 + nbar, down))
        jumps.append((nbar, down.T.copy()))
    return liouvillian(None, jumps, dim=D)


def thermo_measurement(m: ThermometryModel) -> ProjectiveBasis | POVM:
    if m.measurement == "full":
        return ProjectiveBasis.computational(m.D)
    E0 = np.zeros((m.D, m.D))
    E0[0, 0] = 1.0
    return POVM((E0, np.eye(m.D) - E0))


def thermo_step(m: ThermometryModel, nbar: float | None = None) -> MeasureEvolveStep:
    nbar = m.nbar if nbar is None else nbar
    return MeasureEvolveStep.from_generator(thermo_measurement(m), thermo_generator(m.D, nbar),
                                            m.column_taus())


def thermo_transition_liouvillian(m: ThermometryModel, nbar: float | None = None) -> TransitionMatrix:
    """Transition matrix from the full quantum channel ``exp(L tau)``."""
    return transition_matrix(thermo_step(m, nbar))


def thermal_fi(D: int, nbar: float) -> float:
    """Fisher information of the thermal populations about nbar."""
    if D < 2 or not nbar > 0:
        raise ValueError("need D >= 2 and nbar > 0")
    return (D - 1) / (nbar * (1 + nbar) * (1 + D * nbar) ** 2)


def thermo_closed_forms(D: int, nbar: float, tau: float) -> dict:
    """Per-outcome rates from the binary-variable closed forms.

    ``F_e0 = (x')^2 / (x (1 - x))`` and
    ``F_ei = (y')^2/y + [y' - (D-2) g']^2 / ((D-1)(1 - y + (D-2) g))
    + (D-2)/(D-1) (y' + g')^2 / (1 - y - g)``; ``F_e1_coarse`` is the binary
    rate ``(y')^2 / (y (1 - y))`` of the coarse-grained excited column.
    """
    r = thermo_rates(D, nbar, tau)
    out = {"x": r.x, "y": r.y}
    out["F_e0"] = r.dx**2 / (r.x * (1 - r.x)) if 0 < r.x < 1 else 0.0
    if r.y <= 0:
        out["F_ei"] = 0.0
        out["F_e1_coarse"] = 0.0
        return out
    F_ei = r.dy**2 / r.y
    F_ei += (r.dy - (D - 2) * r.dg) ** 2 / ((D - 1) * (1 - r.y + (D - 2) * r.g))
    if D > 2:
        F_ei += (D - 2) / (D - 1) * (r.dy + r.dg) ** 2 / (1 - r.y - r.g)
    out["F_ei"] = F_ei
    out["F_e1_coarse"] = r.dy**2 / (r.y * (1 - r.y))
    return out


def feedback_q0_printed(D: int, nbar: float, tau_g: float, tau_e: float) -> float:
    """Feedback steady-state expression in the form usually quoted for q_0.

    ``(1 - f_g) nbar / (1 + D nbar (1 - f_g) + f_g nbar - (1 + nbar) f_e)``.
    It reproduces the stationary population of a *single excited level*,
    not of the ground state; :func:`feedback_q0` gives the ground one.
    """
    fg = np.exp(-tau_g * (D * nbar + 1))
    fe = np.exp(-tau_e * (D * nbar + 1))
    return (1 - fg) * nbar / (1 + D * nbar * (1 - fg) + fg * nbar - (1 + nbar) * fe)


def feedback_q0(D: int, nbar: float, tau_g: float, tau_e: float) -> float:
    """Stationary ground probability ``y_e / (x_g + y_e)`` of the two-tau chain."""
    rg, re = thermo_rates(D, nbar, tau_g), thermo_rates(D, nbar, tau_e)
    return re.y / (rg.x + re.y)


def thermo_fisher(m: ThermometryModel, tau_g: float | None = None, tau_e: float | None = None,
                  cross_check: bool = True) -> FisherReport:
    """Fisher report for nbar with closed-form transitions and derivatives.

    With equal waiting times the stationary distribution is thermal; with
    feedback it is solved from the two-tau chain and ``F_1`` uses central
    differences of that solve. ``cross_check`` recomputes ``F_{2|1}`` from
    ``exp(W tau)`` with central differences and flags ``"route-mismatch"``
    beyond a relative ``1e-6``.
    """
    if tau_g is not None:
        m = m.with_taus(tau_g, tau_e)
    rg, re = _rates_pair(m)
    coarse = m.measurement == "coarse"
    P, dP = transition_from_rates(m.D, rg, re, coarse)
    TM = TransitionMatrix(P, m.column_taus())
    flags: list[str] = []
    q_solved = stationary(TM).q   # also rejects degenerate (tau ~ 0) chains
    extras = {}
    if m.tau_g == m.tau_e:
        q_full, dq_full = thermal_distribution(m.D, m.nbar)
        if coarse:
            q = np.array([q_full[0], 1 - q_full[0]])
            dq = np.array([dq_full[0], -dq_full[0]])
        else:
            q, dq = q_full, dq_full
    else:
        q = q_solved

        def q_of(nb):
            rg_, re_ = _rates_pair(m, nb)
            return stationary(TransitionMatrix(transition_from_rates(m.D, rg_, re_, coarse)[0])).q
        dq = d_theta(q_of, ParamSpec("nbar", m.nbar))
        extras["q0_closed_form"] = feedback_q0(m.D, m.nbar, m.tau_g, m.tau_e)
        extras["q0_printed_form"] = feedback_q0_printed(m.D, m.nbar, m.tau_g, m.tau_e)
    F1 = fi_of_distribution(q, dq, flags)
    F2, by_prev = f_conditional(P, dP, q, flags)
    if cross_check:
        p = ParamSpec("nbar", m.nbar)
        dP_num = d_theta(lambda nb: thermo_transition_w(m, nb).matrix, p)
        P_num = thermo_transition_w(m).matrix
        F2_num, _ = f_conditional(P_num, dP_num, q)
        rel = abs(F2_num - F2) / max(abs(F2), 1e-300)
        extras["F_2g1_numeric"] = F2_num
        extras["route_rel_err"] = rel
        if rel > ROUTE_TOL and abs(F2_num - F2) > 1e-14:
            flags.append("route-mismatch")
    return FisherReport(m.nbar, m.column_taus(), F1, F2, by_prev, q,
                        thermal_fi(m.D, m.nbar), tuple(dict.fromkeys(flags)), extras)


def thermo_coarse_fisher(m: ThermometryModel, tau_g: float | None = None, tau_e: float | None = None,
                         cross_check: bool = True) -> FisherReport:
    """:func:`thermo_fisher` for the ground / excited-subspace measurement."""
    return thermo_fisher(replace(m, measurement="coarse"), tau_g, tau_e, cross_check)


def thermo_f21(m: ThermometryModel, tau_g: float, tau_e: float | None = None) -> float:
    """``F_{2|1}`` from the scalar closed forms; the optimizers' objective."""
    tau_e = tau_g if tau_e is None else tau_e
    q0 = feedback_q0(m.D, m.nbar, tau_g, tau_e)
    F_g = thermo_closed_forms(m.D, m.nbar, tau_g)["F_e0"]
    key = "F_e1_coarse" if m.measurement == "coarse" else "F_ei"
    F_e = thermo_closed_forms(m.D, m.nbar, tau_e)[key]
    return float(q0 * F_g + (1.0 - q0) * F_e)


# --------------------------------------------------------------------------- Rabi

BASES = {
    "computational": (0.0, 0.0),
    "z": (0.0, 0.0),
    "sigma_x": (np.pi / 2, 0.0),
    "x": (np.pi / 2, 0.0),
    "sigma_y": (np.pi / 2, np.pi / 2),
    "y": (np.pi / 2, np.pi / 2),
}


def rabi_basis(spec) -> ProjectiveBasis:
    """Basis from a name in ``BASES`` or Bloch angles ``(theta, phi)``."""
    if isinstance(spec, ProjectiveBasis):
        return spec
    if isinstance(spec, str):
        try:
            spec = BASES[spec]
        except KeyError:
            raise ValueError(f"unknown basis {spec!r}; use one of {sorted(BASES)} or (theta, phi)")
    theta, phi = spec
    return ProjectiveBasis.bloch(float(theta), float(phi))


@dataclass(frozen=True)
class RabiModel:
    omega: float
    tau: float = 1.0
    basis: object = "computational"

    def __post_init__(self):
        if not (np.isfinite(self.omega) and self.omega >= 0):
            raise ValueError(f"Omega must be >= 0, got {self.omega}")
        if not (np.isfinite(self.tau) and self.tau >= 0):
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        rabi_basis(self.basis)


def rabi_generator(omega: float) -> Superoperator:
    return liouvillian(omega * SIGMA_X, [(1.0, SIGMA_MINUS)])


def rabi_transition(m: RabiModel, omega: float | None = None) -> TransitionMatrix:
    omega = m.omega if omega is None else omega
    s = MeasureEvolveStep.from_generator(rabi_basis(m.basis), rabi_generator(omega), m.tau)
    return transition_matrix(s)


def rabi_fisher(m: RabiModel, h: float = 1e-5) -> FisherReport:
    """Fisher report for Omega; derivatives by central differences of the propagator."""
    if not m.tau > 0:
        raise ValueError("rabi_fisher needs tau > 0")
    return chain_fisher(lambda om: rabi_transition(m, om), ParamSpec("Omega", m.omega, h))


def has_complex_pair(omega: float, tol: float = 1e-7) -> bool:
    """Whether the Rabi Liouvillian has eigenvalues with ``|Im| > tol``."""
    return bool(np.max(np.abs(spectrum(rabi_generator(omega)).imag)) > tol)


def rabi_criticality(lo: float = 0.05, hi: float = 1.0, tol: float = 1e-6) -> tuple[float, float]:
    """Bisect for the Omega where a complex eigenvalue pair appears.

    Requires a purely real spectrum at ``lo`` and a complex pair at ``hi``.
    """
    if has_complex_pair(lo) or not has_complex_pair(hi):
        raise ValueError("bracket does not straddle the real/complex spectral transition")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if has_complex_pair(mid):
            hi = mid
        else:
            lo = mid
    return lo, hi
