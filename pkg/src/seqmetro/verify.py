"""Self-check suites: closed forms vs numerics, enumeration vs decomposition.

Each check returns a dict ``{suite, name, passed, error, tolerance}``;
``run_suites`` collects them for the ``verify`` command.
"""
from __future__ import annotations

from dataclasses import replace

import numpy as np

from .chain import TransitionMatrix, stationary
from .channels import ProjectiveBasis, collision_povm, outcome_probabilities
from .fisher import ParamSpec, chain_fisher, enumerate_fi, f_sequential, stationary_model
from .models import (RabiModel, ThermometryModel, rabi_criticality, rabi_fisher, rabi_transition,
                     thermal_distribution, thermo_fisher, thermo_rates, thermo_transition_liouvillian,
                     thermo_transition_w, transition_from_rates)
from .qcore import random_density_matrix, random_unitary

GRID_D = (2, 3, 4, 5, 6)
GRID_NBAR = (0.1, 1.0, 10.0)
GRID_TAU = (0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0)
SUITES = ("transitions", "stationarity", "oracle", "collision", "coarse", "rabi")


def _check(suite, name, error, tol, **info) -> dict:
    return {"suite": suite, "name": name, "passed": bool(error <= tol),
            "error": float(error), "tolerance": float(tol), **info}


def _perturbed_rates(D, nbar, tau, perturb_f):
    r = thermo_rates(D, nbar, tau)
    if perturb_f == 0.0:
        return r
    f = r.f + perturb_f
    return replace(r, f=f, x=r.qe * (1 - f), y=r.q0 * (1 - f))


def suite_transitions(perturb_f: float = 0.0) -> list[dict]:
    err_w = err_l = 0.0
    for D in GRID_D:
        for nbar in GRID_NBAR:
            for tau in GRID_TAU:
                r = _perturbed_rates(D, nbar, tau, perturb_f)
                P = transition_from_rates(D, r, r)[0]
                m = ThermometryModel(D, nbar, tau_g=tau, tau_e=tau)
                err_w = max(err_w, np.max(np.abs(P - thermo_transition_w(m).matrix)))
                err_l = max(err_l, np.max(np.abs(P - thermo_transition_liouvillian(m).matrix)))
    return [_check("transitions", "analytic P(k|k') vs exp(W tau)", err_w, 1e-10),
            _check("transitions", "analytic P(k|k') vs exp(L tau)", err_l, 1e-10)]


def suite_stationarity(perturb_f: float = 0.0) -> list[dict]:
    err_fixed = err_solve = 0.0
    for D in GRID_D:
        for nbar in GRID_NBAR:
            q, _ = thermal_distribution(D, nbar)
            for tau in GRID_TAU:
                r = _perturbed_rates(D, nbar, tau, perturb_f)
                P = transition_from_rates(D, r, r)[0]
                err_fixed = max(err_fixed, np.max(np.abs(q - P @ q)))
                qs = stationary(TransitionMatrix(P)).q
                err_solve = max(err_solve, np.max(np.abs(q - qs)))
    return [_check("stationarity", "thermal q is a fixed point of P", err_fixed, 1e-10),
            _check("stationarity", "stationary solve returns thermal q", err_solve, 1e-10)]


def _thermo_chain(D, tau):
    def model(nbar):
        m = ThermometryModel(D, nbar, tau_g=tau, tau_e=tau)
        r = thermo_rates(D, nbar, tau)
        return TransitionMatrix(transition_from_rates(D, r, r)[0], m.column_taus())
    return model


def suite_oracle(n_max: int = 8) -> list[dict]:
    out = []
    cases = [("thermometry D=2 nbar=%g" % nb, _thermo_chain(2, 1.0), ParamSpec("nbar", nb))
             for nb in (0.5, 1.0)]
    for om in (0.2, 1.0):
        rm = RabiModel(om, 1.0)
        cases.append(("rabi Omega=%g" % om, lambda t, rm=rm: rabi_transition(rm, t),
                      ParamSpec("Omega", om)))
    for label, chain_model, p in cases:
        rep = chain_fisher(chain_model, p)
        worst = 0.0
        for N in range(1, n_max + 1):
            F_enum = enumerate_fi(stationary_model(chain_model), p, N)
            F_dec = f_sequential(rep.F_1, rep.F_2g1, N)
            worst = max(worst, abs(F_enum - F_dec) / abs(F_dec))
        out.append(_check("oracle", f"{label}: enumeration vs F1+(N-1)F21, N<={n_max}", worst, 1e-6))
    return out


def suite_collision(n_draws: int = 100, seed: int = 7) -> list[dict]:
    rng = np.random.default_rng(seed)
    err_sum = err_prob = 0.0
    comp = ProjectiveBasis.computational(2)
    for _ in range(n_draws):
        U = random_unitary(4, rng)
        rho_c = random_density_matrix(2, rng)
        rho_s = random_density_matrix(2, rng)
        povm = collision_povm(U, rho_c, comp)
        err_sum = max(err_sum, np.max(np.abs(sum(povm.effects) - np.eye(2))))
        joint = U @ np.kron(rho_s.data, rho_c.data) @ U.conj().T
        p_joint = np.array([np.trace(joint @ np.kron(np.eye(2), comp.projector(i))).real
                            for i in range(2)])
        err_prob = max(err_prob, np.max(np.abs(outcome_probabilities(rho_s, povm) - p_joint)))
    return [_check("collision", "sum_i E_i = I", err_sum, 1e-12),
            _check("collision", "system POVM reproduces joint probabilities", err_prob, 1e-12)]


def suite_coarse() -> list[dict]:
    err_g = 0.0
    excess = -np.inf
    for D in (3, 4, 6):
        for nbar in GRID_NBAR:
            for tau in GRID_TAU:
                full = thermo_fisher(ThermometryModel(D, nbar), tau, tau, cross_check=False)
                cg = thermo_fisher(ThermometryModel(D, nbar, "coarse"), tau, tau, cross_check=False)
                err_g = max(err_g, abs(full.F_2g1_by_prev[0] - cg.F_2g1_by_prev[0]))
                excess = max(excess, (cg.F_2g1 - full.F_2g1) / full.F_2g1)
    return [_check("coarse", "ground-conditioned rate unchanged by coarse graining", err_g, 1e-12),
            _check("coarse", "coarse F21 <= full F21 (relative excess)", max(excess, 0.0), 1e-12)]


def suite_rabi() -> list[dict]:
    lo, hi = rabi_criticality(0.05, 1.0)
    mid = 0.5 * (lo + hi)
    sx = max(rabi_fisher(RabiModel(0.2, t, "sigma_x")).F_2g1 for t in (0.5, 1.0, 3.0))
    return [_check("rabi", "spectral transition at Omega/gamma = 1/8", abs(mid - 0.125), 0.01,
                   bracket=[lo, hi]),
            _check("rabi", "sigma_x basis carries no information", sx, 1e-10)]


def run_suites(suites=SUITES, n_max: int = 8, perturb_f: float = 0.0) -> list[dict]:
    results = []
    for s in suites:
        if s == "transitions":
            results += suite_transitions(perturb_f)
        elif s == "stationarity":
            results += suite_stationarity(perturb_f)
        elif s == "oracle":
            results += suite_oracle(n_max)
        elif s == "collision":
            results += suite_collision()
        elif s == "coarse":
            results += suite_coarse()
        elif s == "rabi":
            results += suite_rabi()
        else:
            raise ValueError(f"unknown suite {s!r}; choose from {SUITES}")
    return results
