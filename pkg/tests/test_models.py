import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqmetro.chain import stationary
from seqmetro.fisher import ParamSpec, d_theta
from seqmetro.models import (RabiModel, ThermometryModel, feedback_q0, feedback_q0_printed,
                             has_complex_pair, rabi_criticality, rabi_fisher, thermal_distribution,
                             thermal_fi, thermo_closed_forms, thermo_f21, thermo_fisher, thermo_rates,
                             thermo_transition_analytic, thermo_transition_derivative,
                             thermo_transition_liouvillian, thermo_transition_w, thermo_w_matrix)
from seqmetro.scan import local_maxima

D4 = ThermometryModel(4, 1.0, tau_g=1.0, tau_e=1.0)


def test_analytic_transition_examples():
    assert np.allclose(thermo_transition_analytic(D4.with_taus(0.0)).matrix, np.eye(4))
    P = thermo_transition_analytic(D4).matrix
    x = 0.6 * (1 - np.exp(-5))
    assert np.isclose(P[0, 0], 1 - x, rtol=1e-14) and np.isclose(P[0, 0], 0.40404, atol=1e-5)
    assert np.isclose(P[1, 0], x / 3, rtol=1e-14) and np.isclose(P[1, 0], 0.19865, atol=1e-5)
    assert np.isclose(P[0, 0] + 3 * P[1, 0], 1, atol=1e-15)
    # frozen values from the first derivation
    assert np.allclose([P[0, 1], P[1, 1], P[2, 1]], [0.39730482, 0.29112192, 0.15578663], atol=1e-8)


@settings(max_examples=40, deadline=None)
@given(D=st.integers(2, 6), nbar=st.floats(0.05, 10), tau=st.floats(0, 20))
def test_analytic_vs_w_vs_liouvillian(D, nbar, tau):
    m = ThermometryModel(D, nbar, tau_g=tau, tau_e=tau)
    P = thermo_transition_analytic(m).matrix
    assert np.allclose(P, thermo_transition_w(m).matrix, atol=1e-10)
    assert np.allclose(P, thermo_transition_liouvillian(m).matrix, atol=1e-10)
    assert np.allclose(thermo_w_matrix(D, nbar) @ thermal_distribution(D, nbar)[0], 0, atol=1e-12)


def test_analytic_derivative():
    dP = thermo_transition_derivative(D4)
    num = d_theta(lambda nb: thermo_transition_analytic(D4.with_nbar(nb)).matrix, ParamSpec("nbar", 1.0))
    assert np.allclose(dP, num, atol=1e-8)


def test_thermo_fisher_examples():
    rep = thermo_fisher(ThermometryModel(2, 1.0), 30, 30)
    assert abs(rep.F_2g1 - 1 / 18) < 1e-6
    rep = thermo_fisher(D4)
    r = thermo_rates(4, 1.0, 1.0)
    assert np.isclose(rep.F_2g1_by_prev[0], r.dx ** 2 / (r.x * (1 - r.x)), rtol=1e-12)
    assert rep.extras["route_rel_err"] < 1e-6 and "route-mismatch" not in rep.flags
    assert np.isclose(rep.F_2g1, 0.10506508769, rtol=1e-9)
    assert np.isclose(rep.F_1, thermal_fi(4, 1.0), rtol=1e-12)


def test_closed_forms_match_numeric():
    for D in (2, 3, 5):
        for nb in (0.1, 1.0, 4.0):
            for tau in (0.05, 0.7, 3.0):
                rep = thermo_fisher(ThermometryModel(D, nb), tau, tau)
                cf = thermo_closed_forms(D, nb, tau)
                assert np.isclose(cf["F_e0"], rep.F_2g1_by_prev[0], rtol=1e-10)
                assert np.isclose(cf["F_ei"], rep.F_2g1_by_prev[1], rtol=1e-10)
                assert np.isclose(thermo_f21(ThermometryModel(D, nb), tau), rep.F_2g1, rtol=1e-10)


def test_corrected_excited_rate_value():
    # the excited-column rate at D=4, nbar=1, tau=1
    assert np.isclose(thermo_closed_forms(4, 1.0, 1.0)["F_ei"], 0.12437868, atol=1e-8)


def test_coarse_graining():
    full = thermo_transition_analytic(D4).matrix
    cg = thermo_transition_analytic(ThermometryModel(4, 1.0, "coarse", 1.0, 1.0)).matrix
    assert np.isclose(cg[1, 0], 3 * full[1, 0], rtol=1e-14)
    assert np.isclose(cg[0, 1], 0.4 * (1 - np.exp(-5)), rtol=1e-14)
    assert np.isclose(cg[0, 1], 0.39731, atol=1e-5)
    for tau in (0.1, 1.0, 5.0):
        f = thermo_fisher(D4, tau, tau)
        c = thermo_fisher(ThermometryModel(4, 1.0, "coarse"), tau, tau)
        assert abs(f.F_2g1_by_prev[0] - c.F_2g1_by_prev[0]) < 1e-12
        assert c.F_2g1 <= f.F_2g1 * (1 + 1e-12)
    assert np.isclose(thermo_fisher(ThermometryModel(4, 1.0, "coarse"), 1, 1).F_2g1_by_prev[1],
                      0.049082084, atol=1e-9)


def test_coarse_excited_below_thermal_at_low_nbar():
    m = ThermometryModel(4, 0.1, "coarse")
    Fth = thermal_fi(4, 0.1)
    for tau in np.geomspace(0.05, 20, 200):
        assert thermo_closed_forms(4, 0.1, tau)["F_e1_coarse"] <= Fth


def test_feedback_stationary():
    D, nb, tg, te = 4, 1.0, 0.2, 0.6
    q = stationary(thermo_transition_analytic(ThermometryModel(D, nb, tau_g=tg, tau_e=te))).q
    assert np.isclose(feedback_q0(D, nb, tg, te), q[0], rtol=1e-12)
    # the quoted form returns a single excited-level population
    assert np.isclose(feedback_q0_printed(D, nb, tg, te), q[1], rtol=1e-12)
    rep = thermo_fisher(ThermometryModel(D, nb), tg, te)
    assert np.isclose(rep.F_2g1, thermo_f21(ThermometryModel(D, nb), tg, te), rtol=1e-10)


def test_thermal_fi_values():
    assert np.isclose(thermal_fi(2, 1.0), 1 / 18)
    assert np.isclose(thermal_fi(4, 1.0), 0.06)
    with pytest.raises(ValueError):
        thermal_fi(1, 1.0)


def test_rabi_spectrum_and_criticality():
    assert not has_complex_pair(0.05)
    assert has_complex_pair(1.0)
    lo, hi = rabi_criticality()
    assert lo <= 0.125 <= hi and hi - lo < 1e-5


def test_rabi_sigma_x_no_information():
    for tau in (0.3, 1.0, 4.0):
        for om in (0.2, 1.0):
            assert rabi_fisher(RabiModel(om, tau, "sigma_x")).F_2g1 <= 1e-10


def test_rabi_scan_shape():
    taus = np.linspace(0.01, 10, 500)
    F = np.array([rabi_fisher(RabiModel(1.0, t)).F_2g1 for t in taus])
    assert len(local_maxima(F)) >= 2
    mins = local_maxima(-F)
    assert any(F[i] < 0.1 * F.max() for i in mins)


@pytest.mark.parametrize("omega", [
    1.0,
    # weak drive: the computational basis wins at every grid point (checked
    # against direct ODE integration), so the majority statement does not hold
    pytest.param(0.2, marks=pytest.mark.xfail(strict=True, reason="computational basis dominates at weak drive")),
])
def test_sigma_y_majority(omega):
    taus = np.linspace(0.05, 10, 60)
    wins = sum(rabi_fisher(RabiModel(omega, t, "sigma_y")).F_2g1
               >= rabi_fisher(RabiModel(omega, t)).F_2g1 for t in taus)
    assert wins > len(taus) / 2


def test_model_validation():
    with pytest.raises(ValueError):
        ThermometryModel(1, 1.0)
    with pytest.raises(ValueError):
        ThermometryModel(3, -1.0)
    with pytest.raises(ValueError):
        RabiModel(0.2, 1.0, "nonsense")
