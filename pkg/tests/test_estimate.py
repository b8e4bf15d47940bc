import numpy as np
import pytest

from seqmetro.chain import TransitionMatrix, sample, sample_many
from seqmetro.estimate import (EstimationError, count_transitions, empirical_distribution,
                               invert_transition, log_likelihood, mle, monte_carlo, subsample)
from seqmetro.models import ThermometryModel, thermal_distribution, thermo_fisher, thermo_transition_analytic

TAU = 0.32703


def model_for(D=2, tau=TAU):
    def model(nb):
        m = ThermometryModel(D, nb, tau_g=tau, tau_e=tau)
        return thermo_transition_analytic(m), thermal_distribution(D, nb)[0]
    return model


def test_count_transitions():
    c = count_transitions([0, 1, 0, 1, 0], 2)
    assert np.array_equal(c.counts, [[0, 2], [2, 0]])
    c = count_transitions([2, 2, 2, 2], 3)
    assert c.counts[2, 2] == 3 and c.counts.sum() == 3
    assert np.isnan(c.p_hat[0, 0]) and list(c.visited) == [False, False, True]


def test_empirical_and_subsample():
    assert np.allclose(empirical_distribution([0, 0, 1, 1], 2), [0.5, 0.5])
    w = np.arange(10) % 3
    assert np.array_equal(subsample(w, 1).outcomes, w)
    assert len(subsample(w, 10)) == 1
    with pytest.raises(ValueError):
        subsample(w, 0)


def test_subsample_rank_one():
    P, q = model_for(2, 1.0)(1.0)
    w = sample(P, 200_000, seed=3)
    ph = count_transitions(subsample(w, 25), 2).p_hat
    assert np.allclose(ph[:, 0], q, atol=0.02) and np.allclose(ph[:, 1], q, atol=0.02)


def test_transition_counts_within_binomial_error():
    P = thermo_transition_analytic(ThermometryModel(3, 1.0, tau_g=0.5, tau_e=0.5))
    c = count_transitions(sample(P, 10 ** 6, seed=17), 3)
    n = c.counts.sum(axis=0)
    sig = np.sqrt(P.matrix * (1 - P.matrix) / n)
    assert np.all(np.abs(c.p_hat - P.matrix) <= 4 * sig + 1e-12)


def test_log_likelihood_errors():
    model = lambda t: (np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0.5, 0.5]))
    with pytest.raises(EstimationError):
        log_likelihood(count_transitions([0, 1], 2), model, 0.0)


def test_mle_consistency():
    model = model_for()
    P, q = model(1.0)
    N = 10 ** 5
    w = sample(P, N, init=q, seed=99)
    est = mle(w, model, (0.05, 20))
    F = thermo_fisher(ThermometryModel(2, 1.0), TAU, TAU, cross_check=False).F_2g1
    assert abs(est.theta - 1.0) < 5 / np.sqrt(N * F)
    inv = invert_transition(w, lambda t: float(model(t)[0].matrix[0, 0]), 0, 0, (0.05, 20))
    assert abs(inv.theta - est.theta) < 5 / np.sqrt(N * F)


def test_mle_deterministic_chain():
    # only theta = 0.5 gives a chain that never leaves outcome 0
    def model(t):
        a = abs(t - 0.5)
        return np.array([[1 - a, 0.5], [a, 0.5]]), np.array([1.0, 0.0])
    est = mle([0] * 50, model, (0.0, 1.0), n_grid=21)
    assert abs(est.theta - 0.5) < 1e-5


def test_empirical_mean_matches_thermal():
    P, q = model_for(2, 1.0)(1.0)
    rows = sample_many(P, 1000, 500, init=q, seed=8)
    means = np.array([np.mean(r == 0) for r in rows])
    se = means.std(ddof=1) / np.sqrt(len(means))
    assert abs(means.mean() - q[0]) < 4 * se


def test_monte_carlo_deterministic_and_validation():
    model = model_for()
    a = monte_carlo(model, 1.0, "mle", 500, 10, seed=1, bracket=(0.05, 20))
    b = monte_carlo(model, 1.0, "mle", 500, 10, seed=1, bracket=(0.05, 20))
    assert a.as_dict() == b.as_dict()
    with pytest.raises(ValueError):
        monte_carlo(model, 1.0, "mle", 500, 1, seed=1, bracket=(0.05, 20))
    with pytest.raises(ValueError):
        monte_carlo(model, 1.0, "bogus", 500, 10, seed=1, bracket=(0.05, 20))


@pytest.mark.slow
def test_inversion_not_below_bound():
    rep = monte_carlo(model_for(), 1.0, "inversion", 10 ** 4, 300, seed=5, bracket=(0.05, 20))
    assert rep.ratio >= 1 - 3 * rep.ratio_se
