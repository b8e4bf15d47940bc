"""Do real estimators reach 1 / (N F21)?

Sample stationary outcome strings of a qubit thermometer, estimate nbar on
each, and compare the spread with the Cramer-Rao rate. Maximum likelihood
on the transition counts should be efficient; inverting the empirical
level populations throws the correlations away and does much worse.
"""
from seqmetro import (ThermometryModel, thermal_distribution, thermo_f_star, thermo_fisher,
                      thermo_transition_analytic)
from seqmetro.estimate import monte_carlo

m = ThermometryModel(2, 1.0)
tau = thermo_f_star(m).argmax[0]
F21 = thermo_fisher(m, tau, tau).F_2g1
print(f"gamma tau* = {tau:.5f}, F21 = {F21:.5f}")


def model(nb):
    mm = m.with_nbar(nb).with_taus(tau)
    return thermo_transition_analytic(mm), thermal_distribution(2, nb)[0]


for est in ("mle", "inversion", "empirical"):
    rep = monte_carlo(model, 1.0, est, N=10_000, n_traj=200, seed=1, bracket=(0.05, 20), F_2g1=F21)
    print(f"{est:>10}: variance * N * F21 = {rep.ratio:.3f} +- {rep.ratio_se:.3f} "
          f"(bias {rep.bias:+.4f}, {rep.n_failures} failures)")
