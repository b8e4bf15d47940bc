"""Thermometry with a D-level probe: how much does each outcome tell us about nbar?

The probe relaxes towards the thermal state between energy measurements.
Short waits keep memory of the last outcome; long waits reset the probe and
recover the thermal Fisher information F_th.
"""
import numpy as np

from seqmetro import ThermometryModel, thermal_fi, thermo_fisher, thermo_transition_analytic

D, nbar = 4, 1.0
m = ThermometryModel(D, nbar, tau_g=1.0, tau_e=1.0)

# Column k' holds P(k | k') after one waiting time gamma*tau = 1
P = thermo_transition_analytic(m).matrix
print("transition matrix at gamma tau = 1:")
print(np.array2string(P, precision=5))

F_th = thermal_fi(D, nbar)
print(f"\nthermal Fisher information F_th = {F_th:.5f}")
print(f"{'gamma tau':>10} {'F21/F_th':>10} {'after g':>10} {'after e':>10}")
for tau in [0.05, 0.1, 0.2, 0.32, 0.5, 1.0, 2.0, 5.0, 30.0]:
    rep = thermo_fisher(m, tau, tau)
    g, e = rep.F_2g1_by_prev[:2] / F_th
    print(f"{tau:10.3g} {rep.F_2g1 / F_th:10.4f} {g:10.4f} {e:10.4f}")

# Memory helps: at intermediate waits each outcome carries more than F_th.
# At gamma tau = 30 the chain is iid and the ratio returns to 1.
