"""Measuring only "ground or not".

A two-outcome measurement loses nothing after a ground outcome, but after
an excited outcome the which-level information is gone. At low temperature
that column never beats the thermal Fisher information.
"""
import numpy as np

from seqmetro import ThermometryModel, thermal_fi, thermo_fisher

D = 4
for nbar in (0.1, 1.0):
    full, cg = ThermometryModel(D, nbar), ThermometryModel(D, nbar, "coarse")
    F_th = thermal_fi(D, nbar)
    print(f"\nnbar = {nbar}:  gamma tau, F21 full/F_th, F21 coarse/F_th, coarse excited column/F_th")
    for tau in np.geomspace(0.05, 20, 8):
        a = thermo_fisher(full, tau, tau, cross_check=False)
        b = thermo_fisher(cg, tau, tau, cross_check=False)
        print(f"  {tau:8.3f} {a.F_2g1 / F_th:8.4f} {b.F_2g1 / F_th:8.4f} {b.F_2g1_by_prev[1] / F_th:8.4f}")
