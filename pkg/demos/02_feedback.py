"""Outcome-conditioned waiting times.

Waiting tau_g after finding the ground state and tau_e after an excited
state can only help: the common-tau schedule F* is a special case of the
two-tau schedule F#. The gain grows with the number of levels.
"""
from seqmetro import ThermometryModel, thermal_fi, thermo_f_sharp, thermo_f_star

nbar = 1.0
print(f"{'D':>3} {'F_th':>8} {'F*':>8} {'tau*':>7} {'F#':>8} {'tau_g':>7} {'tau_e':>7} {'F#/F*':>7}")
for D in (3, 4, 5, 6):
    m = ThermometryModel(D, nbar)
    star = thermo_f_star(m)
    sharp = thermo_f_sharp(m, star)
    tg, te = sharp.argmax
    print(f"{D:3d} {thermal_fi(D, nbar):8.4f} {star.value:8.4f} {star.argmax[0]:7.3f} "
          f"{sharp.value:8.4f} {tg:7.3f} {te:7.3f} {sharp.value / star.value:7.4f}")

# The optimal schedule re-measures quickly after a ground outcome and waits
# longer after an excited one.
