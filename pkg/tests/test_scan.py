import numpy as np
import pytest

from seqmetro.models import RabiModel, ThermometryModel, rabi_fisher, thermal_fi, thermo_f21
from seqmetro.scan import (Axis, ScanGrid, golden_section, local_maxima, maximize_1d, maximize_2d,
                           scan, scan_1d, thermo_f_sharp, thermo_f_star)


def test_axis_validation():
    with pytest.raises(ValueError):
        Axis("t", 0.1, 1.0, 1)
    with pytest.raises(ValueError):
        Axis("t", 1.0, 0.1, 10)
    with pytest.raises(ValueError):
        Axis("t", 0.0, 1.0, 10, "log")
    assert np.allclose(Axis("t", 1, 100, 3, "log").values(), [1, 10, 100])


def test_scan_constant_and_errors():
    g = scan_1d(lambda t: 3.0, ScanGrid.tau(0.1, 1, 5))
    assert np.all(g.values == 3.0)
    assert all("near-zero-fi" not in r.flags for r in g.records)

    def f(t):
        if t > 0.5:
            raise ValueError("boom")
        return t
    g = scan_1d(f, ScanGrid.tau(0.1, 1, 5, log=False))
    assert np.isnan(g.values[-1]) and g.records[-1].error == "boom"
    g2 = scan(lambda a, b: a * b, ScanGrid((Axis("a", 0, 1, 3), Axis("b", 0, 1, 4))))
    assert len(g2.records) == 12 and g2.best().point == (1.0, 1.0)


def test_thermo_enhancement_region():
    m = ThermometryModel(4, 1.0)
    g = scan_1d(lambda t: thermo_f21(m, t), ScanGrid.tau())
    assert len(g.records) == 200
    assert g.values.max() / thermal_fi(4, 1.0) > 1


def test_rabi_near_zero_flags():
    g = scan_1d(lambda t: rabi_fisher(RabiModel(1.0, t)), ScanGrid.tau(0.01, 10, 400, log=False))
    assert any("near-zero-fi" in r.flags for r in g.records)
    assert len(local_maxima(g.values)) >= 2


def test_local_maxima():
    assert local_maxima([0, 1, 0, 2, 2, 0, 3]) == [1, 3]
    assert local_maxima([1, 2, 3]) == []


def test_maximize_1d():
    res = maximize_1d(lambda t: -(t - 1) ** 2, np.linspace(0, 3, 31))
    assert abs(res.argmax[0] - 1) < 1e-4 and abs(res.value) < 1e-8 and res.converged
    res = maximize_1d(lambda t: t, np.linspace(0, 3, 31))
    assert "boundary" in res.flags and res.argmax[0] == 3
    x, fx, _ = golden_section(lambda t: np.sin(t), 0, 3, tol=1e-8)
    assert abs(x - np.pi / 2) < 1e-6


def test_maximize_2d():
    res = maximize_2d(lambda a, b: -(a - 1) ** 2 - (b - 2) ** 2, (0.5, 0.5), tol=1e-6)
    assert np.allclose(res.argmax, (1, 2), atol=1e-5) and res.converged
    # clamp keeps waiting times non-negative
    res = maximize_2d(lambda a, b: -a - b, (0.5, 0.5))
    assert min(res.argmax) >= 0


def test_f_star_and_sharp():
    m = ThermometryModel(4, 1.0)
    star = thermo_f_star(m)
    assert star.value > thermal_fi(4, 1.0)
    sharp = thermo_f_sharp(m, star)
    assert sharp.value >= star.value - 1e-10
    ratios = []
    for D in (3, 4, 5, 6):
        mm = ThermometryModel(D, 1.0)
        st = thermo_f_star(mm)
        ratios.append(thermo_f_sharp(mm, st).value / st.value)
    assert all(b >= a for a, b in zip(ratios, ratios[1:]))
