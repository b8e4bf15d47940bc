import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seqmetro.qcore import (SIGMA_MINUS, SIGMA_X, DensityMatrix, HamiltonianSpec, Superoperator,
                            dissipator, evolve, liouvillian, partial_trace, propagate,
                            random_density_matrix, random_unitary, spectrum, sprepost, unvec, vec)
from seqmetro.models import rabi_generator, thermo_generator, thermo_w_matrix


def test_vec_convention():
    rng = np.random.default_rng(0)
    A, B, R = (rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)) for _ in range(3))
    assert np.allclose(sprepost(A, B) @ vec(R), vec(A @ R @ B))
    assert np.allclose(unvec(vec(R)), R)


def test_dissipator_examples():
    D = dissipator(SIGMA_MINUS)
    assert np.allclose(D.apply(np.diag([0, 1])), np.diag([1, -1]))
    assert np.allclose(D.apply(np.diag([1, 0])), 0)
    plus = 0.5 * np.ones((2, 2))
    L = SIGMA_MINUS
    brute = L @ plus @ L.conj().T - 0.5 * (L.conj().T @ L @ plus + plus @ L.conj().T @ L)
    out = D.apply(plus)
    assert np.allclose(out, brute)
    assert np.isclose(out[0, 1], -0.25) and np.isclose(out[1, 0], -0.25)


def test_liouvillian_examples():
    assert np.allclose(liouvillian(None, [(2.0, SIGMA_MINUS)]).matrix, 2 * dissipator(SIGMA_MINUS).matrix)
    U = propagate(liouvillian(0.7 * SIGMA_X, []), np.pi / 2 / 0.7)
    assert np.allclose(evolve(U, np.diag([1.0, 0])).data, np.diag([0, 1.0]), atol=1e-12)
    with pytest.raises(ValueError):
        liouvillian(None, [(-1.0, SIGMA_MINUS)])


def test_thermo_generator_matches_w_on_diagonals():
    gen = thermo_generator(2, 1.0)
    W = thermo_w_matrix(2, 1.0)
    assert np.allclose(W, [[-1, 2], [1, -2]])
    for p in ([1, 0], [0, 1], [0.3, 0.7]):
        assert np.allclose(np.diag(gen.apply(np.diag(p))).real, W @ p)


def test_propagate_identity_and_thermal_limit():
    gen = thermo_generator(2, 1.0)
    assert np.array_equal(propagate(gen, 0).matrix, np.eye(4))
    P = propagate(gen, 30)
    for p in ([1, 0], [0, 1], [0.5, 0.5]):
        assert np.allclose(evolve(P, np.diag(p)).data, np.diag([2 / 3, 1 / 3]), atol=1e-9)
    with pytest.raises(ValueError):
        propagate(gen, -1)
    with pytest.raises(ValueError):
        propagate(gen, np.inf)


@settings(max_examples=30, deadline=None)
@given(t1=st.floats(0, 5), t2=st.floats(0, 5), omega=st.floats(0, 2))
def test_semigroup(t1, t2, omega):
    gen = rabi_generator(omega)
    lhs = (propagate(gen, t1) @ propagate(gen, t2)).matrix
    assert np.allclose(lhs, propagate(gen, t1 + t2).matrix, atol=1e-10)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_pade_vs_eig(d):
    rng = np.random.default_rng(d)
    H = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    H = H + H.conj().T
    jumps = [(rng.uniform(0.1, 2), rng.normal(size=(d, d))) for _ in range(2)]
    gen = liouvillian(H, jumps)
    for tau in (0.1, 1.0, 3.0):
        assert np.allclose(propagate(gen, tau, "pade").matrix, propagate(gen, tau, "eig").matrix,
                           atol=1e-10)


def test_positivity_random_inputs():
    rng = np.random.default_rng(1)
    for _ in range(100):
        d = int(rng.integers(2, 5))
        H = rng.normal(size=(d, d))
        gen = liouvillian(H + H.T, [(rng.uniform(0, 2), rng.normal(size=(d, d)))])
        rho = evolve(propagate(gen, rng.uniform(0, 5)), random_density_matrix(d, rng))
        assert np.linalg.eigvalsh(rho.data).min() > -1e-10
        assert abs(np.trace(rho.data) - 1) < 1e-10


def test_spectrum_examples():
    w = spectrum(liouvillian(None, [(1.0, SIGMA_MINUS)]))
    assert np.allclose(w, [0, -0.5, -0.5, -1], atol=1e-12)
    assert np.all(np.abs(spectrum(rabi_generator(0.05)).imag) < 1e-10)
    assert np.any(np.abs(spectrum(rabi_generator(1.0)).imag) > 1e-3)
    w = spectrum(rabi_generator(0.3))
    disc = np.sqrt(complex(1 - 64 * 0.3 ** 2))
    expected = [0, -0.5, -0.75 + 0.25 * disc, -0.75 - 0.25 * disc]
    assert np.allclose(sorted(w, key=lambda z: (z.real, z.imag)),
                       sorted(expected, key=lambda z: (z.real, z.imag)), atol=1e-12)


def test_partial_trace():
    rng = np.random.default_rng(2)
    rs, rc = random_density_matrix(2, rng), random_density_matrix(2, rng)
    assert np.allclose(partial_trace(np.kron(rs.data, rc.data), (2, 2), "S").data, rs.data)
    assert np.allclose(partial_trace(np.kron(rs.data, rc.data), (2, 2), 1).data, rc.data)
    bell = np.array([1, 0, 0, 1]) / np.sqrt(2)
    assert np.allclose(partial_trace(np.outer(bell, bell), (2, 2)).data, np.eye(2) / 2)
    for _ in range(100):
        joint = random_density_matrix(4, rng)
        assert abs(np.trace(partial_trace(joint, (2, 2)).data) - 1) < 1e-12


def test_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]))
    with pytest.raises(ValueError):
        HamiltonianSpec(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        Superoperator(np.eye(3))
    U = random_unitary(3, np.random.default_rng(0))
    assert np.allclose(U.conj().T @ U, np.eye(3))
