import numpy as np
import pytest

from seqmetro.channels import (POVM, MeasureEvolveStep, ProjectiveBasis, collapse, collision_povm,
                               outcome_probabilities, step)
from seqmetro.models import ThermometryModel, thermal_distribution, thermo_generator, thermo_measurement
from seqmetro.qcore import DensityMatrix, random_density_matrix, random_unitary

SWAP = np.eye(4)[[0, 2, 1, 3]]


def test_outcome_probabilities_examples():
    comp = ProjectiveBasis.computational(2)
    assert np.allclose(outcome_probabilities(DensityMatrix.basis(2, 0), comp), [1, 0])
    for th, ph in [(0, 0), (np.pi / 2, 0), (1.1, 0.4)]:
        assert np.allclose(outcome_probabilities(np.eye(2) / 2, ProjectiveBasis.bloch(th, ph)), [0.5, 0.5])
    q, _ = thermal_distribution(4, 1.0)
    assert np.allclose(q, [0.4, 0.2, 0.2, 0.2])
    assert np.allclose(outcome_probabilities(np.diag(q), ProjectiveBasis.computational(4)), q)


def test_collapse():
    rng = np.random.default_rng(3)
    comp = ProjectiveBasis.computational(3)
    for k in range(3):
        out = collapse(random_density_matrix(3, rng), comp, k)
        assert np.array_equal(out.data, np.diag(np.eye(3)[k]).astype(complex))
    cg = thermo_measurement(ThermometryModel(4, 1.0, "coarse"))
    q, _ = thermal_distribution(4, 1.0)
    assert np.allclose(collapse(np.diag(q), cg, 1).data, np.diag([0, 1 / 3, 1 / 3, 1 / 3]))
    with pytest.raises(ValueError):
        collapse(DensityMatrix.basis(2, 0), ProjectiveBasis.computational(2), 1)


def test_step_examples():
    rng = np.random.default_rng(4)
    gen = thermo_generator(2, 1.0)
    s = MeasureEvolveStep.from_generator(ProjectiveBasis.computational(2), gen, 1.0)
    a = step(random_density_matrix(2, rng), s, 0).data
    b = step(random_density_matrix(2, rng), s, 0).data
    assert np.allclose(a, b, atol=1e-12)
    p00 = 1 - (1 / 3) * (1 - np.exp(-3))
    assert np.isclose(p00, 0.68326, atol=1e-5)
    assert np.allclose(a, np.diag([p00, 1 - p00]), atol=1e-12)
    s0 = MeasureEvolveStep.from_generator(ProjectiveBasis.computational(2), gen, 0.0)
    assert np.allclose(step(np.eye(2) / 2, s0, 1).data, np.diag([0, 1]))


def test_collision_povm():
    comp = ProjectiveBasis.computational(2)
    rng = np.random.default_rng(5)
    rc = random_density_matrix(2, rng)
    E = collision_povm(SWAP, rc, comp).effects
    assert np.allclose(E[0], np.diag([1, 0])) and np.allclose(E[1], np.diag([0, 1]))
    E = collision_povm(np.eye(4), rc, comp).effects
    for i in range(2):
        assert np.allclose(E[i], rc.data[i, i].real * np.eye(2))
    for _ in range(100):
        U, rc, rs = random_unitary(4, rng), random_density_matrix(2, rng), random_density_matrix(2, rng)
        povm = collision_povm(U, rc, comp)
        assert np.allclose(sum(povm.effects), np.eye(2), atol=1e-12)
        joint = U @ np.kron(rs.data, rc.data) @ U.conj().T
        pj = [np.trace(joint @ np.kron(np.eye(2), comp.projector(i))).real for i in range(2)]
        assert np.allclose(outcome_probabilities(rs, povm), pj, atol=1e-12)


def test_povm_validation():
    with pytest.raises(ValueError):
        POVM((np.diag([1.0, 0]), np.diag([0, 0.5])))
    with pytest.raises(ValueError):
        ProjectiveBasis(np.array([[1, 1], [0, 1]]))
    with pytest.raises(ValueError):
        MeasureEvolveStep.from_generator(ProjectiveBasis.computational(2), thermo_generator(2, 1), -1)
