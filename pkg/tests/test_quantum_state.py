import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from quantum_state import (
    DensityOperator,
    PureState,
    SpaceShape,
    fidelity,
    measure_projective,
    measure_subsystem,
    pure_fidelity,
    pure_to_density,
    random_density_operator,
    random_pure_state,
)
from tensor_core import DimensionMismatchError, DomainPreconditionError, NotOrthonormalError

R2 = 1 / math.sqrt(2)


@pytest.fixture
def filter_pair():
    return PureState.from_amplitudes([R2, 0, R2]), PureState.from_amplitudes([0, R2, R2])


def test_space_shape():
    shape = SpaceShape((3, 3, 2))
    assert shape.dim == 18
    assert shape.without(2).factor_dims == (3, 3)
    assert SpaceShape((2,)).without(0).factor_dims == (1,)
    with pytest.raises(DomainPreconditionError):
        SpaceShape((2, 0))


def test_pure_state_checks_norm_and_length():
    with pytest.raises(DomainPreconditionError):
        PureState.from_amplitudes([1, 1])
    with pytest.raises(DimensionMismatchError):
        PureState.from_amplitudes([1, 0, 0], shape=(2, 2))
    psi = PureState.from_amplitudes([1, 1], normalize=True)
    assert_allclose(psi.amplitudes, [R2, R2])
    assert not psi.amplitudes.flags.writeable


def test_basis_and_tensor():
    ket = PureState.basis(2, 0).tensor(PureState.basis(2, 1), PureState.basis(2, 1))
    assert ket.shape.factor_dims == (2, 2, 2)
    assert_allclose(ket.amplitudes, PureState.basis((2, 2, 2), 3).amplitudes)


def test_pure_to_density_examples(rng):
    assert_allclose(pure_to_density(PureState.basis(2, 0)).matrix, [[1, 0], [0, 0]])
    plus = PureState.from_amplitudes([R2, R2])
    assert_allclose(pure_to_density(plus).matrix, np.full((2, 2), 0.5), atol=1e-15)
    rho = pure_to_density(random_pure_state(5, rng))
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)


def test_density_operator_validation():
    with pytest.raises(DomainPreconditionError):
        DensityOperator(np.diag([0.5, 0.4]), SpaceShape((2,)))
    with pytest.raises(DomainPreconditionError):
        DensityOperator(np.diag([1.5, -0.5]), SpaceShape((2,)))


def test_fidelity_examples(filter_pair):
    psi0, psi1 = filter_pair
    rho0, rho1 = pure_to_density(psi0), pure_to_density(psi1)
    assert fidelity(rho0, rho0) == pytest.approx(1.0, abs=1e-9)
    assert fidelity(rho0, rho1) == pytest.approx(0.5, abs=1e-12)
    s1 = pure_to_density(PureState.basis(3, 0))
    s2 = pure_to_density(PureState.basis(3, 1))
    assert fidelity(s1, s2) == pytest.approx(0.0, abs=1e-12)


def test_pure_fidelity_examples(filter_pair):
    assert pure_fidelity(*filter_pair) == pytest.approx(0.5)
    assert pure_fidelity(PureState.basis(2, 0), PureState.basis(2, 0)) == pytest.approx(1.0)
    assert pure_fidelity(PureState.basis(2, 0), PureState.basis(2, 1)) == 0.0
    with pytest.raises(DimensionMismatchError):
        pure_fidelity(PureState.basis(2, 0), PureState.basis(3, 0))


@pytest.mark.parametrize("dim", range(2, 9))
def test_fidelity_agrees_with_pure_fidelity(rng, dim):
    for _ in range(5):
        psi0, psi1 = random_pure_state(dim, rng), random_pure_state(dim, rng)
        general = fidelity(pure_to_density(psi0), pure_to_density(psi1))
        assert general == pytest.approx(pure_fidelity(psi0, psi1), abs=1e-9)


@pytest.mark.parametrize("dim", [2, 4, 6])
def test_fidelity_symmetric_and_bounded(rng, dim):
    rho0 = random_density_operator(dim, rng)
    rho1 = random_density_operator(dim, rng, rank=1)
    f01, f10 = fidelity(rho0, rho1), fidelity(rho1, rho0)
    assert 0.0 <= f01 <= 1.0
    assert f01 == pytest.approx(f10, abs=1e-9)
    assert fidelity(rho0, rho0) == pytest.approx(1.0, abs=1e-9)


def test_measure_projective_filter_state(filter_pair):
    outcomes = measure_projective(filter_pair[0], np.eye(3))
    assert_allclose([o.probability for o in outcomes], [0.5, 0.0, 0.5], atol=1e-15)
    assert_allclose(outcomes[2].post_state.amplitudes, [0, 0, 1])


def test_measure_projective_examples():
    outcomes = measure_projective(PureState.basis(3, 1), np.eye(3))
    assert [o.probability for o in outcomes] == [0.0, 1.0, 0.0]
    uniform = PureState.from_amplitudes(np.ones(3), normalize=True)
    assert_allclose([o.probability for o in measure_projective(uniform, np.eye(3))], [1 / 3] * 3)


def test_measure_projective_random_basis(rng):
    psi = random_pure_state(6, rng)
    basis = list(unitary_group.rvs(6, random_state=rng).T)
    probs = [o.probability for o in measure_projective(psi, basis)]
    assert min(probs) >= 0.0
    assert sum(probs) == pytest.approx(1.0, abs=1e-10)


def test_measure_projective_rejects_bad_basis():
    with pytest.raises(DimensionMismatchError):
        measure_projective(PureState.basis(3, 0), np.eye(3)[:2])
    with pytest.raises(NotOrthonormalError):
        measure_projective(PureState.basis(2, 0), [[1, 0], [1, 1]])


@pytest.mark.parametrize("alpha", [math.pi / 6, 0.3])
def test_measure_subsystem_probe(alpha):
    amps = np.zeros(8)
    amps[0b000] = math.cos(alpha)
    amps[0b001] = math.sin(alpha)
    psi = PureState(amps, SpaceShape((2, 2, 2)))
    success, fail = measure_subsystem(psi, 2, np.eye(2))
    assert success.probability == pytest.approx(math.cos(alpha) ** 2, abs=1e-12)
    assert success.post_state.shape.factor_dims == (2, 2)
    assert_allclose(success.post_state.amplitudes, [1, 0, 0, 0], atol=1e-12)
    assert_allclose(fail.post_state.amplitudes, [1, 0, 0, 0], atol=1e-12)


def test_measure_subsystem_on_product_state(rng):
    a, b, c = random_pure_state(2, rng), random_pure_state(3, rng), random_pure_state(2, rng)
    psi = a.tensor(b, c)
    for outcome in measure_subsystem(psi, 1, np.eye(3)):
        assert outcome.post_state is not None
        assert np.linalg.norm(outcome.post_state.amplitudes) == pytest.approx(1.0, abs=1e-10)
        assert pure_fidelity(outcome.post_state, a.tensor(c)) == pytest.approx(1.0, abs=1e-10)


def test_measure_subsystem_zero_probability_has_no_post_state():
    psi = PureState.basis((2, 2), 0)
    outcomes = measure_subsystem(psi, 0, np.eye(2))
    assert outcomes[1].probability == 0.0
    assert outcomes[1].post_state is None


def test_measure_subsystem_index_out_of_range():
    with pytest.raises(DimensionMismatchError):
        measure_subsystem(PureState.basis((2, 2), 0), 2, np.eye(2))
