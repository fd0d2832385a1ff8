import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cloning_machine import (
    CloningAmplitudes,
    MachineConfig,
    NearIdenticalStatesError,
    apply_machine,
    asymmetric_amplitudes,
    branch_outcomes,
    build_machine,
    compute_amplitudes,
    golden_eq15_fixture,
    image_columns,
    machine_gram_report,
    postselect,
    qubit_example_states,
    target_vector,
)
from quantum_state import PureState, SpaceShape, pure_fidelity, random_pure_state
from tensor_core import DimensionMismatchError, DomainPreconditionError, is_unitary

GRID_S = [round(0.1 * k, 1) for k in range(10)]


def pair_with_overlap(n, s, rng=None):
    """Ψ₀ = |0⟩ и Ψ₁ с вещественным перекрытием s; остаток случайный при заданном rng."""
    psi0 = PureState.basis(n, 0)
    rest = np.zeros(n, dtype=complex)
    if rng is None:
        rest[1] = 1.0
    else:
        rest[1:] = rng.standard_normal(n - 1) + 1j * rng.standard_normal(n - 1)
        rest /= np.linalg.norm(rest)
    psi1 = PureState.from_amplitudes(s * psi0.amplitudes + math.sqrt(1 - s * s) * rest, normalize=True)
    return psi0, psi1


@pytest.mark.parametrize("s, a00, a01", [
    (0.0, 1.0, 0.0),
    (1 / 3, math.sqrt(3) / 2, 0.5),
    (0.5, 0.8164966, 0.5773503),
])
def test_compute_amplitudes(s, a00, a01):
    amp = compute_amplitudes(s)
    assert amp.a00 == pytest.approx(a00, abs=1e-7)
    assert amp.a01 == pytest.approx(a01, abs=1e-7)
    assert amp.symmetric


@pytest.mark.parametrize("s", [-0.1, 1.0, float('nan')])
def test_compute_amplitudes_rejects_out_of_range(s):
    with pytest.raises(DomainPreconditionError):
        compute_amplitudes(s)


def test_amplitudes_must_be_normalized():
    with pytest.raises(DomainPreconditionError):
        CloningAmplitudes(1.0, 0.1, 1.0, 0.0)


def test_orthogonal_states_clone_deterministically():
    machine = build_machine(PureState.basis(3, 0), PureState.basis(3, 2))
    assert machine.eta == pytest.approx(1.0)
    assert postselect(machine, machine.psi1).probability == pytest.approx(1.0, abs=1e-12)


def test_golden_qubit_machine():
    psi0, psi1 = qubit_example_states(math.pi / 6)
    assert psi1.amplitudes[0].real == pytest.approx(1 / 3)
    machine = build_machine(psi0, psi1)
    assert machine.eta == pytest.approx(0.75, abs=1e-12)
    assert is_unitary(machine.unitary)[1] <= 1e-10
    img0, img1 = golden_eq15_fixture(math.pi / 6)
    assert_allclose(machine.unitary[:, 0], img0.amplitudes, atol=1e-10)
    assert_allclose(machine.unitary[:, 4], img1.amplitudes, atol=1e-10)
    expected = {0b000: -1 / (2 * math.sqrt(6)), 0b100: 1 / (2 * math.sqrt(3)), 0b010: 1 / (2 * math.sqrt(3)),
                0b110: math.sqrt(2 / 3), 0b001: 1 / (2 * math.sqrt(2))}
    for index, value in expected.items():
        assert machine.unitary[index, 4].real == pytest.approx(value, abs=1e-10)
    assert machine.unitary[0, 0].real == pytest.approx(math.sqrt(3) / 2, abs=1e-10)
    assert machine.unitary[1, 0].real == pytest.approx(0.5, abs=1e-10)


@pytest.mark.parametrize("alpha", [math.pi / 12, math.pi / 6, 0.2, 0.7853 / 2])
def test_image_columns_match_golden_fixture(alpha):
    machine = build_machine(*qubit_example_states(alpha))
    actual = image_columns(machine)
    expected = golden_eq15_fixture(alpha)
    for a, e in zip(actual, expected):
        assert_allclose(a, e.amplitudes, atol=1e-10)


def test_golden_fixture_limits():
    img0, img1 = golden_eq15_fixture(0.0)
    assert_allclose(img0.amplitudes, PureState.basis((2, 2, 2), 0b000).amplitudes)
    assert_allclose(img1.amplitudes, PureState.basis((2, 2, 2), 0b110).amplitudes)
    for alpha in np.linspace(0.0, 0.78, 12):
        for img in golden_eq15_fixture(alpha):
            assert np.linalg.norm(img.amplitudes) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainPreconditionError):
        golden_eq15_fixture(math.pi / 4)


@pytest.mark.parametrize("n", [2, 3, 4])
@pytest.mark.parametrize("s", GRID_S)
def test_machine_grid(n, s, rng):
    psi0, psi1 = pair_with_overlap(n, s, rng)
    machine = build_machine(psi0, psi1)
    assert is_unitary(machine.unitary)[1] <= 1e-10
    assert machine.eta == pytest.approx(1 / (1 + s), abs=1e-10)
    assert machine.eta == pytest.approx(machine.amplitudes.a00 ** 2, abs=1e-12)
    assert machine_gram_report(machine).max_delta <= 1e-12
    for label in (0, 1):
        outcome = postselect(machine, machine.designated(label))
        assert outcome.success
        assert outcome.probability == pytest.approx(1 / (1 + s), abs=1e-9)
        assert outcome.clone_fidelity >= 1 - 1e-9


@pytest.mark.parametrize("s", [0.2, 0.6])
def test_failure_branch_erases_input(s, rng):
    psi0, psi1 = pair_with_overlap(3, s, rng)
    phi_ab = random_pure_state(9, rng)
    default = MachineConfig.default(3)
    config = MachineConfig(default.sigma, PureState(phi_ab.amplitudes, SpaceShape((3, 3))),
                           default.probe_success, default.probe_fail)
    machine = build_machine(psi0, psi1, config)
    for label in (0, 1):
        _, fail = branch_outcomes(machine, machine.designated(label))
        assert not fail.success
        assert fail.probability == pytest.approx(s / (1 + s), abs=1e-9)
        assert pure_fidelity(fail.post_state_ab, phi_ab) == pytest.approx(1.0, abs=1e-9)


def test_apply_machine_produces_branch_structure():
    psi0, psi1 = qubit_example_states(math.pi / 6)
    machine = build_machine(psi0, psi1)
    amp = machine.amplitudes
    out0 = apply_machine(machine, machine.psi0)
    out1 = apply_machine(machine, machine.psi1)
    assert_allclose(out0.amplitudes, target_vector(machine.psi0, amp.a00, amp.a01, machine.config), atol=1e-9)
    assert_allclose(out1.amplitudes, target_vector(machine.psi1, amp.a10, amp.a11, machine.config), atol=1e-9)
    assert out0.shape.factor_dims == (2, 2, 2)


def test_superposition_input_is_not_cloned():
    machine = build_machine(*qubit_example_states(math.pi / 6))
    mix = PureState.from_amplitudes(machine.psi0.amplitudes + machine.psi1.amplitudes, normalize=True)
    assert postselect(machine, mix).clone_fidelity < 1 - 1e-6


def test_phase_covariance(rng):
    psi0, psi1 = pair_with_overlap(3, 0.4, rng)
    plain = build_machine(psi0, psi1)
    phased = build_machine(psi0, PureState(psi1.amplitudes * np.exp(1j * math.pi / 4), psi1.shape))
    assert plain.rephase_angle == pytest.approx(0.0, abs=1e-12)
    assert phased.rephase_angle == pytest.approx(math.pi / 4, abs=1e-12)
    assert phased.eta == pytest.approx(plain.eta, abs=1e-10)
    for label in (0, 1):
        a = postselect(plain, plain.designated(label))
        b = postselect(phased, phased.designated(label))
        assert b.probability == pytest.approx(a.probability, abs=1e-10)
        assert b.clone_fidelity == pytest.approx(a.clone_fidelity, abs=1e-10)


def test_build_machine_preconditions():
    with pytest.raises(NearIdenticalStatesError):
        build_machine(PureState.basis(2, 0), PureState.basis(2, 0))
    with pytest.raises(DimensionMismatchError):
        build_machine(PureState.basis(2, 0), PureState.basis(3, 1))
    with pytest.raises(DomainPreconditionError):
        build_machine(PureState.basis(1, 0), PureState.basis(1, 0))
    bad = MachineConfig(PureState.basis(3, 0), PureState.basis((2, 2), 0),
                        PureState.basis(2, 0), PureState.basis(2, 1))
    with pytest.raises(DimensionMismatchError):
        build_machine(PureState.basis(2, 0), PureState.basis(2, 1), bad)


def test_probe_states_must_be_orthogonal():
    plus = PureState.from_amplitudes([1, 1], normalize=True)
    config = MachineConfig(PureState.basis(2, 0), PureState.basis((2, 2), 0), PureState.basis(2, 0), plus)
    with pytest.raises(DomainPreconditionError):
        build_machine(PureState.basis(2, 0), PureState.basis(2, 1), config)


def test_machine_is_immutable():
    machine = build_machine(*qubit_example_states(0.3))
    with pytest.raises(ValueError):
        machine.unitary[0, 0] = 0


@pytest.mark.parametrize("s, eta0", [
    (0.3, 0.5), (0.5, 0.7), (0.2, 0.9),
    # η₀ между 1 − s² и 1/(1+s²)
    (0.5, 0.78), (0.8, 0.6), (0.9, 0.55),
])
def test_asymmetric_machine(s, eta0, rng):
    amp = asymmetric_amplitudes(s, eta0)
    assert amp.eta0 == pytest.approx(eta0)
    gap = math.sqrt(amp.eta0 * amp.eta1) * s * s + math.sqrt((1 - amp.eta0) * (1 - amp.eta1)) - s
    assert abs(gap) <= 1e-12
    assert 0.5 * (amp.eta0 + amp.eta1) <= 1 / (1 + s) + 1e-12
    psi0, psi1 = pair_with_overlap(2, s, rng)
    machine = build_machine(psi0, psi1, amplitudes=amp)
    assert not amp.symmetric
    assert machine.eta == pytest.approx(0.5 * (amp.eta0 + amp.eta1))
    assert postselect(machine, machine.psi0).probability == pytest.approx(amp.eta0, abs=1e-9)
    assert postselect(machine, machine.psi1).probability == pytest.approx(amp.eta1, abs=1e-9)


def test_asymmetric_amplitudes_infeasible():
    with pytest.raises(DomainPreconditionError):
        asymmetric_amplitudes(0.5, 0.9)
    with pytest.raises(DomainPreconditionError):
        asymmetric_amplitudes(0.8, 0.62)
    with pytest.raises(DomainPreconditionError):
        asymmetric_amplitudes(0.9, 1.0)


@pytest.mark.parametrize("s", GRID_S)
def test_asymmetric_amplitudes_reproduce_symmetric_choice(s):
    amp = asymmetric_amplitudes(s, 1 / (1 + s))
    expected = compute_amplitudes(s)
    assert_allclose([amp.a00, amp.a01, amp.a10, amp.a11],
                    [expected.a00, expected.a01, expected.a10, expected.a11], atol=1e-10)


def test_asymmetric_amplitudes_at_feasibility_edge():
    s = 0.7
    amp = asymmetric_amplitudes(s, 1 / (1 + s * s))
    # на границе корень единственный: η₁ = y*² = s²/(1+s²)
    assert amp.eta1 == pytest.approx(s * s / (1 + s * s), abs=1e-6)
    gap = math.sqrt(amp.eta0 * amp.eta1) * s * s + math.sqrt((1 - amp.eta0) * (1 - amp.eta1)) - s
    assert abs(gap) <= 1e-12
