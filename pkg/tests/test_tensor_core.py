import math

import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.stats import unitary_group

from conftest import random_complex
from tensor_core import (
    DimensionMismatchError,
    NonFiniteError,
    NotHermitianError,
    NotOrthonormalError,
    NotPositiveSemidefiniteError,
    adjoint,
    column_matrix,
    complete_basis,
    hermitian_eig,
    hermitian_sqrt,
    inner,
    is_unitary,
    kron,
    matmul,
    norm,
    orthonormality_defect,
    orthonormalize,
)

FLIP = [[0, 1], [1, 0]]


def test_matmul_identity_and_flip():
    assert_allclose(matmul(np.eye(2), np.eye(2)), np.eye(2))
    assert_allclose(matmul(FLIP, FLIP), np.eye(2))


def test_matmul_with_adjoint_is_hermitian(rng):
    a = random_complex(rng, 3, 3)
    h = matmul(a, adjoint(a))
    assert_allclose(h, adjoint(h), atol=1e-12)


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionMismatchError):
        matmul(np.eye(2), np.eye(3))


def test_non_finite_input_rejected():
    with pytest.raises(NonFiniteError):
        matmul([[np.nan, 0], [0, 1]], np.eye(2))


def test_adjoint_examples(rng):
    sym = np.array([[1.0, 2.0], [2.0, 5.0]])
    assert_allclose(adjoint(sym), sym)
    assert_allclose(adjoint([[1j]]), [[-1j]])
    a = random_complex(rng, 4, 3)
    assert_allclose(adjoint(adjoint(a)), a)


def test_adjoint_of_product_reverses_order(rng):
    a = random_complex(rng, 3, 4)
    b = random_complex(rng, 4, 2)
    assert_allclose(adjoint(matmul(a, b)), matmul(adjoint(b), adjoint(a)), atol=1e-12)


def test_kron_ordering():
    assert_allclose(kron([1, 0], [0, 1]), [0, 1, 0, 0])
    assert_allclose(kron(np.eye(2), np.eye(2)), np.eye(4))


def test_kron_inner_product_factorizes(rng):
    a, b, c, d = (random_complex(rng, 3) for _ in range(4))
    lhs = inner(kron(a, b), kron(c, d))
    assert lhs == pytest.approx(inner(a, c) * inner(b, d), abs=1e-10)


def test_kron_is_associative(rng):
    a, b, c = random_complex(rng, 2), random_complex(rng, 3), random_complex(rng, 2)
    assert np.array_equal(kron(kron(a, b), c), kron(a, kron(b, c)))


def test_kron_rejects_mixed_kinds():
    with pytest.raises(DimensionMismatchError):
        kron([1, 0], np.eye(2))


def test_inner_examples():
    v = np.array([1 + 2j, 3 - 1j])
    assert inner(v, v) == pytest.approx(norm(v) ** 2)
    assert inner([1, 0], [0, 1]) == 0
    theta = 0.4
    assert inner([1, 0], [math.cos(theta), math.sin(theta)]).real == pytest.approx(math.cos(theta))


def test_inner_is_conjugate_linear_in_first_argument():
    assert inner([1j, 0], [1, 0]) == pytest.approx(-1j)


def test_inner_length_mismatch():
    with pytest.raises(DimensionMismatchError):
        inner([1, 0], [1, 0, 0])


@pytest.mark.parametrize("matrix, expected", [
    (np.eye(3), [1, 1, 1]),
    (FLIP, [-1, 1]),
    (np.diag([0.25, 0.75]), [0.25, 0.75]),
])
def test_hermitian_eig_examples(matrix, expected):
    values, _ = hermitian_eig(matrix)
    assert_allclose(values, expected, atol=1e-12)


def test_hermitian_eig_reconstructs(rng):
    a = random_complex(rng, 6, 6)
    h = a + a.conj().T
    values, vectors = hermitian_eig(h)
    assert np.all(np.diff(values) >= 0)
    assert_allclose(vectors.conj().T @ vectors, np.eye(6), atol=1e-12)
    assert np.max(np.abs(vectors @ np.diag(values) @ vectors.conj().T - h)) <= 1e-10


def test_hermitian_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitianError):
        hermitian_eig([[0, 1], [0, 0]])


def test_hermitian_sqrt_examples():
    assert_allclose(hermitian_sqrt(np.eye(4)), np.eye(4), atol=1e-12)
    assert_allclose(hermitian_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-12)


@pytest.mark.parametrize("dim", [2, 5, 9, 16])
def test_hermitian_sqrt_round_trip(rng, dim):
    a = random_complex(rng, dim, dim)
    h = a @ a.conj().T
    r = hermitian_sqrt(h)
    assert_allclose(r, r.conj().T, atol=1e-12)
    assert np.max(np.abs(r @ r - h)) <= 1e-9 * max(1.0, np.max(np.abs(h)))


def test_hermitian_sqrt_clips_round_off_and_rejects_indefinite():
    assert_allclose(hermitian_sqrt(np.diag([1.0, -1e-13])), np.diag([1.0, 0.0]), atol=1e-12)
    with pytest.raises(NotPositiveSemidefiniteError):
        hermitian_sqrt(np.diag([1.0, -1e-6]))


def test_orthonormalize_keeps_orthonormal_input():
    vectors, dropped = orthonormalize([[1, 0, 0], [0, 1, 0]])
    assert dropped == 0
    assert_allclose(vectors, [[1, 0, 0], [0, 1, 0]])


def test_orthonormalize_drops_dependent_vector():
    vectors, dropped = orthonormalize([[1, 0], [1, 0]])
    assert dropped == 1
    assert len(vectors) == 1
    assert_allclose(vectors[0], [1, 0])


def test_orthonormalize_hand_example():
    r = 1 / math.sqrt(2)
    vectors, _ = orthonormalize([[r, r, 0], [1, 0, 0]])
    assert_allclose(vectors[0], [r, r, 0], atol=1e-15)
    assert_allclose(vectors[1], [r, -r, 0], atol=1e-12)


def test_orthonormalize_is_idempotent(rng):
    vectors, _ = orthonormalize(list(random_complex(rng, 4, 6)))
    assert orthonormality_defect(vectors) <= 1e-12
    again, dropped = orthonormalize(vectors)
    assert dropped == 0
    assert_allclose(again, vectors, atol=1e-12)


def test_complete_basis_examples():
    basis = complete_basis([[1, 0, 0], [0, 1, 0]], 3)
    assert_allclose(basis[2], [0, 0, 1])
    assert_allclose(complete_basis([], 2), np.eye(2))
    r = 1 / math.sqrt(2)
    basis = complete_basis([[r, r]], 2)
    assert_allclose(basis[1], [r, -r], atol=1e-12)


def test_complete_basis_is_unitary(rng):
    start, _ = orthonormalize(list(random_complex(rng, 3, 7)))
    basis = complete_basis(start, 7)
    assert_allclose(basis[:3], start)
    ok, residual = is_unitary(column_matrix(basis))
    assert ok and residual <= 1e-10


def test_complete_basis_rejects_non_orthonormal():
    with pytest.raises(NotOrthonormalError):
        complete_basis([[1, 0], [1, 1]], 2)


def test_is_unitary_examples():
    assert is_unitary(np.eye(8)) == (True, 0.0)
    ok, residual = is_unitary(np.diag([1.0, 2.0]))
    assert not ok
    assert residual == pytest.approx(3.0)
    ok, residual = is_unitary(unitary_group.rvs(5, random_state=3))
    assert ok


def test_is_unitary_requires_square():
    with pytest.raises(DimensionMismatchError):
        is_unitary(np.ones((2, 3)))
