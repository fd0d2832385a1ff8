"""
Плотная комплексная линейная алгебра для небольших гильбертовых пространств.

Векторы и матрицы хранятся как numpy.ndarray с dtype complex128. Все функции чистые:
входные массивы не изменяются.
"""

import logging
from typing import List, Sequence, Tuple, Union

import numpy as np
import scipy.linalg

from sim_config import DEPENDENCE_TOL, HERMITIAN_TOL, ORTHO_TOL, PSD_CLIP, UNITARY_TOL

logger = logging.getLogger(__name__)

ComplexVector = np.ndarray
ComplexMatrix = np.ndarray
ArrayLike = Union[np.ndarray, Sequence]


# ========== ОШИБКИ ==========

class SimulationError(ValueError):
    """Базовая ошибка симулятора."""


class DimensionMismatchError(SimulationError):
    pass


class NonFiniteError(SimulationError):
    pass


class NotHermitianError(SimulationError):
    pass


class NotPositiveSemidefiniteError(SimulationError):
    pass


class EigenConvergenceError(SimulationError):
    pass


class NotOrthonormalError(SimulationError):
    pass


class NotUnitaryError(SimulationError):
    pass


class DomainPreconditionError(SimulationError):
    """Нарушено предусловие предметной области (диапазон, нормировка и т.п.)."""


# ========== ПРЕОБРАЗОВАНИЕ ВХОДОВ ==========

def as_vector(v: ArrayLike) -> ComplexVector:
    """Привести вход к 1-D complex128 и проверить конечность."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise DimensionMismatchError(f"expected a non-empty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("vector contains NaN or infinity")
    return arr


def as_matrix(a: ArrayLike) -> ComplexMatrix:
    """Привести вход к 2-D complex128 и проверить конечность."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.size < 1:
        raise DimensionMismatchError(f"expected a non-empty matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("matrix contains NaN or infinity")
    return arr


def max_abs_diff(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) if np.size(a) else 0.0


def column_matrix(vectors: Sequence[ComplexVector]) -> ComplexMatrix:
    """Собрать векторы в матрицу по столбцам."""
    return np.column_stack([as_vector(v) for v in vectors])


# ========== БАЗОВЫЕ ОПЕРАЦИИ ==========

def matmul(a: ArrayLike, b: ArrayLike) -> ComplexMatrix:
    a = as_matrix(a)
    b = as_matrix(b)
    if a.shape[1] != b.shape[0]:
        raise DimensionMismatchError(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a: ArrayLike) -> ComplexMatrix:
    """Эрмитово сопряжение (сопряжённое транспонирование)."""
    return as_matrix(a).conj().T


def kron(a: ArrayLike, b: ArrayLike) -> np.ndarray:
    """
    Кронекерово произведение; левый множитель даёт старший индекс (A ⊗ B ⊗ P).

    Оба аргумента должны быть одного вида: оба вектора или обе матрицы.
    """
    a_arr = np.asarray(a, dtype=np.complex128)
    b_arr = np.asarray(b, dtype=np.complex128)
    if a_arr.ndim != b_arr.ndim:
        raise DimensionMismatchError("kron needs two vectors or two matrices")
    if a_arr.ndim == 1:
        return np.kron(as_vector(a_arr), as_vector(b_arr))
    return np.kron(as_matrix(a_arr), as_matrix(b_arr))


def inner(a: ArrayLike, b: ArrayLike) -> complex:
    """⟨a|b⟩, сопряжённо-линейное по первому аргументу."""
    a = as_vector(a)
    b = as_vector(b)
    if a.shape != b.shape:
        raise DimensionMismatchError(f"inner product of lengths {a.size} and {b.size}")
    return complex(np.vdot(a, b))


def norm(v: ArrayLike) -> float:
    return float(np.linalg.norm(as_vector(v)))


# ========== СПЕКТРАЛЬНЫЕ ОПЕРАЦИИ ==========

def hermiticity_defect(h: ComplexMatrix) -> float:
    return max_abs_diff(h, h.conj().T)


def hermitian_eig(h: ArrayLike) -> Tuple[np.ndarray, ComplexMatrix]:
    """
    Спектральное разложение эрмитовой матрицы.

    Returns:
        (собственные значения по возрастанию, матрица собственных векторов по столбцам)
    """
    h = as_matrix(h)
    if h.shape[0] != h.shape[1]:
        raise DimensionMismatchError(f"eigendecomposition needs a square matrix, got {h.shape}")
    defect = hermiticity_defect(h)
    if defect > HERMITIAN_TOL:
        raise NotHermitianError(f"matrix deviates from its adjoint by {defect:.3e}")
    sym = 0.5 * (h + h.conj().T)
    try:
        values, vectors = scipy.linalg.eigh(sym)
    except np.linalg.LinAlgError as e:
        raise EigenConvergenceError(f"eigendecomposition did not converge: {e}") from e
    return np.asarray(values, dtype=float), vectors


def hermitian_sqrt(h: ArrayLike) -> ComplexMatrix:
    """Положительный квадратный корень эрмитовой PSD-матрицы."""
    values, vectors = hermitian_eig(h)
    if values.size and values[0] < -PSD_CLIP:
        raise NotPositiveSemidefiniteError(f"eigenvalue {values[0]:.3e} below -{PSD_CLIP:g}")
    # шум округления вокруг нуля обнуляется: sqrt(1e-17) дал бы 3e-9
    floor = 64 * np.finfo(float).eps * max(1.0, float(np.max(np.abs(values))))
    roots = np.sqrt(np.where(values > floor, values, 0.0))
    return (vectors * roots) @ vectors.conj().T


# ========== ОРТОНОРМИРОВАНИЕ ==========

def _project_out(w: ComplexVector, basis: Sequence[ComplexVector]) -> ComplexVector:
    # модифицированный Грам–Шмидт: проекции снимаются последовательно с обновлённого w
    for q in basis:
        w = w - np.vdot(q, w) * q
    return w


def orthonormalize(vectors: Sequence[ArrayLike], tol: float = DEPENDENCE_TOL) -> Tuple[List[ComplexVector], int]:
    """
    Модифицированный Грам–Шмидт в порядке входа.

    Args:
        vectors: исходные векторы одной длины
        tol: векторы с нормой остатка меньше tol отбрасываются

    Returns:
        (ортонормированные векторы, число отброшенных)
    """
    if tol <= 0:
        raise DomainPreconditionError("tol must be positive")
    basis: List[ComplexVector] = []
    dropped = 0
    dim = None
    for raw in vectors:
        v = as_vector(raw)
        if dim is None:
            dim = v.size
        elif v.size != dim:
            raise DimensionMismatchError(f"vectors of lengths {dim} and {v.size}")
        norm_init = np.linalg.norm(v)
        w = _project_out(v.copy(), basis)
        if np.linalg.norm(w) < 0.7 * norm_init:
            w = _project_out(w, basis)
        residual = np.linalg.norm(w)
        if residual < tol:
            dropped += 1
            continue
        basis.append(w / residual)
    if dropped:
        logger.debug("orthonormalize dropped %d dependent vector(s)", dropped)
    return basis, dropped


def orthonormality_defect(vectors: Sequence[ComplexVector]) -> float:
    """Максимальное отклонение матрицы Грама от единичной."""
    if not vectors:
        return 0.0
    m = column_matrix(vectors)
    return max_abs_diff(m.conj().T @ m, np.eye(m.shape[1]))


def complete_basis(vectors: Sequence[ArrayLike], dim: int) -> List[ComplexVector]:
    """
    Дополнить ортонормированный набор до базиса пространства размерности dim.

    Канонические векторы e_0, e_1, ... добавляются по порядку индекса, зависимые
    пропускаются. Входные векторы остаются первыми и не изменяются.
    """
    if dim < 1:
        raise DomainPreconditionError("dim must be positive")
    basis = [as_vector(v) for v in vectors]
    for v in basis:
        if v.size != dim:
            raise DimensionMismatchError(f"vector of length {v.size} in dimension {dim}")
    if len(basis) > dim:
        raise DomainPreconditionError(f"{len(basis)} vectors cannot be orthonormal in dimension {dim}")
    defect = orthonormality_defect(basis)
    if defect > ORTHO_TOL:
        raise NotOrthonormalError(f"input vectors not orthonormal (defect {defect:.3e})")

    for index in range(dim):
        if len(basis) == dim:
            break
        e = np.zeros(dim, dtype=np.complex128)
        e[index] = 1.0
        w = _project_out(_project_out(e, basis), basis)
        residual = np.linalg.norm(w)
        if residual < DEPENDENCE_TOL:
            continue
        basis.append(w / residual)

    if len(basis) != dim:
        raise SimulationError(f"basis completion stalled at {len(basis)} of {dim} vectors")
    return basis


def is_unitary(u: ArrayLike, tol: float = UNITARY_TOL) -> Tuple[bool, float]:
    """
    Проверка UU⁺ = U⁺U = I.

    Returns:
        (residual <= tol, максимальное отклонение элементов обоих произведений от I)
    """
    u = as_matrix(u)
    if u.shape[0] != u.shape[1]:
        raise DimensionMismatchError(f"unitarity check needs a square matrix, got {u.shape}")
    eye = np.eye(u.shape[0])
    u_dag = u.conj().T
    residual = max(max_abs_diff(u @ u_dag, eye), max_abs_diff(u_dag @ u, eye))
    return residual <= tol, residual
