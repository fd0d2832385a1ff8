"""
Квантовые состояния над составными пространствами: чистые состояния,
операторы плотности, верность (fidelity) и проективные измерения.

Порядок подсистем: A (старший индекс) ⊗ B ⊗ P (младший).
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from sim_config import DENSITY_TOL, NORM_TOL, ORTHO_TOL, PROB_FLOOR
from tensor_core import (
    ArrayLike,
    ComplexMatrix,
    ComplexVector,
    DimensionMismatchError,
    DomainPreconditionError,
    NotHermitianError,
    NotOrthonormalError,
    as_matrix,
    as_vector,
    hermitian_eig,
    hermitian_sqrt,
    hermiticity_defect,
    orthonormality_defect,
)

logger = logging.getLogger(__name__)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SpaceShape:
    factor_dims: Tuple[int, ...]

    def __post_init__(self):
        dims = tuple(int(d) for d in self.factor_dims)
        if not dims or any(d < 1 for d in dims):
            raise DomainPreconditionError(f"invalid factor dimensions {self.factor_dims}")
        object.__setattr__(self, 'factor_dims', dims)

    @property
    def dim(self) -> int:
        return int(np.prod(self.factor_dims))

    def without(self, index: int) -> 'SpaceShape':
        """Форма без одной подсистемы; для одиночной подсистемы остаётся (1,)."""
        rest = self.factor_dims[:index] + self.factor_dims[index + 1:]
        return SpaceShape(rest or (1,))

    def __add__(self, other: 'SpaceShape') -> 'SpaceShape':
        return SpaceShape(self.factor_dims + other.factor_dims)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: ComplexVector
    shape: SpaceShape

    def __post_init__(self):
        amps = as_vector(self.amplitudes)
        if amps.size != self.shape.dim:
            raise DimensionMismatchError(f"{amps.size} amplitudes for shape {self.shape.factor_dims}")
        deviation = abs(np.linalg.norm(amps) - 1.0)
        if deviation > NORM_TOL:
            raise DomainPreconditionError(f"state not normalized (norm deviation {deviation:.3e})")
        object.__setattr__(self, 'amplitudes', _frozen(amps))

    @classmethod
    def from_amplitudes(cls, amplitudes: ArrayLike, shape: Union[SpaceShape, Sequence[int], None] = None,
                        normalize: bool = False) -> 'PureState':
        """
        Создать состояние из амплитуд.

        Args:
            amplitudes: комплексные амплитуды
            shape: размерности подсистем (по умолчанию одна подсистема)
            normalize: перенормировать вектор вместо проверки нормы
        """
        amps = as_vector(amplitudes)
        if normalize:
            n = np.linalg.norm(amps)
            if n == 0:
                raise DomainPreconditionError("zero vector cannot be normalized")
            amps = amps / n
        if shape is None:
            shape = SpaceShape((amps.size,))
        elif not isinstance(shape, SpaceShape):
            shape = SpaceShape(tuple(shape))
        return cls(amps, shape)

    @classmethod
    def basis(cls, shape: Union[SpaceShape, Sequence[int], int], index: int) -> 'PureState':
        if isinstance(shape, int):
            shape = SpaceShape((shape,))
        elif not isinstance(shape, SpaceShape):
            shape = SpaceShape(tuple(shape))
        if not 0 <= index < shape.dim:
            raise DimensionMismatchError(f"basis index {index} outside dimension {shape.dim}")
        amps = np.zeros(shape.dim, dtype=np.complex128)
        amps[index] = 1.0
        return cls(amps, shape)

    @property
    def dim(self) -> int:
        return self.shape.dim

    def tensor(self, *others: 'PureState') -> 'PureState':
        """Произведение состояний |self⟩|other⟩...; формы склеиваются."""
        amps = self.amplitudes
        shape = self.shape
        for other in others:
            amps = np.kron(amps, other.amplitudes)
            shape = shape + other.shape
        return PureState(amps / np.linalg.norm(amps), shape)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: ComplexMatrix
    shape: SpaceShape

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape != (self.shape.dim, self.shape.dim):
            raise DimensionMismatchError(f"matrix {m.shape} for shape {self.shape.factor_dims}")
        defect = hermiticity_defect(m)
        if defect > DENSITY_TOL:
            raise NotHermitianError(f"density operator not Hermitian (defect {defect:.3e})")
        trace = complex(np.trace(m))
        if abs(trace - 1.0) > DENSITY_TOL:
            raise DomainPreconditionError(f"density operator trace {trace:.12g} != 1")
        values, _ = hermitian_eig(m)
        if values[0] < -DENSITY_TOL:
            raise DomainPreconditionError(f"density operator has eigenvalue {values[0]:.3e}")
        object.__setattr__(self, 'matrix', _frozen(m))

    @property
    def dim(self) -> int:
        return self.shape.dim


@dataclass(frozen=True)
class MeasurementOutcome:
    label: int
    probability: float
    post_state: Optional[Union[PureState, DensityOperator]]


# ========== ОПЕРАЦИИ ==========

def pure_to_density(psi: PureState) -> DensityOperator:
    """|ψ⟩⟨ψ|."""
    v = psi.amplitudes
    return DensityOperator(np.outer(v, v.conj()), psi.shape)


def fidelity(rho0: DensityOperator, rho1: DensityOperator) -> float:
    """
    F(ρ₀, ρ₁) = tr √(√ρ₀ ρ₁ √ρ₀).

    Returns:
        значение в [0, 1]
    """
    if rho0.dim != rho1.dim:
        raise DimensionMismatchError(f"fidelity of dimensions {rho0.dim} and {rho1.dim}")
    root0 = hermitian_sqrt(rho0.matrix)
    inner_op = root0 @ rho1.matrix @ root0
    inner_op = 0.5 * (inner_op + inner_op.conj().T)
    value = float(np.real(np.trace(hermitian_sqrt(inner_op))))
    return float(np.clip(value, 0.0, 1.0))


def pure_fidelity(psi0: PureState, psi1: PureState) -> float:
    """|⟨ψ₀|ψ₁⟩|, аналитическая верность для чистых состояний."""
    if psi0.dim != psi1.dim:
        raise DimensionMismatchError(f"fidelity of dimensions {psi0.dim} and {psi1.dim}")
    return float(min(1.0, abs(np.vdot(psi0.amplitudes, psi1.amplitudes))))


def _check_basis(basis: Sequence[ArrayLike], dim: int) -> List[ComplexVector]:
    vectors = [as_vector(b) for b in basis]
    if len(vectors) != dim or any(v.size != dim for v in vectors):
        raise DimensionMismatchError(f"measurement basis must hold {dim} vectors of length {dim}")
    defect = orthonormality_defect(vectors)
    if defect > ORTHO_TOL:
        raise NotOrthonormalError(f"measurement basis not orthonormal (defect {defect:.3e})")
    return vectors


def measure_projective(psi: PureState, basis: Sequence[ArrayLike]) -> List[MeasurementOutcome]:
    """
    Проективное измерение в полном ортонормированном базисе.

    Исход k имеет вероятность |⟨b_k|ψ⟩|² и пост-состояние b_k.
    """
    vectors = _check_basis(basis, psi.dim)
    outcomes = []
    for k, b in enumerate(vectors):
        prob = float(abs(np.vdot(b, psi.amplitudes)) ** 2)
        outcomes.append(MeasurementOutcome(k, prob, PureState.from_amplitudes(b, psi.shape, normalize=True)))
    return outcomes


def measure_subsystem(psi: PureState, factor_index: int, basis: Sequence[ArrayLike]) -> List[MeasurementOutcome]:
    """
    Измерение одной подсистемы составного состояния.

    Args:
        psi: состояние с явной формой подсистем
        factor_index: номер измеряемой подсистемы
        basis: ортонормированный базис этой подсистемы

    Returns:
        исходы с перенормированными условными состояниями остальных подсистем;
        у исходов с нулевой вероятностью post_state = None
    """
    dims = psi.shape.factor_dims
    if not 0 <= factor_index < len(dims):
        raise DimensionMismatchError(f"factor index {factor_index} outside {len(dims)} factors")
    vectors = _check_basis(basis, dims[factor_index])
    rest_shape = psi.shape.without(factor_index)
    tensor = psi.amplitudes.reshape(dims)

    outcomes = []
    for k, b in enumerate(vectors):
        conditional = np.tensordot(b.conj(), tensor, axes=([0], [factor_index])).reshape(-1)
        prob = float(np.real(np.vdot(conditional, conditional)))
        post = None
        if prob > PROB_FLOOR:
            post = PureState(conditional / np.sqrt(prob), rest_shape)
        outcomes.append(MeasurementOutcome(k, prob, post))
    return outcomes


# ========== СЛУЧАЙНЫЕ СОСТОЯНИЯ ==========

def random_pure_state(dim: int, rng: np.random.Generator) -> PureState:
    """Случайное состояние, равномерное по мере Хаара."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState.from_amplitudes(z, normalize=True)


def random_density_operator(dim: int, rng: np.random.Generator, rank: Optional[int] = None) -> DensityOperator:
    """Случайный оператор плотности заданного ранга (по умолчанию полного)."""
    rank = rank or dim
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    m = g @ g.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(m / np.real(np.trace(m)), SpaceShape((dim,)))
