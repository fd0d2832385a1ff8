"""
Конструктивный синтез унитарных операторов.

lemma1_unitary: ортонормированный набор -> ортонормированный набор,
    U = Σ |φ̃_i⟩⟨φ_i| после дополнения обоих наборов до базисов.
lemma2_unitary: пара векторов -> пара векторов с той же матрицей Грама,
    через ортонормирование пар и сведение к lemma1_unitary.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from sim_config import GRAM_TOL, ORTHO_TOL, PARALLEL_TOL
from tensor_core import (
    ArrayLike,
    ComplexMatrix,
    ComplexVector,
    DimensionMismatchError,
    DomainPreconditionError,
    NotOrthonormalError,
    as_vector,
    column_matrix,
    complete_basis,
    orthonormality_defect,
)

logger = logging.getLogger(__name__)


class GramMismatchError(DomainPreconditionError):
    """Матрицы Грама исходной и целевой пар не совпадают."""


@dataclass(frozen=True)
class GramCheckReport:
    norm0_delta: float
    norm1_delta: float
    cross_delta: float
    passed: bool

    @property
    def max_delta(self) -> float:
        return max(self.norm0_delta, self.norm1_delta, self.cross_delta)


@dataclass(frozen=True, eq=False)
class OrthonormalizationPair:
    gamma0: float
    gamma1: float
    e0: ComplexVector
    e1: ComplexVector  # нулевой вектор, если пара параллельна

    @property
    def parallel(self) -> bool:
        return self.gamma1 < PARALLEL_TOL


def _same_dim(*vectors: ComplexVector) -> int:
    dims = {v.size for v in vectors}
    if len(dims) != 1:
        raise DimensionMismatchError(f"vectors of different lengths {sorted(dims)}")
    return dims.pop()


def lemma1_unitary(sources: Sequence[ArrayLike], targets: Sequence[ArrayLike], dim: int) -> ComplexMatrix:
    """
    Унитарный оператор, переводящий ортонормированные sources в ортонормированные targets.

    Args:
        sources: k ортонормированных векторов
        targets: k ортонормированных векторов
        dim: размерность пространства

    Returns:
        U размера dim x dim с U·sources[i] = targets[i]
    """
    src = [as_vector(v) for v in sources]
    tgt = [as_vector(v) for v in targets]
    if len(src) != len(tgt):
        raise DimensionMismatchError(f"{len(src)} sources but {len(tgt)} targets")
    if len(src) > dim:
        raise DomainPreconditionError(f"{len(src)} vectors exceed dimension {dim}")
    for label, vecs in (('sources', src), ('targets', tgt)):
        defect = orthonormality_defect(vecs)
        if defect > ORTHO_TOL:
            raise NotOrthonormalError(f"{label} not orthonormal (defect {defect:.3e})")

    src_basis = complete_basis(src, dim)
    tgt_basis = complete_basis(tgt, dim)
    # U = Σ |t_i⟩⟨s_i|
    return column_matrix(tgt_basis) @ column_matrix(src_basis).conj().T


def check_gram(phi0: ArrayLike, phi1: ArrayLike, tphi0: ArrayLike, tphi1: ArrayLike,
               tol: float = GRAM_TOL) -> GramCheckReport:
    """Сравнить три скалярных произведения исходной и целевой пар."""
    phi0, phi1, tphi0, tphi1 = (as_vector(v) for v in (phi0, phi1, tphi0, tphi1))
    _same_dim(phi0, phi1, tphi0, tphi1)
    norm0_delta = abs(np.vdot(phi0, phi0).real - np.vdot(tphi0, tphi0).real)
    norm1_delta = abs(np.vdot(phi1, phi1).real - np.vdot(tphi1, tphi1).real)
    cross_delta = abs(np.vdot(phi0, phi1) - np.vdot(tphi0, tphi1))
    passed = max(norm0_delta, norm1_delta, cross_delta) <= tol
    return GramCheckReport(float(norm0_delta), float(norm1_delta), float(cross_delta), bool(passed))


def lemma2_frame(phi0: ArrayLike, phi1: ArrayLike) -> OrthonormalizationPair:
    """
    Ортонормирование пары по формулам леммы 2.

    γ₀ = ‖φ₀‖, γ₁ = ‖φ₁ − (⟨φ₀|φ₁⟩/γ₀²) φ₀‖,
    e₀ = φ₀/γ₀, e₁ = (φ₁ − (⟨φ₀|φ₁⟩/γ₀²) φ₀)/γ₁.
    """
    phi0 = as_vector(phi0)
    phi1 = as_vector(phi1)
    _same_dim(phi0, phi1)
    gamma0 = float(np.linalg.norm(phi0))
    if gamma0 < PARALLEL_TOL:
        raise DomainPreconditionError("first vector of the pair is (numerically) zero")
    residual = phi1 - (np.vdot(phi0, phi1) / gamma0 ** 2) * phi0
    gamma1 = float(np.linalg.norm(residual))
    e0 = phi0 / gamma0
    if gamma1 < PARALLEL_TOL:
        return OrthonormalizationPair(gamma0, gamma1, e0, np.zeros_like(e0))
    e1 = residual / gamma1
    # повторная проекция убирает ошибку округления при малых γ₁
    e1 = e1 - np.vdot(e0, e1) * e0
    e1 = e1 / np.linalg.norm(e1)
    return OrthonormalizationPair(gamma0, gamma1, e0, e1)


def lemma2_unitary(phi0: ArrayLike, phi1: ArrayLike, tphi0: ArrayLike, tphi1: ArrayLike) -> ComplexMatrix:
    """
    Унитарный U с U·φ₀ = φ̃₀ и U·φ₁ = φ̃₁ для пар с совпадающей матрицей Грама.

    Raises:
        GramMismatchError: если условия на скалярные произведения нарушены
    """
    phi0, phi1, tphi0, tphi1 = (as_vector(v) for v in (phi0, phi1, tphi0, tphi1))
    dim = _same_dim(phi0, phi1, tphi0, tphi1)
    report = check_gram(phi0, phi1, tphi0, tphi1, GRAM_TOL)
    if not report.passed:
        raise GramMismatchError(
            f"Gram conditions violated: norm0 {report.norm0_delta:.3e}, "
            f"norm1 {report.norm1_delta:.3e}, cross {report.cross_delta:.3e}"
        )

    source = lemma2_frame(phi0, phi1)
    target = lemma2_frame(tphi0, tphi1)
    if source.parallel != target.parallel:
        which, other = ('sources', 'targets') if source.parallel else ('targets', 'sources')
        gammas = f"source gamma1={source.gamma1:.3e}, target gamma1={target.gamma1:.3e}"
        raise GramMismatchError(f"{which} are parallel while {other} are not ({gammas})")
    if source.parallel:
        logger.debug("lemma2: parallel sources (gamma1=%.3e), one-vector completion", source.gamma1)
        return lemma1_unitary([source.e0], [target.e0], dim)
    return lemma1_unitary([source.e0, source.e1], [target.e0, target.e1], dim)


def mapping_residual(u: ComplexMatrix, sources: Sequence[ArrayLike], targets: Sequence[ArrayLike]) -> float:
    """max |U·source_i − target_i| по всем элементам."""
    worst = 0.0
    for s, t in zip(sources, targets):
        worst = max(worst, float(np.max(np.abs(u @ as_vector(s) - as_vector(t)))))
    return worst


def frame_vectors(pair: OrthonormalizationPair) -> List[ComplexVector]:
    return [pair.e0] if pair.parallel else [pair.e0, pair.e1]
