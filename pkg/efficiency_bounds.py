"""
Границы эффективности вероятностного клонирования.

Для любой машины U(|Ψ_s⟩|Σ⟩|m_p⟩) = √η_s |Ψ_s⟩|Ψ_s⟩|m_s⟩ + √(1−η_s) |Φ^s⟩
при условии ⟨m_j|Φ^s⟩ = 0 выполняется

    s − √(η₀η₁) s² ⟨m₀|m₁⟩ ≤ √((1−η₀)(1−η₁)),
    (η₀+η₁)/2 ≤ (1−s)/(1−s²⟨m₀|m₁⟩) ≤ 1/(1+s).
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from cloning_machine import CloningMachine, NearIdenticalStatesError
from quantum_state import PureState
from sim_config import NEAR_IDENTICAL_CUTOFF, SATURATION_TOL, UNITARY_TOL
from tensor_core import (
    ComplexMatrix,
    DimensionMismatchError,
    DomainPreconditionError,
    NotUnitaryError,
    is_unitary,
)
from unitary_synthesis import lemma2_unitary

logger = logging.getLogger(__name__)

BOUND_SLACK = 1e-9
RESIDUAL_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class GeneralMachineSpec:
    unitary: ComplexMatrix
    sigma: PureState
    probe_init: PureState
    probe_flag0: PureState
    probe_flag1: PureState
    psi0: PureState
    psi1: PureState

    @classmethod
    def from_cloning_machine(cls, machine: CloningMachine) -> 'GeneralMachineSpec':
        """
        Построенная машина в общей записи: оба флага успеха и начальное
        состояние зонда совпадают с probe_success.
        """
        cfg = machine.config
        return cls(
            unitary=machine.unitary,
            sigma=cfg.sigma,
            probe_init=cfg.probe_success,
            probe_flag0=cfg.probe_success,
            probe_flag1=cfg.probe_success,
            psi0=machine.psi0,
            psi1=machine.psi1,
        )

    @property
    def n(self) -> int:
        return self.psi0.dim

    @property
    def probe_dim(self) -> int:
        return self.probe_init.dim

    def validate(self, tol: float = UNITARY_TOL) -> None:
        n, d_p = self.n, self.probe_dim
        if self.psi1.dim != n or self.sigma.dim != n:
            raise DimensionMismatchError("psi0, psi1 and sigma must share the dimension of system A")
        if d_p < 2 or self.probe_flag0.dim != d_p or self.probe_flag1.dim != d_p:
            raise DimensionMismatchError("probe states must share a dimension >= 2")
        total = n * n * d_p
        if self.unitary.shape != (total, total):
            raise DimensionMismatchError(f"unitary {self.unitary.shape} does not act on A⊗B⊗P of dimension {total}")
        ok, residual = is_unitary(self.unitary, tol)
        if not ok:
            raise NotUnitaryError(f"unitary residual {residual:.3e} exceeds {tol:g}")
        overlap = abs(complex(np.vdot(self.psi0.amplitudes, self.psi1.amplitudes)))
        if overlap > 1.0 - NEAR_IDENTICAL_CUTOFF:
            raise NearIdenticalStatesError(f"designated states nearly identical: |<psi0|psi1>| = {overlap:.12f}")


@dataclass(frozen=True)
class BoundAnalysis:
    eta0: float
    eta1: float
    flag_overlap: complex
    residual0: float
    residual1: float
    orthogonality_violation: float
    lhs_eq18: float
    rhs_eq18: float
    mean_eta: float
    bound_eq19_middle: float
    bound_eq19_right: float
    saturated: bool
    lhs_eq18_imag: float = 0.0
    phi_overlap: complex = 0j
    eq19_middle_holds: bool = True

    def inequality_holds(self, slack: float = BOUND_SLACK) -> bool:
        return self.lhs_eq18 <= self.rhs_eq18 + slack and self.mean_eta <= self.bound_eq19_right + slack


# ========== ГРАНИЦЫ ==========

def _check_overlap(overlap_s: float) -> float:
    s = float(overlap_s)
    if not math.isfinite(s) or not 0.0 <= s < 1.0:
        raise DomainPreconditionError(f"overlap must lie in [0, 1), got {overlap_s}")
    return s


def universal_bound(overlap_s: float) -> float:
    """η ≤ 1/(1+s) для универсальной машины (η₀ = η₁)."""
    return 1.0 / (1.0 + _check_overlap(overlap_s))


def mean_efficiency_bound(overlap_s: float, flag_overlap: float) -> float:
    """
    (1 − s)/(1 − s²⟨m₀|m₁⟩): граница для средней эффективности.

    Args:
        overlap_s: s в [0, 1)
        flag_overlap: вещественная часть ⟨m₀|m₁⟩ в [−1, 1]
    """
    s = _check_overlap(overlap_s)
    f = float(flag_overlap)
    if not math.isfinite(f) or not -1.0 <= f <= 1.0:
        raise DomainPreconditionError(f"flag overlap must lie in [-1, 1], got {flag_overlap}")
    denominator = 1.0 - s * s * f
    if denominator <= 0.0:
        raise DomainPreconditionError(f"non-positive denominator {denominator}")
    return (1.0 - s) / denominator


def minimum_failure_probability(overlap_s: float) -> float:
    """
    Минимальная доля неудач s/(1+s) у любой универсальной машины.

    Именно эти неудачи позволяют легальным сторонам заметить перехватчика,
    клонирующего неортогональные сигнальные состояния.
    """
    return 1.0 - universal_bound(overlap_s)


def check_no_perfect_cloning(overlap_s: float, eta0: float, eta1: float, flag_overlap: float) -> bool:
    """True, если (η₀+η₁)/2 не превышает границы средней эффективности."""
    return 0.5 * (eta0 + eta1) <= mean_efficiency_bound(overlap_s, flag_overlap) + 1e-12


# ========== АНАЛИЗ МАШИНЫ ==========

def _probe_contraction_norm(vec: np.ndarray, flag: np.ndarray, n: int, d_p: int) -> float:
    # ⟨m|Φ⟩ как вектор над AB
    return float(np.linalg.norm(vec.reshape(n * n, d_p) @ flag.conj()))


def analyze_machine(spec: GeneralMachineSpec) -> BoundAnalysis:
    """
    Разложить выходы машины на клон с флагом и остаток и проверить цепочку неравенств.

    Returns:
        BoundAnalysis; нарушения ортогональности остатков к флагам
        сообщаются в orthogonality_violation, но не скрываются

    Raises:
        NearIdenticalStatesError: |⟨ψ₀|ψ₁⟩| > 1 − 1e-8, границы при s = 1 не определены
    """
    spec.validate()
    n, d_p = spec.n, spec.probe_dim
    psi = (spec.psi0.amplitudes, spec.psi1.amplitudes)
    flags = (spec.probe_flag0.amplitudes, spec.probe_flag1.amplitudes)

    coeffs, residual_norms, phis = [], [], []
    for label in (0, 1):
        start = np.kron(np.kron(psi[label], spec.sigma.amplitudes), spec.probe_init.amplitudes)
        out = spec.unitary @ start
        ideal = np.kron(np.kron(psi[label], psi[label]), flags[label])
        c = complex(np.vdot(ideal, out))
        residual = out - c * ideal
        r_norm = float(np.linalg.norm(residual))
        coeffs.append(c)
        residual_norms.append(r_norm)
        phis.append(residual / r_norm if r_norm > RESIDUAL_FLOOR else np.zeros_like(residual))

    eta0, eta1 = (min(1.0, abs(c) ** 2) for c in coeffs)
    violation = max(
        _probe_contraction_norm(phi, flag, n, d_p) for phi in phis for flag in flags
    )

    overlap = complex(np.vdot(psi[0], psi[1]))
    s = abs(overlap)
    flag_overlap = complex(np.vdot(flags[0], flags[1]))
    lhs = overlap - coeffs[0].conjugate() * coeffs[1] * overlap ** 2 * flag_overlap
    rhs = math.sqrt(max(0.0, (1.0 - eta0) * (1.0 - eta1)))
    mean_eta = 0.5 * (eta0 + eta1)
    f_real = float(np.clip(flag_overlap.real, -1.0, 1.0))
    middle = mean_efficiency_bound(s, f_real)
    right = universal_bound(s)

    analysis = BoundAnalysis(
        eta0=eta0,
        eta1=eta1,
        flag_overlap=flag_overlap,
        residual0=residual_norms[0],
        residual1=residual_norms[1],
        orthogonality_violation=violation,
        lhs_eq18=float(lhs.real),
        rhs_eq18=rhs,
        mean_eta=mean_eta,
        bound_eq19_middle=middle,
        bound_eq19_right=right,
        saturated=abs(mean_eta - right) <= SATURATION_TOL,
        lhs_eq18_imag=float(lhs.imag),
        phi_overlap=complex(np.vdot(phis[0], phis[1])),
        eq19_middle_holds=mean_eta <= middle + BOUND_SLACK,
    )
    logger.debug("analyze_machine: eta0=%.6f eta1=%.6f violation=%.2e", eta0, eta1, violation)
    return analysis


def feasible_general_spec(psi0: PureState, psi1: PureState, eta0: float, eta1: float,
                          flag_overlap: float, rng: np.random.Generator,
                          sigma: Optional[PureState] = None) -> GeneralMachineSpec:
    """
    Построить общую машину (зонд размерности 3), у которой остатки точно
    ортогональны флагам успеха, с заданными η₀, η₁ и ⟨m₀|m₁⟩.

    Флаги m₀, m₁ лежат в span{e₀, e₁} зонда, остатки лежат в AB ⊗ e₂.

    Raises:
        DomainPreconditionError: если такие эффективности запрещены неравенством
    """
    n = psi0.dim
    if psi1.dim != n:
        raise DimensionMismatchError("psi0 and psi1 must share a dimension")
    for name, eta in (('eta0', eta0), ('eta1', eta1)):
        if not 0.0 <= eta <= 1.0:
            raise DomainPreconditionError(f"{name} must lie in [0, 1], got {eta}")
    f = float(flag_overlap)
    if not -1.0 <= f <= 1.0:
        raise DomainPreconditionError(f"flag overlap must lie in [-1, 1], got {flag_overlap}")
    sigma = sigma or PureState.basis(n, 0)

    overlap = complex(np.vdot(psi0.amplitudes, psi1.amplitudes))
    clone_part = math.sqrt(eta0 * eta1) * overlap ** 2 * f
    fail_weight = math.sqrt((1.0 - eta0) * (1.0 - eta1))
    gap = overlap - clone_part
    if fail_weight <= RESIDUAL_FLOOR:
        if abs(gap) > 1e-12:
            raise DomainPreconditionError("efficiencies violate the overlap inequality")
        q = 0j
    else:
        q = gap / fail_weight
        if abs(q) > 1.0 + 1e-12:
            raise DomainPreconditionError(f"efficiencies violate the overlap inequality (|q| = {abs(q):.6f})")
        if abs(q) > 1.0:
            q = q / abs(q)

    m0 = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
    m1 = np.array([f, math.sqrt(max(0.0, 1.0 - f * f)), 0.0], dtype=np.complex128)
    m_fail = np.array([0.0, 0.0, 1.0], dtype=np.complex128)

    dim_ab = n * n
    chi0 = rng.standard_normal(dim_ab) + 1j * rng.standard_normal(dim_ab)
    chi0 /= np.linalg.norm(chi0)
    perp = rng.standard_normal(dim_ab) + 1j * rng.standard_normal(dim_ab)
    perp -= np.vdot(chi0, perp) * chi0
    perp /= np.linalg.norm(perp)
    chi1 = q * chi0 + math.sqrt(max(0.0, 1.0 - abs(q) ** 2)) * perp

    a0, a1 = psi0.amplitudes, psi1.amplitudes
    sources = [np.kron(np.kron(a, sigma.amplitudes), m0) for a in (a0, a1)]
    targets = [
        math.sqrt(eta0) * np.kron(np.kron(a0, a0), m0) + math.sqrt(1.0 - eta0) * np.kron(chi0, m_fail),
        math.sqrt(eta1) * np.kron(np.kron(a1, a1), m1) + math.sqrt(1.0 - eta1) * np.kron(chi1, m_fail),
    ]
    u = lemma2_unitary(sources[0], sources[1], targets[0], targets[1])
    return GeneralMachineSpec(
        unitary=u,
        sigma=sigma,
        probe_init=PureState.from_amplitudes(m0),
        probe_flag0=PureState.from_amplitudes(m0),
        probe_flag1=PureState.from_amplitudes(m1),
        psi0=psi0,
        psi1=psi1,
    )
