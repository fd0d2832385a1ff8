"""
Вероятностная машина клонирования двух неортогональных состояний.

Унитарная эволюция на A ⊗ B ⊗ P:
    U(|Ψ_s⟩|Σ⟩|m₀⟩) = a_s0 |Ψ_s⟩|Ψ_s⟩|m₀⟩ + a_s1 |Φ_AB⟩|m₁⟩,
затем измерение зонда P; исход m₀ оставляет AB в состоянии |Ψ_s⟩|Ψ_s⟩.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from quantum_state import PureState, SpaceShape, measure_subsystem, pure_fidelity
from sim_config import (
    GRAM_TOL,
    NEAR_IDENTICAL_CUTOFF,
    PROBE_ORTHO_TOL,
    UNITARY_TOL,
)
from tensor_core import (
    ComplexMatrix,
    ComplexVector,
    DimensionMismatchError,
    DomainPreconditionError,
    NotUnitaryError,
    is_unitary,
)
from unitary_synthesis import (
    GramCheckReport,
    GramMismatchError,
    check_gram,
    frame_vectors,
    lemma2_frame,
    lemma2_unitary,
)

logger = logging.getLogger(__name__)

PROBE_DIM = 2
AMPLITUDE_TOL = 1e-12


class NearIdenticalStatesError(DomainPreconditionError):
    """|⟨Ψ₀|Ψ₁⟩| слишком близко к 1: пару нельзя клонировать устойчиво."""


@dataclass(frozen=True)
class CloningAmplitudes:
    a00: float
    a01: float
    a10: float
    a11: float

    def __post_init__(self):
        for name, (x, y) in (('a00/a01', (self.a00, self.a01)), ('a10/a11', (self.a10, self.a11))):
            if abs(x * x + y * y - 1.0) > AMPLITUDE_TOL:
                raise DomainPreconditionError(f"amplitudes {name} not normalized")

    @property
    def symmetric(self) -> bool:
        return abs(self.a00 - self.a10) <= AMPLITUDE_TOL and abs(self.a01 - self.a11) <= AMPLITUDE_TOL

    @property
    def eta0(self) -> float:
        return self.a00 ** 2

    @property
    def eta1(self) -> float:
        return self.a10 ** 2


@dataclass(frozen=True, eq=False)
class MachineConfig:
    sigma: PureState
    phi_ab: PureState
    probe_success: PureState
    probe_fail: PureState

    @classmethod
    def default(cls, n: int) -> 'MachineConfig':
        """Σ = |0⟩, Φ_AB = |00⟩, зонд в каноническом базисе."""
        return cls(
            sigma=PureState.basis(n, 0),
            phi_ab=PureState.basis((n, n), 0),
            probe_success=PureState.basis(PROBE_DIM, 0),
            probe_fail=PureState.basis(PROBE_DIM, 1),
        )

    def validate(self, n: int) -> None:
        if self.sigma.dim != n:
            raise DimensionMismatchError(f"sigma has dimension {self.sigma.dim}, system B needs {n}")
        if self.phi_ab.dim != n * n:
            raise DimensionMismatchError(f"phi_ab has dimension {self.phi_ab.dim}, A⊗B needs {n * n}")
        for name, probe in (('probe_success', self.probe_success), ('probe_fail', self.probe_fail)):
            if probe.dim != PROBE_DIM:
                raise DimensionMismatchError(f"{name} has dimension {probe.dim}, probe needs {PROBE_DIM}")
        overlap = abs(np.vdot(self.probe_success.amplitudes, self.probe_fail.amplitudes))
        if overlap > PROBE_ORTHO_TOL:
            raise DomainPreconditionError(f"probe states not orthogonal (overlap {overlap:.3e})")

    def is_default(self, n: int) -> bool:
        ref = MachineConfig.default(n)
        pairs = ((self.sigma, ref.sigma), (self.phi_ab, ref.phi_ab),
                 (self.probe_success, ref.probe_success), (self.probe_fail, ref.probe_fail))
        return all(np.allclose(a.amplitudes, b.amplitudes, atol=1e-12) for a, b in pairs)


@dataclass(frozen=True, eq=False)
class CloningMachine:
    psi0: PureState
    psi1: PureState  # уже с убранной фазой перекрытия
    overlap_s: float
    rephase_angle: float
    config: MachineConfig
    amplitudes: CloningAmplitudes
    unitary: ComplexMatrix
    eta: float

    @property
    def n(self) -> int:
        return self.psi0.dim

    @property
    def shape(self) -> SpaceShape:
        return SpaceShape((self.n, self.n, PROBE_DIM))

    @property
    def eta0(self) -> float:
        return self.amplitudes.eta0

    @property
    def eta1(self) -> float:
        return self.amplitudes.eta1

    def designated(self, label: int) -> PureState:
        if label not in (0, 1):
            raise DomainPreconditionError(f"input label must be 0 or 1, got {label}")
        return self.psi0 if label == 0 else self.psi1


@dataclass(frozen=True)
class CloneOutcome:
    success: bool
    probability: float
    post_state_ab: Optional[PureState] = field(default=None, compare=False)
    clone_fidelity: float = 0.0


# ========== АМПЛИТУДЫ ==========

def _check_overlap(overlap_s: float) -> float:
    s = float(overlap_s)
    if not (0.0 <= s < 1.0) or not math.isfinite(s):
        raise DomainPreconditionError(f"overlap must lie in [0, 1), got {overlap_s}")
    return s


def compute_amplitudes(overlap_s: float) -> CloningAmplitudes:
    """
    Симметричный выбор: a00 = a10 = 1/√(1+s), a01 = a11 = √s/√(1+s).

    Args:
        overlap_s: вещественное перекрытие ⟨Ψ₀|Ψ₁⟩ в [0, 1)
    """
    s = _check_overlap(overlap_s)
    a0 = 1.0 / math.sqrt(1.0 + s)
    a1 = math.sqrt(s) / math.sqrt(1.0 + s)
    return CloningAmplitudes(a0, a1, a0, a1)


def asymmetric_amplitudes(overlap_s: float, eta0: float) -> CloningAmplitudes:
    """
    Несимметричная машина с заданной эффективностью η₀.

    η₁ находится из условия Грама g(y) = √η₀·s²·y + √(1−η₀)·√(1−y²) − s = 0,
    y = √η₁ (общее состояние неудачи Φ_AB). g вогнута с максимумом в
    y* = √η₀·s²/√(η₀s⁴ + 1 − η₀), поэтому решение существует при
    η₀ ≤ 1/(1+s²); берётся больший корень на [y*, 1] (наибольшая η₁).
    При η₀ = 1/(1+s) это симметричная машина.
    """
    s = _check_overlap(overlap_s)
    if not 0.0 <= eta0 <= 1.0:
        raise DomainPreconditionError(f"eta0 must lie in [0, 1], got {eta0}")
    x = math.sqrt(eta0)
    rest0 = math.sqrt(max(0.0, 1.0 - eta0))

    def gram_gap(y: float) -> float:
        return x * y * s * s + rest0 * math.sqrt(max(0.0, 1.0 - y * y)) - s

    if s == 0.0:
        # ортогональные состояния: условие требует η₀ = 1 или η₁ = 1
        y = 1.0
    else:
        y_peak = x * s * s / math.sqrt(eta0 * s ** 4 + 1.0 - eta0)
        peak = gram_gap(y_peak)
        if peak < -1e-15:
            raise DomainPreconditionError(
                f"eta0={eta0} infeasible for overlap {s}: needs eta0 <= {1.0 / (1.0 + s * s)}")
        if peak <= 0.0:
            y = y_peak
        else:
            y = brentq(gram_gap, y_peak, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    eta1 = y * y
    return CloningAmplitudes(x, rest0, math.sqrt(eta1), math.sqrt(max(0.0, 1.0 - eta1)))


# ========== ПОСТРОЕНИЕ МАШИНЫ ==========

def source_vector(psi: PureState, config: MachineConfig) -> ComplexVector:
    """|φ_s⟩ = |Ψ_s⟩|Σ⟩|m₀⟩."""
    return np.kron(np.kron(psi.amplitudes, config.sigma.amplitudes), config.probe_success.amplitudes)


def target_vector(psi: PureState, a_clone: float, a_fail: float, config: MachineConfig) -> ComplexVector:
    """|φ̃_s⟩ = a_s0 |Ψ_s⟩|Ψ_s⟩|m₀⟩ + a_s1 |Φ_AB⟩|m₁⟩."""
    clone = np.kron(np.kron(psi.amplitudes, psi.amplitudes), config.probe_success.amplitudes)
    fail = np.kron(config.phi_ab.amplitudes, config.probe_fail.amplitudes)
    return a_clone * clone + a_fail * fail


def machine_vectors(machine: CloningMachine) -> Tuple[ComplexVector, ComplexVector, ComplexVector, ComplexVector]:
    """Исходная и целевая пары, из которых синтезирован U."""
    amp = machine.amplitudes
    cfg = machine.config
    return (
        source_vector(machine.psi0, cfg),
        source_vector(machine.psi1, cfg),
        target_vector(machine.psi0, amp.a00, amp.a01, cfg),
        target_vector(machine.psi1, amp.a10, amp.a11, cfg),
    )


def machine_gram_report(machine: CloningMachine, tol: float = GRAM_TOL) -> GramCheckReport:
    return check_gram(*machine_vectors(machine), tol=tol)


def build_machine(psi0: PureState, psi1: PureState, config: Optional[MachineConfig] = None,
                  amplitudes: Optional[CloningAmplitudes] = None) -> CloningMachine:
    """
    Построить машину клонирования для пары {Ψ₀, Ψ₁}.

    Args:
        psi0, psi1: нормированные состояния системы A (n >= 2)
        config: Σ, Φ_AB и состояния зонда (по умолчанию канонические)
        amplitudes: переопределение амплитуд (по умолчанию симметричный выбор)

    Returns:
        CloningMachine с синтезированным унитарным оператором

    Raises:
        NearIdenticalStatesError: |⟨Ψ₀|Ψ₁⟩| > 1 − 1e-8
        DimensionMismatchError: несовместимые размерности
    """
    n = psi0.dim
    if psi1.dim != n:
        raise DimensionMismatchError(f"psi0 has dimension {n}, psi1 has {psi1.dim}")
    if n < 2:
        raise DomainPreconditionError("system A needs dimension >= 2")
    config = config or MachineConfig.default(n)
    config.validate(n)

    overlap = complex(np.vdot(psi0.amplitudes, psi1.amplitudes))
    s = abs(overlap)
    if s > 1.0 - NEAR_IDENTICAL_CUTOFF:
        raise NearIdenticalStatesError(f"states nearly identical: |<psi0|psi1>| = {s:.12f}")
    angle = float(np.angle(overlap)) if s > 0.0 else 0.0
    # Ψ₁ -> e^{-iθ} Ψ₁ делает перекрытие вещественным неотрицательным
    psi1_real = PureState(psi1.amplitudes * np.exp(-1j * angle), psi1.shape)
    s = float(min(s, 1.0))

    amps = amplitudes or compute_amplitudes(s)
    phi0 = source_vector(psi0, config)
    phi1 = source_vector(psi1_real, config)
    tphi0 = target_vector(psi0, amps.a00, amps.a01, config)
    tphi1 = target_vector(psi1_real, amps.a10, amps.a11, config)
    gram = check_gram(phi0, phi1, tphi0, tphi1, GRAM_TOL)
    if not gram.passed:
        raise GramMismatchError(f"amplitudes do not satisfy the Gram conditions (max delta {gram.max_delta:.3e})")

    u = lemma2_unitary(phi0, phi1, tphi0, tphi1)
    ok, residual = is_unitary(u, UNITARY_TOL)
    if not ok:
        raise NotUnitaryError(f"synthesized operator not unitary (residual {residual:.3e})")

    if amps.symmetric:
        eta = amps.eta0
        expected = 1.0 / (1.0 + s)
        if amplitudes is None and abs(eta - expected) > 1e-10:
            raise DomainPreconditionError(f"eta {eta} differs from 1/(1+s) = {expected}")
    else:
        eta = 0.5 * (amps.eta0 + amps.eta1)

    logger.info("Machine built: n=%d s=%.6f eta=%.6f residual=%.2e rephase=%.4f", n, s, eta, residual, angle)
    unitary = np.array(u, copy=True)
    unitary.setflags(write=False)
    return CloningMachine(psi0, psi1_real, s, angle, config, amps, unitary, float(eta))


# ========== ПРИМЕНЕНИЕ ==========

def apply_machine(machine: CloningMachine, input_a: PureState) -> PureState:
    """U·(|input⟩|Σ⟩|m₀⟩) над A ⊗ B ⊗ P."""
    if input_a.dim != machine.n:
        raise DimensionMismatchError(f"input has dimension {input_a.dim}, system A has {machine.n}")
    start = source_vector(input_a, machine.config)
    out = machine.unitary @ start
    return PureState.from_amplitudes(out, machine.shape, normalize=True)


def branch_outcomes(machine: CloningMachine, input_a: PureState) -> Tuple[CloneOutcome, CloneOutcome]:
    """
    Измерить зонд в базисе (probe_success, probe_fail).

    Returns:
        (исход успеха, исход неудачи); верность сравнивается с |input⟩|input⟩
    """
    out = apply_machine(machine, input_a)
    basis = [machine.config.probe_success.amplitudes, machine.config.probe_fail.amplitudes]
    outcomes = measure_subsystem(out, 2, basis)
    ideal = input_a.tensor(input_a)
    result = []
    for outcome in outcomes:
        fid = pure_fidelity(outcome.post_state, ideal) if outcome.post_state is not None else 0.0
        result.append(CloneOutcome(outcome.label == 0, outcome.probability, outcome.post_state, fid))
    return result[0], result[1]


def postselect(machine: CloningMachine, input_a: PureState) -> CloneOutcome:
    """Исход успеха: вероятность, состояние AB и его верность идеальной копии."""
    return branch_outcomes(machine, input_a)[0]


def image_columns(machine: CloningMachine) -> Tuple[ComplexVector, ...]:
    """
    Образы ортонормированного исходного репера e₀, e₁ под действием U.

    Для примера с кубитами это столбцы U для |000⟩ и |100⟩.
    """
    phi0, phi1, _, _ = machine_vectors(machine)
    return tuple(machine.unitary @ e for e in frame_vectors(lemma2_frame(phi0, phi1)))


# ========== ЭТАЛОН ДЛЯ ТРЁХ КУБИТОВ ==========

def golden_eq15_fixture(alpha: float) -> Tuple[PureState, PureState]:
    """
    Образы |000⟩ и |100⟩ для примера с кубитами A, B, P при ⟨Ψ₀|Ψ₁⟩ = tan²α,
    вычисленные по явным формулам (независимо от синтеза).

    Args:
        alpha: параметр в [0, π/4)
    """
    if not (0.0 <= alpha < math.pi / 4):
        raise DomainPreconditionError(f"alpha must lie in [0, pi/4), got {alpha}")
    sin_a, cos_a, tan_a = math.sin(alpha), math.cos(alpha), math.tan(alpha)
    root_cos2 = math.sqrt(math.cos(2 * alpha))

    def ket(bits: str) -> int:
        return int(bits, 2)

    img0 = np.zeros(8, dtype=np.complex128)
    img0[ket('000')] = cos_a
    img0[ket('001')] = sin_a

    img1 = np.zeros(8, dtype=np.complex128)
    img1[ket('000')] = -root_cos2 * sin_a * tan_a
    img1[ket('100')] = sin_a * tan_a
    img1[ket('010')] = sin_a * tan_a
    img1[ket('110')] = math.sqrt(1.0 - tan_a ** 2)
    img1[ket('001')] = root_cos2 * sin_a

    shape = SpaceShape((2, 2, 2))
    return PureState(img0, shape), PureState(img1, shape)


def qubit_example_states(alpha: float) -> Tuple[PureState, PureState]:
    """Ψ₀ = |0⟩, Ψ₁ = cos θ|0⟩ + sin θ|1⟩ с cos θ = tan²α."""
    if not (0.0 <= alpha < math.pi / 4):
        raise DomainPreconditionError(f"alpha must lie in [0, pi/4), got {alpha}")
    c = math.tan(alpha) ** 2
    return PureState.basis(2, 0), PureState.from_amplitudes([c, math.sqrt(1.0 - c * c)])
