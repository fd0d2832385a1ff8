"""
Монте-Карло измерений зонда, пример с фильтрацией верности и сводки по машинам.

Генератор splitmix64-counter/v1: равномерное число выстрела k получается
хешированием (seed, k) без последовательной зависимости, поэтому серийный и
параллельный прогоны совпадают бит в бит.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Sequence, Tuple

import numpy as np
from scipy.stats import unitary_group

from cloning_machine import CloneOutcome, CloningMachine, branch_outcomes, machine_gram_report
from efficiency_bounds import (
    GeneralMachineSpec,
    analyze_machine,
    feasible_general_spec,
    minimum_failure_probability,
    universal_bound,
)
from quantum_state import (
    DensityOperator,
    PureState,
    fidelity,
    measure_projective,
    pure_to_density,
    random_density_operator,
    random_pure_state,
)
from sim_config import GENERATOR_ID, MC_CHUNK, MC_WORKERS, PROB_FLOOR
from tensor_core import DimensionMismatchError, DomainPreconditionError, is_unitary

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-12
ORTHOGONALITY_TOL = 1e-9

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MUL1 = np.uint64(0xBF58476D1CE4E5B9)
_MUL2 = np.uint64(0x94D049BB133111EB)
_UINT64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class SimulationReport:
    seed: int
    shots: int
    input_label: int
    successes: int
    empirical_eta: float
    analytic_eta: float
    z_score: float
    mean_clone_fidelity: float
    generator_id: str = GENERATOR_ID


@dataclass(frozen=True)
class FilterDemoReport:
    fidelity_before: float
    fidelity_after: float
    keep_probability_psi0: float
    keep_probability_psi1: float
    monotonicity_violated: bool


@dataclass(frozen=True)
class UnitaryAuditReport:
    trials: int
    max_deviation: float
    monotone_failures: int


@dataclass(frozen=True)
class InequalityAuditReport:
    trials: int
    random_specs: int
    feasible_specs: int
    infeasible_requests: int
    orthogonality_held: int
    orthogonality_reported: int
    eq18_violations: int
    universal_bound_violations: int
    max_violation_when_held: float


# ========== ГЕНЕРАТОР ==========

def _splitmix64(x: np.ndarray) -> np.ndarray:
    with np.errstate(over='ignore'):
        z = (x ^ (x >> np.uint64(30))) * _MUL1
        z = (z ^ (z >> np.uint64(27))) * _MUL2
    return z ^ (z >> np.uint64(31))


def counter_uniforms(seed: int, start: int, stop: int) -> np.ndarray:
    """
    Равномерные числа в [0, 1) для выстрелов start..stop-1.

    u_k = (splitmix64(mix(seed) + (k+1)·γ) >> 11) · 2⁻⁵³, γ = 0x9E3779B97F4A7C15.
    """
    if not 0 <= seed <= _UINT64_MAX:
        raise DomainPreconditionError(f"seed must be a 64-bit unsigned integer, got {seed}")
    base = _splitmix64(np.array([seed], dtype=np.uint64))
    k = np.arange(start, stop, dtype=np.uint64)
    with np.errstate(over='ignore'):
        x = base + (k + np.uint64(1)) * _GOLDEN
    bits = _splitmix64(x) >> np.uint64(11)
    return bits.astype(np.float64) * 2.0 ** -53


# ========== МОНТЕ-КАРЛО ==========

@lru_cache(maxsize=64)
def _success_branch(machine: CloningMachine, input_label: int) -> CloneOutcome:
    # U применяется один раз на пару (машина, метка)
    return branch_outcomes(machine, machine.designated(input_label))[0]


def _count_successes(seed: int, start: int, stop: int, eta: float) -> int:
    return int(np.count_nonzero(counter_uniforms(seed, start, stop) < eta))


def _snap_probability(p: float) -> float:
    if p <= PROB_FLOOR:
        return 0.0
    if p >= 1.0 - PROB_FLOOR:
        return 1.0
    return p


def run_monte_carlo(machine: CloningMachine, input_label: int, shots: int, seed: int,
                    workers: int = MC_WORKERS, chunk: int = MC_CHUNK) -> SimulationReport:
    """
    Серия выстрелов: применить машину к Ψ_label, измерить зонд, посчитать успехи.

    Args:
        machine: построенная машина
        input_label: 0 или 1
        shots: число выстрелов (>= 1)
        seed: 64-битное зерно
        workers: число потоков; на результат не влияет
        chunk: выстрелов на единицу работы

    Returns:
        SimulationReport, зависящий только от (machine, input_label, shots, seed)
    """
    if isinstance(shots, bool) or not isinstance(shots, (int, np.integer)) or shots < 1:
        raise DomainPreconditionError(f"shots must be a positive integer, got {shots}")
    if chunk < 1 or workers < 1:
        raise DomainPreconditionError("chunk and workers must be positive")
    shots = int(shots)
    success = _success_branch(machine, input_label)
    eta = _snap_probability(float(success.probability))

    bounds = [(start, min(start + chunk, shots)) for start in range(0, shots, chunk)]
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = list(pool.map(lambda b: _count_successes(seed, b[0], b[1], eta), bounds))
    else:
        counts = [_count_successes(seed, start, stop, eta) for start, stop in bounds]
    successes = sum(counts)

    if 0.0 < eta < 1.0:
        z_score = (successes - shots * eta) / math.sqrt(shots * eta * (1.0 - eta))
    else:
        z_score = 0.0
    if successes:
        # все успешные выстрелы дают одно и то же состояние AB
        mean_fidelity = float(success.clone_fidelity)
    else:
        logger.warning("No successful shots out of %d (label=%d, seed=%d)", shots, input_label, seed)
        mean_fidelity = 0.0

    report = SimulationReport(
        seed=int(seed),
        shots=shots,
        input_label=int(input_label),
        successes=successes,
        empirical_eta=successes / shots,
        analytic_eta=eta,
        z_score=float(z_score),
        mean_clone_fidelity=mean_fidelity,
    )
    logger.info("Monte Carlo: label=%d shots=%d successes=%d eta=%.6f z=%.3f",
                input_label, shots, successes, eta, z_score)
    return report


# ========== ФИЛЬТРАЦИЯ ВЕРНОСТИ ==========

def _filtered_density(psi: PureState, basis: Sequence[np.ndarray], discard: int) -> Tuple[DensityOperator, float]:
    outcomes = measure_projective(psi, basis)
    kept = [o for o in outcomes if o.label != discard]
    keep = sum(o.probability for o in kept)
    if keep <= PROB_FLOOR:
        raise DomainPreconditionError("filter discards the whole state")
    m = sum(o.probability * np.outer(o.post_state.amplitudes, o.post_state.amplitudes.conj()) for o in kept)
    return DensityOperator(m / keep, psi.shape), keep


def fidelity_monotone_check(rho0_before: DensityOperator, rho1_before: DensityOperator,
                            rho0_after: DensityOperator, rho1_after: DensityOperator) -> bool:
    """True, если F(до) ≤ F(после) + 1e-12: верность не убывает."""
    if rho0_before.dim != rho1_before.dim or rho0_after.dim != rho1_after.dim:
        raise DimensionMismatchError("density operators of a pair must share a dimension")
    return fidelity(rho0_before, rho1_before) <= fidelity(rho0_after, rho1_after) + MONOTONE_SLACK


def filter_demo() -> FilterDemoReport:
    """
    Измерение в базисе {s₁, s₂, s₃} с отбрасыванием исхода s₃ уменьшает
    верность |Ψ₀⟩ = (|s₁⟩+|s₃⟩)/√2 и |Ψ₁⟩ = (|s₂⟩+|s₃⟩)/√2 с 1/2 до 0.
    """
    r = 1.0 / math.sqrt(2.0)
    psi0 = PureState.from_amplitudes([r, 0.0, r])
    psi1 = PureState.from_amplitudes([0.0, r, r])
    basis = list(np.eye(3, dtype=np.complex128))

    rho0, rho1 = pure_to_density(psi0), pure_to_density(psi1)
    rho0_after, keep0 = _filtered_density(psi0, basis, discard=2)
    rho1_after, keep1 = _filtered_density(psi1, basis, discard=2)
    return FilterDemoReport(
        fidelity_before=fidelity(rho0, rho1),
        fidelity_after=fidelity(rho0_after, rho1_after),
        keep_probability_psi0=keep0,
        keep_probability_psi1=keep1,
        monotonicity_violated=not fidelity_monotone_check(rho0, rho1, rho0_after, rho1_after),
    )


def _evolve(rho: DensityOperator, u: np.ndarray) -> DensityOperator:
    m = u @ rho.matrix @ u.conj().T
    return DensityOperator(0.5 * (m + m.conj().T), rho.shape)


def unitary_fidelity_audit(trials: int, seed: int, dims: Sequence[int] = (2, 3, 4, 5, 6)) -> UnitaryAuditReport:
    """Общая унитарная эволюция двух состояний не меняет их верность."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    failures = 0
    for t in range(trials):
        d = dims[t % len(dims)]
        # чередуем чистые и полноранговые состояния
        rank = 1 if t % 2 == 0 else d
        rho0 = random_density_operator(d, rng, rank=rank)
        rho1 = random_density_operator(d, rng)
        u = unitary_group.rvs(d, random_state=rng)
        after0, after1 = _evolve(rho0, u), _evolve(rho1, u)
        worst = max(worst, abs(fidelity(rho0, rho1) - fidelity(after0, after1)))
        if not fidelity_monotone_check(rho0, rho1, after0, after1):
            failures += 1
    return UnitaryAuditReport(trials, worst, failures)


# ========== АУДИТ НЕРАВЕНСТВ ==========

def _random_spec(rng: np.random.Generator) -> GeneralMachineSpec:
    n = int(rng.integers(2, 4))
    d_p = int(rng.integers(2, 4))
    u = unitary_group.rvs(n * n * d_p, random_state=rng)
    return GeneralMachineSpec(
        unitary=u,
        sigma=random_pure_state(n, rng),
        probe_init=random_pure_state(d_p, rng),
        probe_flag0=random_pure_state(d_p, rng),
        probe_flag1=random_pure_state(d_p, rng),
        psi0=random_pure_state(n, rng),
        psi1=random_pure_state(n, rng),
    )


def _random_feasible_spec(rng: np.random.Generator) -> GeneralMachineSpec:
    n = int(rng.integers(2, 4))
    psi0, psi1 = random_pure_state(n, rng), random_pure_state(n, rng)
    eta0, eta1 = rng.uniform(0.0, 1.0, size=2)
    return feasible_general_spec(psi0, psi1, float(eta0), float(eta1), float(rng.uniform(-1.0, 1.0)), rng)


def inequality_audit(trials: int, seed: int) -> InequalityAuditReport:
    """
    Случайные машины двух видов: унитарные по Хаару (условия ортогональности
    обычно нарушены и лишь учитываются) и допустимые построенные (условия
    выполнены, обе границы обязаны выполняться).
    """
    rng = np.random.default_rng(seed)
    random_specs = feasible = infeasible = held = reported = 0
    eq18_violations = bound_violations = 0
    worst = 0.0
    for t in range(trials):
        if t % 2 == 0:
            spec = _random_spec(rng)
            random_specs += 1
        else:
            try:
                spec = _random_feasible_spec(rng)
            except DomainPreconditionError:
                infeasible += 1
                continue
            feasible += 1
        analysis = analyze_machine(spec)
        if analysis.orthogonality_violation > ORTHOGONALITY_TOL:
            reported += 1
            logger.debug("audit trial %d: orthogonality violated by %.3e", t, analysis.orthogonality_violation)
            continue
        held += 1
        worst = max(worst, analysis.lhs_eq18 - analysis.rhs_eq18)
        if analysis.lhs_eq18 > analysis.rhs_eq18 + 1e-9:
            eq18_violations += 1
        if analysis.mean_eta > analysis.bound_eq19_right + 1e-9:
            bound_violations += 1
    return InequalityAuditReport(
        trials=trials,
        random_specs=random_specs,
        feasible_specs=feasible,
        infeasible_requests=infeasible,
        orthogonality_held=held,
        orthogonality_reported=reported,
        eq18_violations=eq18_violations,
        universal_bound_violations=bound_violations,
        max_violation_when_held=worst,
    )


# ========== СВОДКА ==========

def machine_summary(machine: CloningMachine) -> Dict[str, Any]:
    """Сводка по машине для отчётов командной строки."""
    _, residual = is_unitary(machine.unitary)
    gram = machine_gram_report(machine)
    amp = machine.amplitudes
    return {
        'n': machine.n,
        'overlap_s': machine.overlap_s,
        'rephase_angle': machine.rephase_angle,
        'eta': machine.eta,
        'eta0': machine.eta0,
        'eta1': machine.eta1,
        'symmetric': amp.symmetric,
        'amplitudes': {'a00': amp.a00, 'a01': amp.a01, 'a10': amp.a10, 'a11': amp.a11},
        'universal_bound': universal_bound(machine.overlap_s),
        'minimum_failure_probability': minimum_failure_probability(machine.overlap_s),
        'unitarity_residual': residual,
        'gram_max_delta': gram.max_delta,
    }


