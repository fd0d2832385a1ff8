#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Командная строка симулятора вероятностного клонирования.

    python main.py filter-demo
    python main.py build --psi0 fixtures/psi0.json --psi1 fixtures/psi1.json --machine-out machine.json
    python main.py clone --machine machine.json --input 0 --shots 90000 --seed 42
    python main.py bound --overlap 0.5 --flag-overlap 0
    python main.py verify --machine machine.json

Отчёт (JSON) печатается в stdout или пишется в --output. Коды возврата:
0 успех, 1 ошибка использования или разбора, 2 нарушено предусловие,
3 проверка не прошла.
"""

import argparse
import logging
import math
import os
import sys
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

BASE_DIR = os.path.dirname(os.path.abspath(__file__))
if BASE_DIR not in sys.path:
    sys.path.insert(0, BASE_DIR)

from cloning_machine import (
    MachineConfig,
    asymmetric_amplitudes,
    build_machine,
    golden_eq15_fixture,
    image_columns,
    machine_gram_report,
    machine_vectors,
)
from efficiency_bounds import (
    BOUND_SLACK,
    GeneralMachineSpec,
    analyze_machine,
    mean_efficiency_bound,
    minimum_failure_probability,
    universal_bound,
)
from machine_files import (
    FileFormatError,
    InputDimensionError,
    check_finite,
    load_machine,
    load_state_file,
    save_machine,
    to_jsonable,
    write_report,
)
from quantum_state import PureState, SpaceShape
from sim_config import (
    DEFAULT_SEED,
    GENERATOR_ID,
    GRAM_TOL,
    LOG_LEVEL,
    MAPPING_TOL,
    MC_WORKERS,
    SATURATION_TOL,
    SCHEMA_VERSION,
    TOOL_VERSION,
    UNITARY_TOL,
    setup_logging,
)
from sim_harness import ORTHOGONALITY_TOL, filter_demo, machine_summary, run_monte_carlo
from tensor_core import SimulationError, is_unitary, max_abs_diff
from unitary_synthesis import mapping_residual

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DOMAIN = 2
EXIT_VERIFY = 3

GOLDEN_TOL = 1e-10
CONSISTENCY_TOL = 1e-9

CommandResult = Tuple[int, Dict[str, Any]]


class UsageError(SimulationError):
    """Неверные аргументы командной строки."""


class _ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ========== ТИПЫ АРГУМЕНТОВ ==========

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must fit in 64 unsigned bits")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError("value must be finite")
    return value


# ========== КОМАНДЫ ==========

def cmd_filter_demo(args: argparse.Namespace) -> CommandResult:
    return EXIT_OK, to_jsonable(filter_demo())


def cmd_build(args: argparse.Namespace) -> CommandResult:
    psi0 = load_state_file(args.psi0)
    psi1 = load_state_file(args.psi1)
    n = psi0.dim
    if psi1.dim != n:
        raise InputDimensionError(f"psi0 has dimension {n}, psi1 has {psi1.dim}")

    config = MachineConfig.default(n)
    sigma, phi_ab = config.sigma, config.phi_ab
    if args.sigma:
        sigma = load_state_file(args.sigma)
        if sigma.dim != n:
            raise InputDimensionError(f"sigma has dimension {sigma.dim}, expected {n}")
    if args.phi_ab:
        loaded = load_state_file(args.phi_ab)
        if loaded.dim != n * n:
            raise InputDimensionError(f"phi_ab has dimension {loaded.dim}, expected {n * n}")
        phi_ab = PureState(loaded.amplitudes, SpaceShape((n, n)))
    config = MachineConfig(sigma, phi_ab, config.probe_success, config.probe_fail)

    amplitudes = None
    if args.eta0 is not None:
        s = abs(complex(np.vdot(psi0.amplitudes, psi1.amplitudes)))
        amplitudes = asymmetric_amplitudes(s, args.eta0)

    machine = build_machine(psi0, psi1, config, amplitudes)
    save_machine(args.machine_out, machine)
    results = machine_summary(machine)
    results['machine_file'] = args.machine_out
    return EXIT_OK, to_jsonable(results)


def cmd_clone(args: argparse.Namespace) -> CommandResult:
    machine = load_machine(args.machine)
    report = run_monte_carlo(machine, args.input, args.shots, args.seed, workers=args.workers)
    return EXIT_OK, to_jsonable(report)


def cmd_bound(args: argparse.Namespace) -> CommandResult:
    s = args.overlap
    results: Dict[str, Any] = {
        'overlap_s': s,
        'universal_bound': universal_bound(s),
        'minimum_failure_probability': minimum_failure_probability(s),
    }
    if args.flag_overlap is not None:
        results['flag_overlap'] = args.flag_overlap
        results['mean_efficiency_bound'] = mean_efficiency_bound(s, args.flag_overlap)
    return EXIT_OK, results


def _golden_deviation(machine) -> Optional[float]:
    """Отклонение столбцов U от явных образов для семейства Ψ₀ = |0⟩, Ψ₁ ∈ ℝ²."""
    if machine.n != 2 or not machine.config.is_default(2):
        return None
    psi0 = machine.psi0.amplitudes
    psi1 = machine.psi1.amplitudes
    if max_abs_diff(psi0, [1.0, 0.0]) > 1e-12 or np.max(np.abs(psi1.imag)) > 1e-12 or psi1[1].real < 0:
        return None
    if not machine.amplitudes.symmetric:
        return None
    alpha = math.atan(math.sqrt(machine.overlap_s))
    expected = golden_eq15_fixture(alpha)
    actual = image_columns(machine)
    if len(actual) != len(expected):
        return None
    return max(max_abs_diff(a, e.amplitudes) for a, e in zip(actual, expected))


def _consistency_deltas(machine) -> Dict[str, float]:
    """Сверить записанные overlap_s и eta с состояниями и амплитудами файла."""
    overlap = complex(np.vdot(machine.psi0.amplitudes, machine.psi1.amplitudes))
    amp = machine.amplitudes
    expected_eta = amp.eta0 if amp.symmetric else 0.5 * (amp.eta0 + amp.eta1)
    return {
        # psi1 хранится уже с вещественным неотрицательным перекрытием
        'overlap_delta': abs(overlap - machine.overlap_s),
        'eta_delta': abs(machine.eta - expected_eta),
    }


def cmd_verify(args: argparse.Namespace) -> CommandResult:
    machine = load_machine(args.machine)
    checks: Dict[str, bool] = {}

    unitary_ok, residual = is_unitary(machine.unitary, args.unitary_tol)
    checks['unitarity'] = unitary_ok
    gram = machine_gram_report(machine, args.gram_tol)
    checks['gram'] = gram.passed
    phi0, phi1, tphi0, tphi1 = machine_vectors(machine)
    mapping = mapping_residual(machine.unitary, [phi0, phi1], [tphi0, tphi1])
    checks['mapping'] = mapping <= args.mapping_tol
    consistency = _consistency_deltas(machine)
    checks['consistency'] = max(consistency.values()) <= args.consistency_tol

    results: Dict[str, Any] = {
        'unitarity_residual': residual,
        'gram': gram,
        'mapping_residual': mapping,
        'consistency': consistency,
        'bound_analysis': None,
        'golden_eq15_deviation': None,
    }
    if unitary_ok:
        analysis = analyze_machine(GeneralMachineSpec.from_cloning_machine(machine))
        results['bound_analysis'] = analysis
        checks['orthogonality'] = analysis.orthogonality_violation <= args.orthogonality_tol
        checks['eq18'] = analysis.lhs_eq18 <= analysis.rhs_eq18 + args.bound_slack
        checks['saturated'] = abs(analysis.mean_eta - analysis.bound_eq19_right) <= args.saturation_tol
        if machine.amplitudes.symmetric:
            deviation = _golden_deviation(machine)
            results['golden_eq15_deviation'] = deviation
            if deviation is not None:
                checks['golden_eq15'] = deviation <= args.golden_tol
        else:
            # несимметричная машина не насыщает универсальную границу
            checks.pop('saturated')

    failed = [name for name, ok in checks.items() if not ok]
    results['checks'] = checks
    results['failed_checks'] = failed
    if failed:
        logger.error("Verification failed: %s", ', '.join(failed))
        return EXIT_VERIFY, to_jsonable(results)
    return EXIT_OK, to_jsonable(results)


# ========== РАЗБОР АРГУМЕНТОВ ==========

def build_parser() -> argparse.ArgumentParser:
    ap = _ArgumentParser(prog='main.py', description='Probabilistic two-state cloning simulator')
    ap.add_argument('--output', help='Write the JSON report to this path instead of stdout')
    ap.add_argument('--log-level', default=LOG_LEVEL, help='Logging level (default from LOG_LEVEL)')
    sub = ap.add_subparsers(dest='command', required=True)

    p_demo = sub.add_parser('filter-demo', help='Fidelity-decreasing measurement filter example')
    p_demo.set_defaults(handler=cmd_filter_demo)

    p_build = sub.add_parser('build', help='Construct a cloning machine from two state files')
    p_build.add_argument('--psi0', required=True, help='State file of Psi_0')
    p_build.add_argument('--psi1', required=True, help='State file of Psi_1')
    p_build.add_argument('--sigma', help='State file of the blank state Sigma')
    p_build.add_argument('--phi-ab', dest='phi_ab', help='State file of the failure state Phi_AB (dimension n^2)')
    p_build.add_argument('--machine-out', dest='machine_out', default='machine.json', help='Machine file to write')
    p_build.add_argument('--eta0', type=_finite_float, help='Build an asymmetric machine with this eta0')
    p_build.set_defaults(handler=cmd_build)

    p_clone = sub.add_parser('clone', help='Monte Carlo run of the probe measurement')
    p_clone.add_argument('--machine', required=True, help='Machine file')
    p_clone.add_argument('--input', type=int, choices=(0, 1), required=True, help='Designated input 0 or 1')
    p_clone.add_argument('--shots', type=_positive_int, required=True, help='Number of shots')
    p_clone.add_argument('--seed', type=_seed, default=DEFAULT_SEED, help='64-bit seed')
    p_clone.add_argument('--workers', type=_positive_int, default=MC_WORKERS, help='Worker threads')
    p_clone.set_defaults(handler=cmd_clone)

    p_bound = sub.add_parser('bound', help='Evaluate the efficiency bounds')
    p_bound.add_argument('--overlap', type=_finite_float, required=True, help='Overlap s in [0, 1)')
    p_bound.add_argument('--flag-overlap', dest='flag_overlap', type=_finite_float,
                         help='Real success-flag overlap in [-1, 1]')
    p_bound.set_defaults(handler=cmd_bound)

    p_verify = sub.add_parser('verify', help='Check a machine file')
    p_verify.add_argument('--machine', required=True, help='Machine file')
    p_verify.add_argument('--unitary-tol', dest='unitary_tol', type=_finite_float, default=UNITARY_TOL)
    p_verify.add_argument('--gram-tol', dest='gram_tol', type=_finite_float, default=GRAM_TOL)
    p_verify.add_argument('--mapping-tol', dest='mapping_tol', type=_finite_float, default=MAPPING_TOL)
    p_verify.add_argument('--saturation-tol', dest='saturation_tol', type=_finite_float, default=SATURATION_TOL)
    p_verify.add_argument('--orthogonality-tol', dest='orthogonality_tol', type=_finite_float, default=ORTHOGONALITY_TOL)
    p_verify.add_argument('--bound-slack', dest='bound_slack', type=_finite_float, default=BOUND_SLACK)
    p_verify.add_argument('--golden-tol', dest='golden_tol', type=_finite_float, default=GOLDEN_TOL)
    p_verify.add_argument('--consistency-tol', dest='consistency_tol', type=_finite_float, default=CONSISTENCY_TOL)
    p_verify.set_defaults(handler=cmd_verify)
    return ap


def _report(rc: int, command: Optional[str], inputs: Dict[str, Any], results: Any,
            error: Optional[BaseException] = None) -> Dict[str, Any]:
    report = {
        'schema_version': SCHEMA_VERSION,
        'rc': rc,
        'command': command,
        'inputs': inputs,
        'results': results,
        'tool_version': TOOL_VERSION,
        'generator_id': GENERATOR_ID,
    }
    if error is not None:
        report['error'] = str(error)
        report['error_kind'] = type(error).__name__
    elif rc == EXIT_VERIFY:
        report['error'] = f"verification failed: {', '.join(results.get('failed_checks', []))}"
        report['error_kind'] = 'VerificationFailed'
    return report


def _exit_code(error: BaseException) -> int:
    if isinstance(error, (UsageError, FileFormatError, InputDimensionError, OSError)):
        return EXIT_USAGE
    return EXIT_DOMAIN


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        setup_logging()
        logger.error("Usage error: %s", e)
        print(write_report(_report(EXIT_USAGE, None, {}, None, e)))
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return int(e.code or 0)

    setup_logging(args.log_level)
    handler: Callable[[argparse.Namespace], CommandResult] = args.handler
    inputs = {k: v for k, v in vars(args).items() if k not in ('handler', 'command', 'output', 'log_level')}

    try:
        rc, results = handler(args)
        check_finite(results)
        report = _report(rc, args.command, inputs, results)
    except (SimulationError, OSError) as e:
        rc = _exit_code(e)
        logger.error("%s failed: %s", args.command, e)
        report = _report(rc, args.command, inputs, None, e)

    text = write_report(report, args.output)
    if not args.output:
        print(text)
    logger.info("Command %s finished with rc=%d", args.command, rc)
    return rc


if __name__ == '__main__':
    sys.exit(main())
