"""
Файлы состояний, машин и отчётов (JSON).

Комплексные числа хранятся парами [re, im], унитарный оператор хранится построчно
с явной формой.
"""

import dataclasses
import json
import logging
import math
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from cloning_machine import PROBE_DIM, CloningAmplitudes, CloningMachine, MachineConfig
from quantum_state import PureState, SpaceShape
from sim_config import SCHEMA_VERSION, STATE_FILE_NORM_TOL, STATE_FILE_WARN_TOL
from tensor_core import DimensionMismatchError, NonFiniteError, SimulationError

logger = logging.getLogger(__name__)

MACHINE_KIND = 'cloning-machine'
REPORT_KEYS = ('schema_version', 'rc', 'command', 'inputs', 'results', 'tool_version', 'generator_id')


class FileFormatError(SimulationError):
    """Файл не разбирается или не соответствует формату."""


class InputDimensionError(DimensionMismatchError):
    """Размерности состояний из разных входных файлов не согласованы."""


# ========== КОМПЛЕКСНЫЕ ЧИСЛА ==========

def encode_complex(values: Sequence[complex]) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(values, dtype=np.complex128).ravel()]


def decode_complex(pairs: Any, what: str) -> np.ndarray:
    if not isinstance(pairs, list):
        raise FileFormatError(f"{what}: expected a list of [re, im] pairs")
    out = np.empty(len(pairs), dtype=np.complex128)
    for i, pair in enumerate(pairs):
        if (not isinstance(pair, list) or len(pair) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in pair)):
            raise FileFormatError(f"{what}[{i}]: expected [re, im] pair of numbers")
        if not all(math.isfinite(x) for x in pair):
            raise FileFormatError(f"{what}[{i}]: non-finite value")
        out[i] = complex(pair[0], pair[1])
    return out


def _read_json(path: str) -> Any:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FileFormatError(f"{path}: invalid JSON ({e})") from e
    except OSError as e:
        raise FileFormatError(f"{path}: cannot read file ({e})") from e


def _write_json(path: str, data: Any) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write('\n')


# ========== ФАЙЛ СОСТОЯНИЯ ==========

def parse_state(data: Any, what: str = 'state') -> PureState:
    """
    Разобрать {"dim": n, "amplitudes": [[re, im], ...]}.

    Отклонение нормы до 1e-6 исправляется перенормировкой (выше 1e-12 с
    предупреждением), большее отклонение считается ошибкой формата.
    """
    if not isinstance(data, dict):
        raise FileFormatError(f"{what}: expected an object with 'dim' and 'amplitudes'")
    dim = data.get('dim')
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 1:
        raise FileFormatError(f"{what}: 'dim' must be a positive integer")
    amps = decode_complex(data.get('amplitudes'), f"{what}.amplitudes")
    if amps.size != dim:
        raise FileFormatError(f"{what}: {amps.size} amplitudes for dim {dim}")
    norm = float(np.linalg.norm(amps))
    deviation = abs(norm - 1.0)
    if deviation > STATE_FILE_NORM_TOL:
        raise FileFormatError(f"{what}: norm {norm:.9f} is not 1 within {STATE_FILE_NORM_TOL:g}")
    if deviation > STATE_FILE_WARN_TOL:
        logger.warning("%s: norm deviates by %.3e, renormalizing", what, deviation)
    return PureState.from_amplitudes(amps / norm)


def load_state_file(path: str) -> PureState:
    return parse_state(_read_json(path), os.path.basename(path))


def state_to_dict(psi: PureState) -> Dict[str, Any]:
    return {'dim': psi.dim, 'amplitudes': encode_complex(psi.amplitudes)}


def save_state_file(path: str, psi: PureState) -> None:
    _write_json(path, state_to_dict(psi))


# ========== ФАЙЛ МАШИНЫ ==========

def machine_to_dict(machine: CloningMachine) -> Dict[str, Any]:
    cfg = machine.config
    amp = machine.amplitudes
    return {
        'schema_version': SCHEMA_VERSION,
        'kind': MACHINE_KIND,
        'n': machine.n,
        'probe_dim': PROBE_DIM,
        'psi0': state_to_dict(machine.psi0),
        'psi1': state_to_dict(machine.psi1),
        'overlap_s': machine.overlap_s,
        'rephase_angle': machine.rephase_angle,
        'config': {
            'sigma': state_to_dict(cfg.sigma),
            'phi_ab': state_to_dict(cfg.phi_ab),
            'probe_success': state_to_dict(cfg.probe_success),
            'probe_fail': state_to_dict(cfg.probe_fail),
        },
        'amplitudes': {'a00': amp.a00, 'a01': amp.a01, 'a10': amp.a10, 'a11': amp.a11},
        'unitary': {
            'shape': list(machine.unitary.shape),
            'entries': encode_complex(machine.unitary),
        },
        'eta': machine.eta,
    }


def save_machine(path: str, machine: CloningMachine) -> None:
    _write_json(path, machine_to_dict(machine))
    logger.info("Machine written to %s", path)


def _number(data: Dict[str, Any], key: str, what: str) -> float:
    value = data.get(key)
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise FileFormatError(f"{what}: '{key}' must be a finite number")
    return float(value)


def machine_from_dict(data: Any) -> CloningMachine:
    """
    Восстановить машину из словаря без повторной проверки унитарности:
    испорченный файл должен доходить до verify.
    """
    if not isinstance(data, dict):
        raise FileFormatError("machine file: expected an object")
    if data.get('schema_version') != SCHEMA_VERSION:
        raise FileFormatError(f"machine file: unsupported schema_version {data.get('schema_version')!r}")
    if data.get('kind') != MACHINE_KIND:
        raise FileFormatError(f"machine file: unexpected kind {data.get('kind')!r}")
    n = data.get('n')
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise FileFormatError("machine file: 'n' must be an integer >= 2")
    if data.get('probe_dim') != PROBE_DIM:
        raise FileFormatError(f"machine file: probe_dim must be {PROBE_DIM}")
    cfg = data.get('config')
    amp = data.get('amplitudes')
    unitary = data.get('unitary')
    if not isinstance(cfg, dict) or not isinstance(amp, dict) or not isinstance(unitary, dict):
        raise FileFormatError("machine file: 'config', 'amplitudes' and 'unitary' must be objects")

    total = n * n * PROBE_DIM
    if unitary.get('shape') != [total, total]:
        raise FileFormatError(f"machine file: unitary shape must be [{total}, {total}]")
    entries = decode_complex(unitary.get('entries'), 'unitary.entries')
    if entries.size != total * total:
        raise FileFormatError(f"machine file: {entries.size} unitary entries for shape {total}x{total}")
    matrix = entries.reshape(total, total)
    matrix.setflags(write=False)

    try:
        psi0 = parse_state(data.get('psi0'), 'psi0')
        psi1 = parse_state(data.get('psi1'), 'psi1')
        phi_ab = parse_state(cfg.get('phi_ab'), 'config.phi_ab')
        config = MachineConfig(
            sigma=parse_state(cfg.get('sigma'), 'config.sigma'),
            phi_ab=PureState(phi_ab.amplitudes, SpaceShape((n, n))),
            probe_success=parse_state(cfg.get('probe_success'), 'config.probe_success'),
            probe_fail=parse_state(cfg.get('probe_fail'), 'config.probe_fail'),
        )
        config.validate(n)
        if psi0.dim != n or psi1.dim != n:
            raise FileFormatError(f"machine file: states must have dimension {n}")
        amplitudes = CloningAmplitudes(*(_number(amp, k, 'amplitudes') for k in ('a00', 'a01', 'a10', 'a11')))
    except FileFormatError:
        raise
    except SimulationError as e:
        raise FileFormatError(f"machine file: {e}") from e

    return CloningMachine(
        psi0=psi0,
        psi1=psi1,
        overlap_s=_number(data, 'overlap_s', 'machine file'),
        rephase_angle=_number(data, 'rephase_angle', 'machine file'),
        config=config,
        amplitudes=amplitudes,
        unitary=matrix,
        eta=_number(data, 'eta', 'machine file'),
    )


def load_machine(path: str) -> CloningMachine:
    return machine_from_dict(_read_json(path))


# ========== ОТЧЁТЫ ==========

def to_jsonable(obj: Any) -> Any:
    """Привести результаты (dataclass, numpy, complex) к типам JSON."""
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: to_jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def check_finite(obj: Any, where: str = 'results') -> None:
    """Все числа отчёта должны быть конечными."""
    if isinstance(obj, dict):
        for k, v in obj.items():
            check_finite(v, f"{where}.{k}")
    elif isinstance(obj, list):
        for i, v in enumerate(obj):
            check_finite(v, f"{where}[{i}]")
    elif isinstance(obj, float) and not math.isfinite(obj):
        raise NonFiniteError(f"non-finite value at {where}")


def write_report(report: Dict[str, Any], path: Optional[str] = None) -> str:
    """Сериализовать отчёт; при path=None текст только возвращается."""
    text = json.dumps(report, ensure_ascii=False, indent=2)
    if path:
        folder = os.path.dirname(os.path.abspath(path))
        os.makedirs(folder, exist_ok=True)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text + '\n')
    return text


def read_report(source: str) -> Dict[str, Any]:
    """Прочитать отчёт из пути к файлу или из текста JSON."""
    if os.path.isfile(source):
        data = _read_json(source)
    else:
        try:
            data = json.loads(source)
        except json.JSONDecodeError as e:
            raise FileFormatError(f"report: invalid JSON ({e})") from e
    if not isinstance(data, dict):
        raise FileFormatError("report: expected an object")
    missing = [k for k in REPORT_KEYS if k not in data]
    if missing:
        raise FileFormatError(f"report: missing keys {missing}")
    if data['schema_version'] != SCHEMA_VERSION:
        raise FileFormatError(f"report: unsupported schema_version {data['schema_version']!r}")
    return data
