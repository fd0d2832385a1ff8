#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
Конфигурация симулятора клонирования.
Все допуски и параметры Монте-Карло читаются из окружения (или файла .env),
значения по умолчанию совпадают с контрактами модулей.
"""

import logging
import os
from typing import Optional

from dotenv import load_dotenv

BASE_DIR = os.path.dirname(os.path.abspath(__file__))
load_dotenv(os.path.join(BASE_DIR, '.env'))

TOOL_VERSION = os.getenv('TOOL_VERSION', '1.0.0')
SCHEMA_VERSION = 1
GENERATOR_ID = 'splitmix64-counter/v1'

# ========== ДОПУСКИ ЛИНЕЙНОЙ АЛГЕБРЫ ==========
HERMITIAN_TOL = float(os.getenv('HERMITIAN_TOL', '1e-10'))
PSD_CLIP = float(os.getenv('PSD_CLIP', '1e-12'))  # отрицательные собственные значения выше -PSD_CLIP обнуляются
ORTHO_TOL = float(os.getenv('ORTHO_TOL', '1e-10'))
DEPENDENCE_TOL = float(os.getenv('DEPENDENCE_TOL', '1e-8'))
UNITARY_TOL = float(os.getenv('UNITARY_TOL', '1e-10'))

# ========== СОСТОЯНИЯ ==========
NORM_TOL = float(os.getenv('NORM_TOL', '1e-12'))
DENSITY_TOL = float(os.getenv('DENSITY_TOL', '1e-10'))
PROB_FLOOR = float(os.getenv('PROB_FLOOR', '1e-14'))  # ниже этого исход без пост-состояния

# ========== СИНТЕЗ И МАШИНА ==========
GRAM_TOL = float(os.getenv('GRAM_TOL', '1e-9'))
PARALLEL_TOL = float(os.getenv('PARALLEL_TOL', '1e-8'))
NEAR_IDENTICAL_CUTOFF = float(os.getenv('NEAR_IDENTICAL_CUTOFF', '1e-8'))
PROBE_ORTHO_TOL = float(os.getenv('PROBE_ORTHO_TOL', '1e-12'))
SATURATION_TOL = float(os.getenv('SATURATION_TOL', '1e-9'))
MAPPING_TOL = float(os.getenv('MAPPING_TOL', '1e-9'))

# ========== ФАЙЛЫ СОСТОЯНИЙ ==========
STATE_FILE_NORM_TOL = float(os.getenv('STATE_FILE_NORM_TOL', '1e-6'))
STATE_FILE_WARN_TOL = float(os.getenv('STATE_FILE_WARN_TOL', '1e-12'))

# ========== МОНТЕ-КАРЛО ==========
MC_CHUNK = int(os.getenv('MC_CHUNK', '65536'))
MC_WORKERS = int(os.getenv('MC_WORKERS', '1'))
DEFAULT_SEED = int(os.getenv('DEFAULT_SEED', '42'))

LOG_LEVEL = os.getenv('LOG_LEVEL', 'INFO')
LOG_FORMAT = '[%(asctime)s] %(levelname)s: %(message)s'


def setup_logging(level: Optional[str] = None) -> None:
    """
    Настроить корневой логгер (stderr), как это делают CLI-скрипты проекта.

    Args:
        level: имя уровня (DEBUG, INFO, ...); по умолчанию LOG_LEVEL
    """
    name = (level or LOG_LEVEL).upper()
    logging.basicConfig(level=getattr(logging, name, logging.INFO), format=LOG_FORMAT, force=True)
