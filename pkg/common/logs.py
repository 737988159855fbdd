"""
로깅 설정 및 구조화 레코드 출력

콘솔에는 기존 스크립트와 같은 `[INFO] ...` 형식으로, 파일에는 타임스탬프를
붙여 남긴다. CSV 산출물에는 타임스탬프가 절대 들어가지 않는다.
"""

import json
import logging
import math
import os
import sys

import numpy as np

from common.errors import ConfigError

LOGGER_NAME = "gammalab"
CONSOLE_FORMAT = "[%(levelname)s] %(message)s"
FILE_FORMAT = "%(asctime)s [%(levelname)s] %(name)s: %(message)s"
BANNER_WIDTH = 70

_LEVELS = {"DEBUG": logging.DEBUG, "INFO": logging.INFO, "WARNING": logging.WARNING}


def get_logger(name=None):
    if not name:
        return logging.getLogger(LOGGER_NAME)
    return logging.getLogger(f"{LOGGER_NAME}.{name}")


def _level_from_env():
    raw = os.getenv("GAMMA_LAB_LOG_LEVEL", "INFO").strip().upper()
    if raw not in _LEVELS:
        raise ConfigError(
            f"GAMMA_LAB_LOG_LEVEL 환경 변수가 올바르지 않습니다: '{raw}' "
            f"(허용: {', '.join(_LEVELS)})",
            value=raw,
        )
    return _LEVELS[raw]


def setup_logging(log_file=None, level=None):
    """
    gammalab 로거에 콘솔 핸들러(및 선택적 파일 핸들러)를 붙인다.

    여러 번 호출해도 핸들러가 중복되지 않도록 기존 핸들러를 먼저 제거한다.
    """
    logger = get_logger()
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    logger.setLevel(level if level is not None else _level_from_env())
    logger.propagate = False

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
    logger.addHandler(console)

    if log_file:
        file_handler = logging.FileHandler(log_file, mode="w", encoding="utf-8")
        file_handler.setFormatter(logging.Formatter(FILE_FORMAT))
        logger.addHandler(file_handler)
    return logger


def jsonable(value):
    """numpy 스칼라, 무한대, dataclass 레코드를 JSON 직렬화 가능한 값으로 변환."""
    if hasattr(value, "to_record"):
        return jsonable(value.to_record())
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        if math.isnan(value):
            return None
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def dumps_record(payload):
    return json.dumps(jsonable(payload), sort_keys=True, ensure_ascii=False)


def log_record(logger, name, payload):
    """한 줄짜리 구조화 레코드: `[INFO] record <name> {json}`"""
    logger.info("record %s %s", name, dumps_record(payload))


def banner(title):
    print("=" * BANNER_WIDTH)
    print(title)
    print("=" * BANNER_WIDTH)
