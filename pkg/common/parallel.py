"""
스레드 병렬 처리 도우미

GAMMA_LAB_THREADS 로 스레드 수 상한을 정하고, 결과는 항상 입력 순서대로
돌려준다. 호출자는 순서가 고정된 결과 위에서 합산하므로 스레드 수와 무관하게
같은 값을 얻는다.
"""

import os
from concurrent.futures import ThreadPoolExecutor

from common.errors import ConfigError

THREADS_ENV = "GAMMA_LAB_THREADS"


def thread_count(override=None):
    """명시값이 있으면 그 값을, 없으면 GAMMA_LAB_THREADS (기본 1)."""
    if override is not None:
        raw = override
    else:
        raw = os.getenv(THREADS_ENV, "1")
    try:
        count = int(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{THREADS_ENV} 환경 변수가 유효한 정수가 아닙니다: '{raw}'", value=raw) from None
    if count < 1:
        raise ConfigError(f"{THREADS_ENV} 는 1 이상이어야 합니다: {count}", value=count)
    return count


def ordered_map(fn, items, threads=None):
    """fn 을 items 에 적용한 결과를 입력 순서 그대로 리스트로 반환."""
    items = list(items)
    workers = min(thread_count(threads), max(len(items), 1))
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
