"""
무작위 구간별 선형 함수 모음 위에서 에너지의 대칭성/단조성/결정성 검사

각 함수마다 다음이 성립하는지 본다.
- Λ_δ(−u) = Λ_δ(u + c) = Λ_δ(u ∘ 반사) = Λ_δ(u)
- J ⊂ I 이면 Λ_δ(u, J) ≤ Λ_δ(u, I)
- 스레드 수가 달라도 비트 단위로 같은 값
- Λ_δ(u) = δ^p·Λ(u/δ)
- (0,n) 으로 늘린 u 에 대해 Λ_{δ/n}(u) = Λ_δ(u_n, (0,n))/n
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from common.logs import get_logger, log_record
from gammalab.evaluator import QuadConfig, lambda_delta, lambda_plain
from gammalab.gridfn import (
    PiecewiseLinearFn,
    reflect,
    scale_values,
    shift_values,
    spatial_block_rescale,
)

logger = get_logger("invariants")

DEFAULT_CASES = 100
DEFAULT_SEED = 20240607
MAX_SEGMENTS = 5
JUMP_EVERY = 5              # 다섯 번째 함수마다 작은 점프 하나
JUMP_FRACTION = 0.3         # 점프 크기 = 0.3·δ
RTOL = 1e-6
ATOL = 1e-12
THREADS_COMPARED = (1, 4)


@dataclass
class InvariantReport:
    cases: int
    seed: int
    delta: float
    rows: list = field(default_factory=list)

    @property
    def failures(self):
        return [row for row in self.rows if not row["passed"]]

    @property
    def passed(self):
        return not self.failures

    def to_record(self):
        return {
            "cases": self.cases,
            "seed": self.seed,
            "delta": self.delta,
            "checks": len(self.rows),
            "failures": len(self.failures),
            "passed": self.passed,
        }


def random_corpus(count=DEFAULT_CASES, seed=DEFAULT_SEED, delta=0.1):
    """(0,1) 위의 무작위 함수 count 개. 같은 seed 면 같은 모음."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed)]))
    corpus = []
    for index in range(int(count)):
        segments = int(rng.integers(1, MAX_SEGMENTS + 1))
        inner = np.sort(rng.uniform(0.05, 0.95, size=segments - 1))
        x = np.concatenate(([0.0], inner, [1.0]))
        if np.any(np.diff(x) < 1e-3):
            x = np.linspace(0.0, 1.0, segments + 1)
        values = np.cumsum(rng.normal(0.0, 0.5, size=segments + 1))
        left, right = values.copy(), values.copy()
        if index % JUMP_EVERY == JUMP_EVERY - 1 and segments > 1:
            k = int(rng.integers(1, segments))
            right[k:] += JUMP_FRACTION * delta
            left[k + 1:] += JUMP_FRACTION * delta
        corpus.append(PiecewiseLinearFn(x, left, right))
    return corpus


def _close(value, reference, rtol=RTOL):
    if math.isinf(value) or math.isinf(reference):
        return value == reference
    return abs(value - reference) <= rtol * max(abs(value), abs(reference)) + ATOL


def _row(case, check, value, reference, passed):
    return {"case": case, "check": check, "value": value, "reference": reference, "passed": bool(passed)}


def _stretch(u, n):
    """u(x) 를 (0,n) 위의 n·u(x/n) 으로."""
    return PiecewiseLinearFn(n * u.x, n * u.left, n * u.right)


def check_function(case, u, delta, profile, config, rng):
    """함수 하나에 대한 검사 행 목록."""
    p = profile.p
    interval = u.interval

    def energy(fn, window=interval, d=delta, cfg=config):
        return lambda_delta(fn, window, d, p, profile, cfg).value

    base = energy(u)
    rows = [
        _row(case, "negation", energy(scale_values(u, -1.0)), base, None),
        _row(case, "shift", energy(shift_values(u, float(rng.normal(0.0, 1.0)))), base, None),
        _row(case, "reflection", energy(reflect(u)), base, None),
    ]
    for row in rows:
        row["passed"] = _close(row["value"], row["reference"])

    lo, hi = np.sort(rng.uniform(0.0, 1.0, size=2))
    if hi - lo > 1e-3:
        inner = energy(u, (float(lo), float(hi)))
        rows.append(_row(case, "monotonicity", inner, base, inner <= base * (1.0 + RTOL) + ATOL))

    single = lambda_delta(u, interval, delta, p, profile, replace(config, threads=THREADS_COMPARED[0])).value
    multi = lambda_delta(u, interval, delta, p, profile, replace(config, threads=THREADS_COMPARED[1])).value
    rows.append(_row(case, "threads", multi, single, multi == single))

    scaled = delta ** p * lambda_plain(scale_values(u, 1.0 / delta), interval, p, profile, config).value
    rows.append(_row(case, "definitional_scaling", scaled, base, _close(scaled, base)))

    n = 2 + case % 4
    stretched = _stretch(u, n)
    identity_check = spatial_block_rescale(stretched, n)
    left = energy(identity_check, d=delta / n)
    right = energy(stretched, (0.0, float(n))) / n
    rows.append(_row(case, f"block_rescale_n{n}", left, right, _close(left, right)))
    return rows


def run_suite(profile, delta=0.1, cases=DEFAULT_CASES, seed=DEFAULT_SEED, config=None):
    """무작위 모음 전체를 검사한 InvariantReport. 실패는 보고서에 담고 예외를 던지지 않는다."""
    config = config or QuadConfig()
    report = InvariantReport(cases=int(cases), seed=int(seed), delta=float(delta))
    corpus = random_corpus(cases, seed, delta)
    for case, u in enumerate(corpus):
        rng = np.random.default_rng(np.random.SeedSequence([int(seed), case]))
        report.rows.extend(check_function(case, u, delta, profile, config, rng))
    for row in report.failures:
        logger.warning("불변식 실패: case=%d %s (%.17g vs %.17g)", row["case"], row["check"], row["value"], row["reference"])
    log_record(logger, "invariants", report.to_record())
    return report
