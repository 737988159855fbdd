"""
제약 조건 아래 Λ_δ 최소화: 담금질 + 좌표 하강

한 번의 이동은 값(왼쪽/오른쪽 극한) 하나를 바꾸거나 내부 구간점 하나를 두 이웃 사이에서
옮긴다. 어느 쪽이든 구간 한두 개만 바뀌므로 SegmentEnergyTable 로 바뀐 행만 다시 계산한다.
제약 ‖v − target‖_p ≤ ε 을 벗어나는 제안은 평가하지 않고 버린다.
"""

import math
from dataclasses import dataclass

import numpy as np

from common.errors import InvalidParameterError
from common.logs import get_logger
from gammalab.evaluator import QuadConfig, SegmentEnergyTable
from gammalab.gridfn import PiecewiseLinearFn, lp_distance

logger = get_logger("annealing")

SIDES = ("both", "left", "right")
BREAKPOINT_SHARE = 0.25         # 담금질 제안 중 구간점 이동의 비율
BREAKPOINT_STEP = 0.25          # 구간점 이동 폭 (양쪽 이웃 간격 중 작은 쪽 대비)
BREAKPOINT_MARGIN = 1e-3        # 이동 후 이웃과의 최소 간격 (두 이웃 사이 길이 대비)


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 4
    stages: int = 20
    moves_per_stage: int = 25
    cooling: float = 0.95
    target_acceptance: float = 0.3
    initial_temperature: float = None
    polish_sweeps: int = 2
    seed: int = 0
    epsilon_exponent: float = 0.5       # ε(δ) = δ^exponent
    threads: int = None

    def __post_init__(self):
        if self.restarts < 0 or self.stages < 0 or self.moves_per_stage < 0 or self.polish_sweeps < 0:
            raise InvalidParameterError("최적화 예산 값은 음수일 수 없습니다.", config=self.to_record())
        if not 0.0 < self.cooling < 1.0:
            raise InvalidParameterError(f"cooling 은 (0, 1) 안이어야 합니다: {self.cooling}")
        if not 0.0 < self.target_acceptance < 1.0:
            raise InvalidParameterError(f"target_acceptance 는 (0, 1) 안이어야 합니다: {self.target_acceptance}")
        if not self.epsilon_exponent > 0.0:
            raise InvalidParameterError(f"epsilon_exponent 는 양수여야 합니다: {self.epsilon_exponent}")

    def epsilon(self, delta):
        return delta ** self.epsilon_exponent

    def to_record(self):
        return {
            "restarts": self.restarts,
            "stages": self.stages,
            "moves_per_stage": self.moves_per_stage,
            "cooling": self.cooling,
            "target_acceptance": self.target_acceptance,
            "initial_temperature": self.initial_temperature,
            "polish_sweeps": self.polish_sweeps,
            "seed": self.seed,
            "epsilon_exponent": self.epsilon_exponent,
        }


@dataclass(frozen=True)
class AnnealResult:
    name: str
    best: PiecewiseLinearFn
    energy: float
    distance: float
    start_energy: float
    accepted: int
    evaluated: int


def start_rng(seed, delta_index, start_index):
    """(seed, δ 번호, 시작 번호) 마다 독립적인 난수 흐름."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(delta_index), int(start_index)]))


def _move(fn, k, side, step):
    left = np.array(fn.left)
    right = np.array(fn.right)
    last = fn.n_segments
    if side == "both":
        left[k] += step
        right[k] += step
        changed = [s for s in (k - 1, k) if 0 <= s < last]
    elif side == "left":
        left[k] += step
        changed = [k - 1]
    else:
        right[k] += step
        changed = [k]
    return PiecewiseLinearFn(fn.x, left, right, fn.truncation_of_line), changed


def _shift(fn, k, fraction):
    """
    내부 구간점 k 를 fraction·min(양쪽 간격) 만큼 옮긴다. 점의 왼쪽/오른쪽 값은 따라 움직인다.

    이웃과 BREAKPOINT_MARGIN 보다 가까워지면 None. 구간점 순서는 항상 유지된다.
    """
    if not 0 < k < fn.n_segments:
        return None
    lo, here, hi = fn.x[k - 1], fn.x[k], fn.x[k + 1]
    moved = here + fraction * min(here - lo, hi - here)
    margin = BREAKPOINT_MARGIN * (hi - lo)
    if not lo + margin < moved < hi - margin:
        return None
    x = np.array(fn.x)
    x[k] = moved
    return PiecewiseLinearFn(x, fn.left, fn.right, fn.truncation_of_line), [k - 1, k]


def _sides(k, fn):
    return SIDES if 0 < k < fn.n_segments else ("both",)


class _Search:
    """한 시작점의 탐색 상태. 제약을 만족한 모든 평가 중 최솟값을 기록한다."""

    def __init__(self, table, target, epsilon, p):
        self.table = table
        self.energy = table.total
        self.target = target
        self.epsilon = epsilon
        self.p = p
        self.best_fn = table.fn
        self.best_energy = self.energy
        self.evaluated = 1
        self.accepted = 0

    def propose(self, move):
        """move = (후보 함수, 바뀐 구간) 또는 None. (표, 에너지) 또는 제약 위반/발산이면 None."""
        if move is None:
            return None
        candidate, changed = move
        if lp_distance(candidate, self.target, self.p) > self.epsilon:
            return None
        table = self.table.propose(candidate, changed)
        energy = table.total
        if not math.isfinite(energy):
            return None
        self.evaluated += 1
        if energy < self.best_energy:
            self.best_energy = energy
            self.best_fn = candidate
        return table, energy

    def accept(self, table, energy):
        self.table = table
        self.energy = energy
        self.accepted += 1


def _random_move(fn, rng, width):
    points = fn.n_segments + 1
    if fn.n_segments > 1 and rng.random() < BREAKPOINT_SHARE:
        k = int(rng.integers(1, fn.n_segments))
        return _shift(fn, k, float(rng.normal(0.0, BREAKPOINT_STEP)))
    k = int(rng.integers(0, points))
    sides = _sides(k, fn)
    side = sides[int(rng.integers(0, len(sides)))]
    return _move(fn, k, side, float(rng.normal(0.0, width)))


def _descend(search, move):
    result = search.propose(move)
    if result is not None and result[1] < search.energy:
        search.accept(*result)
        return True
    return False


def anneal(name, start, target, delta, profile, opt, rng, quad=None):
    """
    start 에서 담금질 후 좌표 하강. start 가 발산하거나 제약을 벗어나면 None.

    온도 T_j = T₀·cooling^j, 값 이동 폭은 단계별 수용률이 target_acceptance 에 가깝도록 조정.
    좌표 하강은 값 ±폭과 구간점 ±BREAKPOINT_STEP 를 차례로 시도한다.
    """
    quad = quad or QuadConfig()
    p = profile.p
    epsilon = opt.epsilon(delta)
    distance = lp_distance(start, target, p)
    if distance > epsilon:
        return None
    table = SegmentEnergyTable(start, delta, p, profile, quad)
    if table.certificate is not None:
        logger.debug("시작점 %s 발산 (δ=%.4g) 건너뜀", name, delta)
        return None

    search = _Search(table, target, epsilon, p)
    start_energy = search.energy
    temperature = opt.initial_temperature or 0.05 * max(start_energy, 1e-3)
    width = 0.5 * delta
    points = start.n_segments + 1

    for _ in range(opt.stages):
        accepted = 0
        for _ in range(opt.moves_per_stage):
            result = search.propose(_random_move(search.table.fn, rng, width))
            if result is None:
                continue
            table, energy = result
            if energy <= search.energy or rng.random() < math.exp(-(energy - search.energy) / temperature):
                search.accept(table, energy)
                accepted += 1
        if opt.moves_per_stage:
            rate = accepted / opt.moves_per_stage
            width *= math.exp(2.0 * (rate - opt.target_acceptance))
        temperature *= opt.cooling

    # 좌표 하강: 최적점에서 다시 시작
    if opt.polish_sweeps:
        search.table = SegmentEnergyTable(search.best_fn, delta, p, profile, quad)
        search.energy = search.best_energy
    shift = BREAKPOINT_STEP
    for _ in range(opt.polish_sweeps):
        improved = False
        for k in range(points):
            for side in _sides(k, search.table.fn):
                for step in (width, -width):
                    improved |= _descend(search, _move(search.table.fn, k, side, step))
            for fraction in (shift, -shift):
                improved |= _descend(search, _shift(search.table.fn, k, fraction))
        if not improved:
            width *= 0.5
            shift *= 0.5

    return AnnealResult(
        name=name,
        best=search.best_fn,
        energy=search.best_energy,
        distance=lp_distance(search.best_fn, target, p),
        start_energy=start_energy,
        accepted=search.accepted,
        evaluated=search.evaluated,
    )
