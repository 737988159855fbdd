#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
복원 수열 구성

기준 δ_k 에서 에너지가 낮은 U 의 경쟁 함수 하나로부터, 더 작은 δ 에서
아핀/구간별 선형/계단 목표를 근사하는 함수를 만든다.

    1) 기준 경쟁 함수 양 끝을 U 로 평탄화 (기준점은 국소 에너지 스캔으로 선택)
    2) m = ⌊δ_k/δ⌋ 칸으로 타일링 후 1/m̂ 배
    3) 아핀 변수 변환으로 (a, b) 위에 올리고 경계를 목표 함수와 맞춤
"""

import math
from dataclasses import dataclass

import numpy as np

from common.errors import InvalidLadderError, InvalidParameterError, InvalidSpecError
from common.logs import get_logger, log_record
from common.parallel import ordered_map
from gammalab import profile as phi
from gammalab.evaluator import QuadConfig, lambda_delta, local_energy
from gammalab.gridfn import (
    FlattenSpec,
    PiecewiseLinearFn,
    evaluate,
    flatten_near_points,
    glue,
    lp_distance,
    make_affine,
    make_heaviside,
    restrict,
    scale_values,
    tile_rescale,
)

logger = get_logger("recovery")


# ============================================================================
# Constants
# ============================================================================

COLLAR_CAP = 0.45               # 평탄화 폭 c 의 상한 (구간 길이 대비)
ANCHOR_CANDIDATES = 9
BOUNDARY_CELLS = 3.0             # 경계 평탄화 폭 = 목표 기울기 기준 δ 칸 수
STEP_WIDTH_FACTOR = 16.0
STEP_SCAN_RANGE = (0.125, 0.25)  # localize_step_competitor 의 b 탐색 범위
STEP_COLLAR_CAP = 1.0 / 32.0
M_HAT_SNAP = 1e-9
GRADINGS = tuple(0.5 * j for j in range(9))   # graded_step 이 훑는 sinh 기울기 b
GRADED_EDGE_GUARD = 1e-3        # 경사로가 구간 끝에 닿지 않도록 남기는 비율
GRADED_BISECTIONS = 40


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class TilingPlan:
    base_delta: float
    target_delta: float
    m_hat: float
    m: int
    c_k: float

    def __post_init__(self):
        if not (self.base_delta > 0.0 and self.target_delta > 0.0):
            raise InvalidLadderError("δ_k 와 δ 는 양수여야 합니다.", base_delta=self.base_delta, target_delta=self.target_delta)
        if self.m < 1 or not self.m <= self.m_hat < self.m + 1:
            raise InvalidLadderError(f"m={self.m}, m̂={self.m_hat} 가 m ≤ m̂ < m+1 을 만족하지 않습니다.")
        if self.c_k < min(math.sqrt(self.base_delta), COLLAR_CAP) * (1.0 - 1e-12):
            raise InvalidLadderError(f"c_k={self.c_k} 가 δ_k^(1/2) 보다 작습니다.", c_k=self.c_k)

    @classmethod
    def build(cls, base_delta, target_delta, c_k=None):
        if target_delta > base_delta * (1.0 + 1e-12):
            raise InvalidLadderError(
                f"δ={target_delta} 가 기준 δ_k={base_delta} 보다 큽니다.",
                base_delta=base_delta,
                target_delta=target_delta,
            )
        m_hat = base_delta / target_delta
        nearest = round(m_hat)
        if abs(m_hat - nearest) <= M_HAT_SNAP * m_hat:
            m_hat = float(nearest)
        m = max(int(math.floor(m_hat)), 1)
        m_hat = max(m_hat, 1.0)
        return cls(base_delta, target_delta, m_hat, m, default_collar(base_delta) if c_k is None else c_k)

    def to_record(self):
        return {
            "base_delta": self.base_delta,
            "target_delta": self.target_delta,
            "m_hat": self.m_hat,
            "m": self.m,
            "c_k": self.c_k,
        }


def default_collar(delta, length=1.0):
    return min(math.sqrt(delta), COLLAR_CAP * length)


def boundary_collar(delta, slope, length):
    """기울기 s 인 목표의 경계 평탄화 폭: BOUNDARY_CELLS·δ/|s| (한 칸 높이가 δ), 최대 COLLAR_CAP·L."""
    return min(BOUNDARY_CELLS * delta / abs(slope), COLLAR_CAP * length)


def _provenance(construction, params, fn, target=None, energy=None, p=1.0):
    payload = {"construction": construction, "params": params, "function": fn.to_record()}
    if target is not None:
        payload["lp_distance"] = lp_distance(fn, target, p, fn.interval)
    if energy is not None:
        payload["energy"] = energy.value
    log_record(logger, "recovery", payload)


# ============================================================================
# Anchors / flattening
# ============================================================================

def scan_anchor(u, lo, hi, delta, profile, config=None, candidates=ANCHOR_CANDIDATES):
    """(lo, hi) 안의 후보점 중 국소 에너지가 가장 작은 점."""
    points = lo + (hi - lo) * np.arange(1, candidates + 1) / (candidates + 1)
    energies = [local_energy(u, float(x), delta, profile.p, profile, config) for x in points]
    return float(points[int(np.argmin(energies))])


def flatten_with_anchors(u, target, collar, delta, profile, config=None):
    """양 끝에서 (c/2, c) 안의 기준점을 골라 삼등분 평탄화. (결과, FlattenSpec)"""
    a, b = float(u.x[0]), float(u.x[-1])
    x1 = scan_anchor(u, a + 0.5 * collar, a + collar, delta, profile, config)
    x2 = scan_anchor(u, b - collar, b - 0.5 * collar, delta, profile, config)
    spec = FlattenSpec.thirds((a, b), x1, x2, target)
    return flatten_near_points(u, spec), spec


def flatten_candidate(base, base_delta, profile, config=None, c_k=None):
    """(0,1) 위 U 의 경쟁 함수 양 끝을 U 로 맞춘 û."""
    c_k = default_collar(base_delta) if c_k is None else c_k
    identity = make_affine((0.0, 1.0), 1.0, 0.0)
    return flatten_with_anchors(base, identity, c_k, base_delta, profile, config)


def close_endpoints(base):
    """
    (0,1) 위 계단형 기준 함수를 base(0) = 0, base(1) = 1 로 닫는다. 닫을 수 없으면 None.

    첫 구간 (값 0 인 상수) 폭의 절반 σ 만큼 왼쪽으로 밀고 (1 − σ, 1] 에 값 1 을 붙인다.
    덧붙는 점프 1 − base(1−) 는 base 의 가장 큰 점프를 넘지 않아야 한다.
    타일링하면 이웃 칸의 끝 조각이 합쳐져 원래 첫 칸 폭이 된다.
    """
    if abs(base.x[0]) > 1e-12 or abs(base.x[-1] - 1.0) > 1e-12 or abs(base.right[0]) > 1e-9:
        return None
    gap = 1.0 - base.left[-1]
    if abs(gap) <= 1e-9:
        return base
    jumps = np.abs(base.jumps)
    if base.n_segments < 2 or gap < 0.0 or gap > jumps.max() * (1.0 + 1e-9):
        return None
    if abs(base.left[1] - base.right[0]) > 1e-12:
        return None
    sigma = 0.5 * (base.x[1] - base.x[0])
    x = np.concatenate(([0.0], base.x[1:-1] - sigma, [1.0 - sigma, 1.0]))
    left = np.concatenate(([0.0], base.left[1:-1], [base.left[-1], 1.0]))
    right = np.concatenate(([0.0], base.right[1:-1], [1.0, 1.0]))
    return PiecewiseLinearFn(x, left, right)


# ============================================================================
# Tiling
# ============================================================================

def _require_unit_endpoints(base):
    if abs(base.x[0]) > 1e-12 or abs(base.x[-1] - 1.0) > 1e-12:
        raise InvalidSpecError("기준 함수는 (0, 1) 위에서 정의되어야 합니다.")
    if abs(base.right[0]) > 1e-9 or abs(base.left[-1] - 1.0) > 1e-9:
        raise InvalidSpecError(
            f"기준 함수는 base(0)=0, base(1)=1 이어야 합니다: ({base.right[0]}, {base.left[-1]})"
        )


def unit_cell_tiling(u_hat, m):
    """(0, m) 위의 v̂(y) = [y] + û(y − [y])."""
    g = tile_rescale(u_hat, m)
    x = m * g.x
    x[0], x[-1] = 0.0, float(m)
    return PiecewiseLinearFn(x, m * g.left, m * g.right)


def tile_recovery(base, plan):
    """v_δ(x) = v̂(m x)/m̂ on (0, 1)."""
    _require_unit_endpoints(base)
    tiled = tile_rescale(base, plan.m)
    if plan.m_hat == plan.m:
        return tiled
    return scale_values(tiled, plan.m / plan.m_hat)


def _pullback(v, a, length, offset, gain):
    """w(x) = offset + gain·v((x − a)/length) on (a, a + length)."""
    x = a + length * v.x
    x[0], x[-1] = a, a + length
    return PiecewiseLinearFn(x, offset + gain * v.left, offset + gain * v.right)


# ============================================================================
# Recovery constructions
# ============================================================================

def _affine_slope(target):
    slopes = target.slopes
    if not target.is_continuous or np.any(np.abs(slopes - slopes[0]) > 1e-12 * max(1.0, abs(slopes[0]))):
        raise InvalidSpecError("recover_affine 의 목표는 아핀 함수여야 합니다.", target=target.to_record())
    return float(slopes[0])


def recover_affine(target, delta, base_candidate, base_delta, profile, config=None, measure=True):
    """
    (a, b) 위 아핀 목표를 δ 에서 근사하는 함수.

    기울기 s, 길이 L 일 때 기준 경쟁 함수는 유효 스케일 δ' = δ/(|s|·L) 에서 타일링된다.
    계단형 기준 함수는 close_endpoints 로 닫아 쓰고, 닫을 수 없으면 δ_k^(1/2) 폭으로 평탄화한다.
    양 끝 (c/6 폭, c = boundary_collar(δ, s, L)) 에서는 목표와 정확히 같다.
    """
    config = config or QuadConfig()
    slope = _affine_slope(target)
    a, b = float(target.x[0]), float(target.x[-1])
    length = b - a
    if slope == 0.0:
        if measure:
            _provenance("recover_affine", {"delta": delta, "slope": 0.0}, target, target, None, profile.p)
        return target

    effective = delta / (abs(slope) * length)
    plan = TilingPlan.build(base_delta, effective)
    u_hat, base_spec = close_endpoints(base_candidate), None
    if u_hat is None:
        u_hat, base_spec = flatten_candidate(base_candidate, base_delta, profile, config, plan.c_k)
    tiled = tile_recovery(u_hat, plan)
    start = evaluate(target, a)
    w = _pullback(tiled, a, length, start, slope * length)

    collar = boundary_collar(delta, slope, length)
    recovered, spec = flatten_with_anchors(w, target, collar, delta, profile, config)
    recovered = PiecewiseLinearFn(recovered.x, recovered.left, recovered.right, target.truncation_of_line)

    if measure:
        energy = lambda_delta(recovered, recovered.interval, delta, profile.p, profile, config)
        params = {
            "delta": delta,
            "slope": slope,
            "interval": [a, b],
            "plan": plan.to_record(),
            "base_flatten": base_spec.to_record() if base_spec is not None else "closed",
            "boundary_flatten": spec.to_record(),
        }
        _provenance("recover_affine", params, recovered, target, energy, profile.p)
    return recovered


def recover_piecewise_linear(target, delta, base_candidate, base_delta, profile, config=None, measure=True):
    """구간마다 recover_affine 을 적용해 이어 붙인다. 상수 구간은 그대로 둔다."""
    config = config or QuadConfig()
    if not target.is_continuous:
        raise InvalidSpecError("recover_piecewise_linear 의 목표는 연속이어야 합니다.")

    def one(k):
        piece = restrict(target, (target.x[k], target.x[k + 1]))
        if piece.slopes[0] == 0.0:
            return piece
        return recover_affine(piece, delta, base_candidate, base_delta, profile, config, measure=False)

    pieces = ordered_map(one, range(target.n_segments), config.threads)
    glued = glue(pieces)
    recovered = PiecewiseLinearFn(glued.x, glued.left, glued.right, target.truncation_of_line)
    if measure:
        energy = lambda_delta(recovered, recovered.interval, delta, profile.p, profile, config)
        params = {"delta": delta, "base_delta": base_delta, "segments": target.n_segments}
        _provenance("recover_piecewise_linear", params, recovered, target, energy, profile.p)
    return recovered


def step_jump_ratio(profile):
    """
    계단 높이를 δ 의 몇 배로 둘지. None 이면 연속 경사로.

    φ 가 (0, 1] 에서 0 이면 높이 ≤ δ (이웃 칸은 에너지 0),
    φ 가 유계 지지이면 높이 > 지지 끝·δ (모든 칸 쌍이 에너지 0).
    """
    if phi.antiderivative(profile, 1.0) == 0.0:
        return 1.0
    if phi.tail_value(profile) == 0.0:
        return 2.0 * phi.tail_start(profile)
    return None


def default_step_width(c, delta):
    width = max(STEP_WIDTH_FACTOR * delta, delta * math.ceil(1.0 / delta) * delta)
    return min(width, c, 1.0 - c)


def recover_step_p1(c, delta, profile, width=None, measure=True, config=None):
    """(c − w, c + w) 를 가로지르는 단조 계단으로 H_c 를 근사."""
    if not 0.0 < c < 1.0:
        raise InvalidParameterError(f"점프 위치 c 는 (0, 1) 안이어야 합니다: {c}", c=c)
    if not delta > 0.0:
        raise InvalidParameterError(f"δ 는 양수여야 합니다: {delta}", delta=delta)
    w = default_step_width(c, delta) if width is None else min(width, c, 1.0 - c)
    if not w > 0.0:
        raise InvalidParameterError(f"경사로 폭은 양수여야 합니다: {w}", width=w)

    count = _step_jumps(delta, profile)
    lo, hi = c - w, c + w
    if count >= 1:
        cell = 2.0 * w / count
        cuts = [lo + (k + 0.5) * cell for k in range(count)]
        levels = [k / count for k in range(count + 1)]
        x = [0.0, *cuts, 1.0]
        left = [0.0, *levels[:-1], 1.0]
        right = [*levels, 1.0]
        fn = PiecewiseLinearFn(x, left, right)
        kind = "staircase"
    else:
        fn = step_ramp(c, w)
        kind = "ramp"

    if measure:
        energy = lambda_delta(fn, fn.interval, delta, profile.p, profile, config or QuadConfig())
        params = {"c": c, "delta": delta, "width": w, "jumps": count, "shape": kind}
        _provenance("recover_step_p1", params, fn, make_heaviside((0.0, 1.0), c), energy, 1.0)
    return fn


def _step_jumps(delta, profile):
    ratio = step_jump_ratio(profile) if delta < 1.0 else None
    if ratio == 1.0:
        return int(math.ceil(1.0 / (ratio * delta) - 1e-9))
    if ratio is not None:
        return int(math.floor(1.0 / (ratio * delta) + 1e-9))
    return 0


def graded_staircase(c, width, count, grading):
    """
    0 → 1 을 count 번의 같은 높이 점프로 오르는 계단. 점프 위치는 c + w·sinh(b·t)/sinh(b).

    t 는 [−1, 1] 의 균등 격자라 grading b 가 클수록 가운데 칸이 좁고 양 끝 칸이 넓다.
    """
    if count < 2:
        raise InvalidParameterError(f"점프 수는 2 이상이어야 합니다: {count}", count=count)
    if not 0.0 < width < min(c, 1.0 - c):
        raise InvalidParameterError(f"경사로 폭은 (0, min(c, 1 − c)) 안이어야 합니다: {width}", width=width)
    t = np.linspace(-1.0, 1.0, count)
    shape = np.sinh(grading * t) / math.sinh(grading) if grading > 0.0 else t
    levels = np.arange(count + 1) / count
    x = np.concatenate(([0.0], c + width * shape, [1.0]))
    left = np.concatenate(([0.0], levels[:-1], [1.0]))
    right = np.concatenate((levels, [1.0]))
    return PiecewiseLinearFn(x, left, right)


def _widest_within(build, target, budget, limit):
    """‖build(w) − target‖₁ ≤ budget 인 가장 큰 w ≤ limit (이분법)."""
    if lp_distance(build(limit), target, 1.0) <= budget:
        return limit
    lo, hi = 0.0, limit
    for _ in range(GRADED_BISECTIONS):
        mid = 0.5 * (lo + hi)
        if lp_distance(build(mid), target, 1.0) <= budget:
            lo = mid
        else:
            hi = mid
    return lo


def graded_step(c, delta, profile, budget, config=None):
    """
    ‖g − H_c‖₁ ≤ budget 안에서 에너지가 가장 낮은 graded_staircase. (함수, grading) 또는 None.

    점프 높이는 recover_step_p1 과 같고, grading 마다 예산이 허락하는 가장 넓은 폭을 쓴다.
    φ 에 맞는 점프 높이가 없으면 None.
    """
    count = _step_jumps(delta, profile)
    if count < 2:
        return None
    config = config or QuadConfig()
    target = make_heaviside((0.0, 1.0), c)
    limit = (1.0 - GRADED_EDGE_GUARD) * min(c, 1.0 - c)
    best = None
    for grading in GRADINGS:
        width = _widest_within(lambda w: graded_staircase(c, w, count, grading), target, budget, limit)
        if not width > 0.0:
            continue
        fn = graded_staircase(c, width, count, grading)
        energy = lambda_delta(fn, fn.interval, delta, profile.p, profile, config).value
        if best is None or energy < best[0]:
            best = (energy, fn, grading, width)
    if best is None:
        return None
    energy, fn, grading, width = best
    log_record(logger, "recovery", {
        "construction": "graded_step",
        "params": {"c": c, "delta": delta, "jumps": count, "grading": grading, "width": width},
        "energy": energy,
    })
    return fn, grading


def step_ramp(c, width, nodes=2):
    """(c − w, c + w) 에서 0 → 1 로 오르는 연속 경사로. 경사 구간에 nodes 개의 구간점."""
    lo, hi = c - width, c + width
    ramp = np.linspace(lo, hi, max(int(nodes), 2))
    points = np.unique(np.concatenate(([0.0], ramp[(ramp > 0.0) & (ramp < 1.0)], [lo, hi], [1.0])))
    points = points[(points >= 0.0) & (points <= 1.0)]
    values = np.clip((points - lo) / (hi - lo), 0.0, 1.0)
    return PiecewiseLinearFn(points, values, values)


# ============================================================================
# Step-target transfers
# ============================================================================

def localize_step_competitor(g, delta, profile, collar=None, config=None):
    """
    H_{1/2} 근처의 경쟁 함수 g 를 (0, b − 2c) 에서 0, (b̂ + 2c, 1) 에서 1 로 만든다.

    b ∈ [1/8, 1/4], b̂ = b + 1/2 는 두 기준점의 국소 에너지 합이 최소인 점.
    """
    collar = min(math.sqrt(delta) if collar is None else collar, STEP_COLLAR_CAP)
    lo, hi = STEP_SCAN_RANGE
    candidates = np.linspace(lo, hi, 2 * ANCHOR_CANDIDATES - 1)
    costs = [
        local_energy(g, float(b), delta, profile.p, profile, config)
        + local_energy(g, float(b) + 0.5, delta, profile.p, profile, config)
        for b in candidates
    ]
    b = float(candidates[int(np.argmin(costs))])
    spec = FlattenSpec(b, b + 0.5, make_heaviside((0.0, 1.0), 0.5), collar, collar, collar, collar)
    h = flatten_near_points(g, spec)
    log_record(logger, "recovery", {"construction": "localize_step_competitor", "params": spec.to_record()})
    return h


def step_to_identity(h, delta):
    """계단 경쟁 함수를 n = ⌊ln δ^{-1}⌋ 칸 타일링해 U 의 경쟁 함수로. (f, μ = δ/n)"""
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"δ 는 (0, 1) 안이어야 합니다: {delta}", delta=delta)
    n = max(1, int(math.floor(math.log(1.0 / delta))))
    f = tile_rescale(h, n)
    return f, delta / n


def clamp_and_tile(u, c, n):
    """û = 0 on (0, c), u on [c, 1 − c], 1 on (1 − c, 1) 를 n 칸 타일링."""
    if not 0.0 < c < 0.5:
        raise InvalidParameterError(f"c 는 (0, 1/2) 안이어야 합니다: {c}", c=c)
    zero = PiecewiseLinearFn([0.0, c], [0.0, 0.0], [0.0, 0.0])
    one = PiecewiseLinearFn([1.0 - c, 1.0], [1.0, 1.0], [1.0, 1.0])
    clamped = glue([zero, restrict(u, (c, 1.0 - c)), one])
    return tile_rescale(clamped, n)


def build_ladder(base_delta, count, c_k=None):
    """δ_j = δ_k / (⌈1/c_k⌉·j): 모든 단계가 δ ≤ δ_k·c_k 를 만족한다."""
    if count < 1:
        raise InvalidLadderError(f"사다리 단계 수는 1 이상이어야 합니다: {count}", count=count)
    if not 0.0 < base_delta < 1.0:
        raise InvalidLadderError(f"기준 δ_k 는 (0, 1) 안이어야 합니다: {base_delta}", base_delta=base_delta)
    c_k = default_collar(base_delta) if c_k is None else c_k
    step = int(math.ceil(1.0 / c_k))
    return [base_delta / (step * j) for j in range(1, count + 1)]
