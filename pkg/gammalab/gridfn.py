#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
구간별 선형 함수 (점프 허용)

모든 경쟁 함수, 복원 수열, 최적화 결과는 PiecewiseLinearFn 하나로 표현한다.
각 구간점 x_i 에서 왼쪽 극한값 left[i] 과 오른쪽 극한값 right[i] 를 저장하고,
열린 구간 (x_i, x_{i+1}) 위에서는 right[i] 와 left[i+1] 을 잇는 직선이다.

함수는 불변 객체이며 모든 변환은 새 객체를 돌려준다.
"""

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd

from common.errors import ArtifactIOError, InvalidParameterError, InvalidSpecError


# ============================================================================
# Constants
# ============================================================================

JUMP_SNAP = 1e-12           # 이보다 작은 점프는 연속으로 간주
BREAKPOINT_TOL = 1e-12      # 구간 끝점 비교의 상대 허용오차
QUADRATIC_SERIES_RTOL = 1e-4
TEXT_HEADER = "# gridfn"


def _tol(*values):
    return BREAKPOINT_TOL * max(1.0, *(abs(v) for v in values))


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class Interval:
    a: float
    b: float
    truncation_of_line: bool = False    # ℝ 을 대신하는 창이면 True

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
            raise InvalidParameterError(f"구간은 유한하고 a < b 여야 합니다: ({a}, {b})", a=a, b=b)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self):
        return self.b - self.a

    def contains(self, other):
        tol = _tol(self.a, self.b)
        return other.a >= self.a - tol and other.b <= self.b + tol

    def to_record(self):
        return {"a": self.a, "b": self.b, "truncation_of_line": self.truncation_of_line}


def as_interval(value):
    if isinstance(value, Interval):
        return value
    a, b = value
    return Interval(a, b)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearFn:
    x: np.ndarray
    left: np.ndarray
    right: np.ndarray
    truncation_of_line: bool = False

    def __post_init__(self):
        x = np.array(self.x, dtype=float)
        left = np.array(self.left, dtype=float)
        right = np.array(self.right, dtype=float)
        if x.ndim != 1 or len(x) < 2 or left.shape != x.shape or right.shape != x.shape:
            raise InvalidSpecError(
                "구간점은 2개 이상이고 left/right 값과 길이가 같아야 합니다.",
                breakpoints=len(x),
            )
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(left)) and np.all(np.isfinite(right))):
            raise InvalidSpecError("구간점과 값은 모두 유한해야 합니다.")
        if np.any(np.diff(x) <= 0.0):
            raise InvalidSpecError("구간점은 순증가해야 합니다.", x=x)
        left[0] = right[0]
        right[-1] = left[-1]
        tiny = np.abs(right - left) <= JUMP_SNAP * np.maximum(1.0, np.abs(left))
        right = np.where(tiny, left, right)
        for arr in (x, left, right):
            arr.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "left", left)
        object.__setattr__(self, "right", right)

    @property
    def interval(self):
        return Interval(self.x[0], self.x[-1], self.truncation_of_line)

    @property
    def n_segments(self):
        return len(self.x) - 1

    @property
    def lengths(self):
        return np.diff(self.x)

    @property
    def slopes(self):
        return (self.left[1:] - self.right[:-1]) / np.diff(self.x)

    @property
    def jumps(self):
        """내부 구간점의 점프 right − left (부호 포함)."""
        return self.right[1:-1] - self.left[1:-1]

    @property
    def is_continuous(self):
        return not np.any(self.jumps != 0.0)

    def __call__(self, xs, side="right"):
        return evaluate(self, xs, side)

    def same_as(self, other, tol=0.0):
        if len(self.x) != len(other.x):
            return False
        return all(
            np.allclose(mine, theirs, rtol=0.0, atol=tol)
            for mine, theirs in ((self.x, other.x), (self.left, other.left), (self.right, other.right))
        )

    def to_record(self):
        return {
            "interval": [float(self.x[0]), float(self.x[-1])],
            "breakpoints": len(self.x),
            "continuous": self.is_continuous,
            "max_jump": float(np.max(np.abs(self.jumps))) if len(self.x) > 2 else 0.0,
        }


@dataclass(frozen=True)
class FlattenSpec:
    x1: float
    x2: float
    target: PiecewiseLinearFn       # 경계에서 맞출 함수 (보통 아핀 목표)
    plateau_left: float
    bridge_left: float
    plateau_right: float
    bridge_right: float

    def __post_init__(self):
        widths = (self.plateau_left, self.bridge_left, self.plateau_right, self.bridge_right)
        if any(w < 0.0 for w in widths):
            raise InvalidSpecError(f"plateau/bridge 폭은 음수일 수 없습니다: {widths}", widths=widths)
        if not self.x1 < self.x2:
            raise InvalidSpecError(f"기준점 순서가 잘못되었습니다: x1={self.x1}, x2={self.x2}")

    @classmethod
    def thirds(cls, interval, x1, x2, target):
        """(a, x1) 과 (x2, b) 를 삼등분: 목표 / 다리 / 평탄."""
        interval = as_interval(interval)
        left = (x1 - interval.a) / 3.0
        right = (interval.b - x2) / 3.0
        return cls(x1, x2, target, left, left, right, right)

    def to_record(self):
        return {
            "x1": self.x1,
            "x2": self.x2,
            "plateau_left": self.plateau_left,
            "bridge_left": self.bridge_left,
            "plateau_right": self.plateau_right,
            "bridge_right": self.bridge_right,
        }


# ============================================================================
# Construction
# ============================================================================

def from_values(x, values, truncation_of_line=False):
    """연속 함수: 각 구간점에서 값 하나."""
    return PiecewiseLinearFn(x, values, values, truncation_of_line)


def _segment(x0, x1, v0, v1):
    return PiecewiseLinearFn([x0, x1], [v0, v1], [v0, v1])


def make_affine(interval, slope, intercept):
    iv = as_interval(interval)
    values = [slope * iv.a + intercept, slope * iv.b + intercept]
    return from_values([iv.a, iv.b], values, iv.truncation_of_line)


def make_heaviside(interval, c):
    """H_c: c 에서 0 → 1 로 뛰는 계단."""
    iv = as_interval(interval)
    if not iv.a < c < iv.b:
        raise InvalidParameterError(f"점프 위치 c={c} 가 구간 ({iv.a}, {iv.b}) 안에 있어야 합니다.", c=c)
    return PiecewiseLinearFn([iv.a, c, iv.b], [0.0, 0.0, 1.0], [0.0, 1.0, 1.0], iv.truncation_of_line)


def make_staircase(interval, step, offset=0.0):
    """
    기울기 1 직선을 따라가는 계단: 폭 step 마다 높이 step 만큼 뛴다.

    점프는 a + offset + k·step (k ≥ 1) 에 놓이고, 각 칸의 값은 칸 왼쪽 끝의 x 값이다.
    """
    iv = as_interval(interval)
    if not step > 0.0:
        raise InvalidParameterError(f"계단 폭은 양수여야 합니다: {step}", step=step)
    start = iv.a + offset
    count = int(math.floor((iv.b - start) / step - 1e-9))
    cuts = [start + k * step for k in range(1, count + 1) if iv.a < start + k * step < iv.b]
    x = [iv.a, *cuts, iv.b]
    levels = [iv.a] + cuts
    left = [levels[0]] + levels[:-1] + [levels[-1]]
    right = levels + [levels[-1]]
    return PiecewiseLinearFn(x, left, right, iv.truncation_of_line)


def make_tent(interval, peak=None, height=1.0):
    """양 끝에서 0, peak 에서 height 인 연속 삼각형."""
    iv = as_interval(interval)
    peak = 0.5 * (iv.a + iv.b) if peak is None else peak
    if not iv.a < peak < iv.b:
        raise InvalidParameterError(f"꼭짓점 {peak} 가 구간 안에 있어야 합니다.", peak=peak)
    return from_values([iv.a, peak, iv.b], [0.0, height, 0.0], iv.truncation_of_line)


# ============================================================================
# Evaluation
# ============================================================================

def segment_index(u, xs, side="right"):
    xc = np.clip(np.asarray(xs, dtype=float), u.x[0], u.x[-1])
    idx = np.searchsorted(u.x, xc, side=side) - 1
    return np.clip(idx, 0, u.n_segments - 1)


def evaluate(u, xs, side="right"):
    """u(x). 구간점에서는 side 쪽 극한. 정의역 밖은 끝값으로 상수 연장."""
    arr = np.asarray(xs, dtype=float)
    xc = np.clip(arr, u.x[0], u.x[-1])
    idx = segment_index(u, xc, side)
    x0, x1 = u.x[idx], u.x[idx + 1]
    v0, v1 = u.right[idx], u.left[idx + 1]
    w = (xc - x0) / (x1 - x0)
    values = v0 * (1.0 - w) + v1 * w
    values = np.where(xc == x0, v0, np.where(xc == x1, v1, values))
    if arr.ndim == 0:
        return float(values)
    return values


def restrict(u, interval):
    iv = as_interval(interval)
    tol = _tol(u.x[0], u.x[-1])
    if iv.a < u.x[0] - tol or iv.b > u.x[-1] + tol:
        raise InvalidSpecError(
            f"구간 ({iv.a}, {iv.b}) 이 함수 정의역 ({u.x[0]}, {u.x[-1]}) 을 벗어납니다.",
            interval=iv,
        )
    a, b = max(iv.a, u.x[0]), min(iv.b, u.x[-1])
    inner = (u.x > a + tol) & (u.x < b - tol)
    start = evaluate(u, a, "right")
    end = evaluate(u, b, "left")
    x = np.concatenate(([a], u.x[inner], [b]))
    left = np.concatenate(([start], u.left[inner], [end]))
    right = np.concatenate(([start], u.right[inner], [end]))
    flag = iv.truncation_of_line if isinstance(interval, Interval) else u.truncation_of_line
    return PiecewiseLinearFn(x, left, right, flag)


def glue(pieces):
    """
    (Interval, 함수) 쌍을 구간 순서대로 이어 붙인다.

    인접 구간의 끝점 값이 달라도 되며, 그 차이가 이음점의 점프가 된다.
    """
    items = []
    for piece in pieces:
        if isinstance(piece, PiecewiseLinearFn):
            items.append(piece)
        else:
            interval, fn = piece
            items.append(restrict(fn, interval))
    if not items:
        raise InvalidSpecError("이어 붙일 조각이 없습니다.")

    xs, lefts, rights = list(items[0].x), list(items[0].left), list(items[0].right)
    for nxt in items[1:]:
        gap = nxt.x[0] - xs[-1]
        if abs(gap) > _tol(xs[-1], nxt.x[0]):
            kind = "겹침" if gap < 0 else "빈틈"
            raise InvalidSpecError(
                f"조각 구간 사이에 {kind}이 있습니다: {xs[-1]} → {nxt.x[0]}",
                previous_end=xs[-1],
                next_start=float(nxt.x[0]),
            )
        rights[-1] = nxt.right[0]
        xs.extend(nxt.x[1:])
        lefts.extend(nxt.left[1:])
        rights.extend(nxt.right[1:])
    return PiecewiseLinearFn(xs, lefts, rights, items[0].truncation_of_line)


def scale_values(u, c):
    return PiecewiseLinearFn(u.x, c * u.left, c * u.right, u.truncation_of_line)


def shift_values(u, c):
    return PiecewiseLinearFn(u.x, u.left + c, u.right + c, u.truncation_of_line)


def reflect(u):
    """x → a + b − x."""
    a, b = u.x[0], u.x[-1]
    x = (a + b) - u.x[::-1]
    x[0], x[-1] = a, b
    return PiecewiseLinearFn(x, u.right[::-1], u.left[::-1], u.truncation_of_line)


def extend_constant(u, interval):
    """정의역 밖을 끝값 상수로 이어 더 넓은 창으로 만든다."""
    iv = as_interval(interval)
    if not iv.contains(u.interval):
        raise InvalidSpecError(f"창 ({iv.a}, {iv.b}) 이 함수 정의역을 포함하지 않습니다.", interval=iv)
    pieces = []
    tol = _tol(iv.a, iv.b)
    if u.x[0] - iv.a > tol:
        pieces.append(_segment(iv.a, u.x[0], u.right[0], u.right[0]))
    pieces.append(u)
    if iv.b - u.x[-1] > tol:
        pieces.append(_segment(u.x[-1], iv.b, u.left[-1], u.left[-1]))
    glued = glue(pieces)
    return PiecewiseLinearFn(glued.x, glued.left, glued.right, iv.truncation_of_line)


# ============================================================================
# Norms
# ============================================================================

def _power_integral(w0, w1, length, p):
    """선형 함수 w 가 w0 → w1 로 변하는 길이 length 구간 위의 ∫|w|^p (정확값)."""
    w0 = np.asarray(w0, dtype=float)
    w1 = np.asarray(w1, dtype=float)
    a0, a1 = np.abs(w0), np.abs(w1)
    same = w0 * w1 >= 0.0
    if p == 1.0:
        total = a0 + a1
        safe = np.where(total > 0.0, total, 1.0)
        cross = (a0 * a0 + a1 * a1) / (2.0 * safe)
        return length * np.where(same, 0.5 * (a0 + a1), cross)
    if p == 2.0:
        return length * (w0 * w0 + w0 * w1 + w1 * w1) / 3.0

    hi, lo = np.maximum(a0, a1), np.minimum(a0, a1)
    diff = hi - lo
    mean = 0.5 * (hi + lo)
    near = diff <= QUADRATIC_SERIES_RTOL * np.maximum(hi, 1e-300)
    safe = np.where(near, 1.0, diff)
    spread = (hi ** (p + 1.0) - lo ** (p + 1.0)) / ((p + 1.0) * safe)
    ratio = np.where(mean > 0.0, diff / np.where(mean > 0.0, mean, 1.0), 0.0)
    series = mean ** p * (1.0 + p * (p - 1.0) * ratio * ratio / 24.0)
    same_sign = np.where(near, series, spread)

    total = a0 + a1
    frac = np.where(total > 0.0, a0 / np.where(total > 0.0, total, 1.0), 0.5)
    opposite = (frac * a0 ** p + (1.0 - frac) * a1 ** p) / (p + 1.0)
    return length * np.where(same, same_sign, opposite)


def _merged_grid(*fns, lo, hi):
    points = [np.array([lo, hi])]
    for fn in fns:
        points.append(fn.x[(fn.x > lo) & (fn.x < hi)])
    return np.unique(np.concatenate(points))


def _linear_ends(fn, grid):
    """각 소구간 위에서 fn 의 양 끝 값 (중점 값과 기울기로 복원)."""
    mids = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * np.diff(grid)
    values = evaluate(fn, mids)
    slopes = fn.slopes[segment_index(fn, mids)]
    return values - slopes * half, values + slopes * half


def lp_distance(u, v, p, interval=None):
    """(∫_I |u − v|^p)^{1/p}. 합쳐진 구간점 격자 위에서 구간별 정확 적분."""
    if p < 1.0:
        raise InvalidParameterError(f"p 는 1 이상이어야 합니다: {p}", p=p)
    iv = as_interval(interval) if interval is not None else u.interval
    for fn in (u, v):
        if not fn.interval.contains(iv):
            raise InvalidSpecError(f"구간 ({iv.a}, {iv.b}) 이 함수 정의역 밖입니다.", interval=iv)
    grid = _merged_grid(u, v, lo=iv.a, hi=iv.b)
    u0, u1 = _linear_ends(u, grid)
    v0, v1 = _linear_ends(v, grid)
    total = math.fsum(_power_integral(u0 - v0, u1 - v1, np.diff(grid), p))
    return total ** (1.0 / p)


def difference_quotient_norm(u, h, p, window):
    """∫ |τ_h u|^p,  τ_h u(x) = (u(x+h) − u(x))/h,  x 와 x+h 모두 창 안."""
    iv = as_interval(window)
    if not 0.0 < h < iv.length:
        raise InvalidParameterError(f"h 는 (0, {iv.length}) 안이어야 합니다: {h}", h=h)
    if not u.interval.contains(iv):
        raise InvalidSpecError(f"창 ({iv.a}, {iv.b}) 이 함수 정의역 밖입니다.", window=iv)
    lo, hi = iv.a, iv.b - h
    inner = np.concatenate((u.x[(u.x > lo) & (u.x < hi)], (u.x - h)[(u.x - h > lo) & (u.x - h < hi)]))
    grid = np.unique(np.concatenate(([lo, hi], inner)))
    grid = grid[np.concatenate(([True], np.diff(grid) > _tol(lo, hi)))]
    grid[-1] = hi

    mids = 0.5 * (grid[:-1] + grid[1:])
    half = 0.5 * np.diff(grid)
    value = (evaluate(u, mids + h) - evaluate(u, mids)) / h
    slope = (u.slopes[segment_index(u, mids + h)] - u.slopes[segment_index(u, mids)]) / h
    return math.fsum(_power_integral(value - slope * half, value + slope * half, 2.0 * half, p))


def total_variation(u):
    return math.fsum(np.abs(u.slopes) * u.lengths) + math.fsum(np.abs(u.jumps))


def sobolev_seminorm_p(u, p):
    """p = 1 이면 BV 세미노름, p > 1 이면 ∫|u′|^p (점프가 있으면 +∞)."""
    if p == 1.0:
        return total_variation(u)
    if not u.is_continuous:
        return math.inf
    return math.fsum(np.abs(u.slopes) ** p * u.lengths)


# ============================================================================
# Constructive transformations
# ============================================================================

def _require_unit(u, name):
    tol = _tol(1.0)
    if abs(u.x[0]) > tol or abs(u.x[-1] - 1.0) > tol:
        raise InvalidSpecError(f"{name} 는 (0, 1) 위의 함수여야 합니다: ({u.x[0]}, {u.x[-1]})")


def tile_rescale(h, n):
    """
    각 칸 (j/n, (j+1)/n) 위에 g(x) = (h(nx − j) + j)/n 을 놓는다.

    결과의 내부 구간점 수 = n·(h 의 내부 구간점 수) + n − 1.
    """
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameterError(f"타일 수 n 은 1 이상의 정수여야 합니다: {n}", n=n)
    n = int(n)
    _require_unit(h, "h")
    xs, lefts, rights = [], [], []
    for j in range(n):
        x = (h.x + j) / n
        left = (h.left + j) / n
        right = (h.right + j) / n
        x[0], x[-1] = j / n, (j + 1) / n
        if j == 0:
            xs.extend(x)
            lefts.extend(left)
            rights.extend(right)
        else:
            rights[-1] = right[0]
            xs.extend(x[1:])
            lefts.extend(left[1:])
            rights.extend(right[1:])
    return PiecewiseLinearFn(xs, lefts, rights, h.truncation_of_line)


def spatial_block_rescale(u, n):
    """(0, n) 위의 u 를 g(x) = u(nx)/n 로 (0, 1) 에 옮긴다."""
    if isinstance(n, bool) or int(n) != n or n < 1:
        raise InvalidParameterError(f"n 은 1 이상의 정수여야 합니다: {n}", n=n)
    tol = _tol(n)
    if abs(u.x[0]) > tol or abs(u.x[-1] - n) > tol:
        raise InvalidSpecError(f"u 는 (0, {n}) 위의 함수여야 합니다.", n=n)
    x = u.x / n
    x[0], x[-1] = 0.0, 1.0
    return PiecewiseLinearFn(x, u.left / n, u.right / n, u.truncation_of_line)


def _agrees(u, target, lo, hi):
    if hi - lo <= _tol(lo, hi):
        return True
    grid = _merged_grid(u, target, lo=lo, hi=hi)
    for side in ("left", "right"):
        pts = grid[1:] if side == "left" else grid[:-1]
        mine = evaluate(u, pts, side)
        theirs = evaluate(target, pts, side)
        if np.any(np.abs(mine - theirs) > 1e-12 * np.maximum(1.0, np.abs(theirs))):
            return False
    return True


def _flatten_side(u, target, edge, anchor, plateau, bridge, outward):
    """한쪽 경계 조각: 목표 함수 → 다리 → 평탄 구간 (anchor 에서 u 의 값)."""
    value = evaluate(u, anchor, "right" if outward < 0 else "left")
    far = anchor + outward * (plateau + bridge)
    mid = anchor + outward * plateau
    tol = _tol(edge, anchor)
    pieces = []
    if outward < 0:
        if far - edge > tol:
            pieces.append(restrict(target, (edge, far)))
            start = evaluate(target, far, "left")
        else:
            far = edge
            start = evaluate(target, edge, "right")
        if mid - far > tol:
            pieces.append(_segment(far, mid, start, value))
        if anchor - mid > tol:
            pieces.append(_segment(mid, anchor, value, value))
    else:
        if mid - anchor > tol:
            pieces.append(_segment(anchor, mid, value, value))
        if edge - far > tol:
            end = evaluate(target, far, "right")
            if far - mid > tol:
                pieces.append(_segment(mid, far, value, end))
            pieces.append(restrict(target, (far, edge)))
        else:
            end = evaluate(target, edge, "left")
            if edge - mid > tol:
                pieces.append(_segment(mid, edge, value, end))
    return pieces


def flatten_near_points(u, spec):
    """
    기준점 x1 < x2 바깥을 경계 목표 함수로 바꾸고, 기준점 옆에 평탄 구간과 다리를 넣는다.

    [x1, x2] 위에서는 u 를 그대로 둔다. 한쪽이 이미 목표 함수와 같으면 그쪽은 손대지 않는다.
    """
    a, b = u.x[0], u.x[-1]
    if not a < spec.x1 < spec.x2 < b:
        raise InvalidSpecError(
            f"기준점은 정의역 내부에 있어야 합니다: a={a}, x1={spec.x1}, x2={spec.x2}, b={b}",
            spec=spec,
        )
    tol = _tol(a, b)
    if spec.x1 - spec.plateau_left - spec.bridge_left < a - tol:
        raise InvalidSpecError("왼쪽 평탄/다리 구간이 정의역 밖으로 나갑니다.", spec=spec)
    if spec.x2 + spec.plateau_right + spec.bridge_right > b + tol:
        raise InvalidSpecError("오른쪽 평탄/다리 구간이 정의역 밖으로 나갑니다.", spec=spec)
    if not spec.target.interval.contains(u.interval):
        raise InvalidSpecError("경계 목표 함수가 u 의 정의역을 덮지 않습니다.", spec=spec)

    pieces = []
    if _agrees(u, spec.target, a, spec.x1):
        pieces.append(restrict(u, (a, spec.x1)))
    else:
        pieces.extend(_flatten_side(u, spec.target, a, spec.x1, spec.plateau_left, spec.bridge_left, -1))
    pieces.append(restrict(u, (spec.x1, spec.x2)))
    if _agrees(u, spec.target, spec.x2, b):
        pieces.append(restrict(u, (spec.x2, b)))
    else:
        pieces.extend(_flatten_side(u, spec.target, b, spec.x2, spec.plateau_right, spec.bridge_right, 1))
    glued = glue(pieces)
    return PiecewiseLinearFn(glued.x, glued.left, glued.right, u.truncation_of_line)


# ============================================================================
# Text / CSV
# ============================================================================

def format_text(u, comments=()):
    lines = [f"# {line}" for line in comments]
    lines.append(
        f"{TEXT_HEADER} a={float(u.x[0])!r} b={float(u.x[-1])!r} "
        f"truncation_of_line={int(u.truncation_of_line)} breakpoints={len(u.x)}"
    )
    for x, left, right in zip(u.x, u.left, u.right):
        lines.append(f"{float(x)!r} {float(left)!r} {float(right)!r}")
    return "\n".join(lines) + "\n"


def dump_text(u, path, comments=()):
    path = Path(path)
    try:
        path.write_text(format_text(u, comments), encoding="utf-8")
    except OSError as err:
        raise ArtifactIOError(f"함수 파일을 쓸 수 없습니다 ({path}): {err}", path=str(path)) from err
    return path


def parse_text(text, source="<text>"):
    header = None
    rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith(TEXT_HEADER):
            header = dict(item.split("=", 1) for item in line[len(TEXT_HEADER):].split())
            continue
        if line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidSpecError(f"{source}:{lineno}: 'x left right' 세 값이 필요합니다: '{line}'")
        try:
            rows.append([float(v) for v in parts])
        except ValueError:
            raise InvalidSpecError(f"{source}:{lineno}: 숫자가 아닌 값이 있습니다: '{line}'") from None
    if header is None:
        raise InvalidSpecError(f"{source}: '{TEXT_HEADER}' 헤더 줄이 없습니다.")
    data = np.array(rows, dtype=float).reshape(-1, 3)
    expected = int(header.get("breakpoints", len(data)))
    if expected != len(data):
        raise InvalidSpecError(f"{source}: 헤더의 구간점 수 {expected} 와 실제 {len(data)} 가 다릅니다.")
    flag = header.get("truncation_of_line", "0") in ("1", "true", "True")
    return PiecewiseLinearFn(data[:, 0], data[:, 1], data[:, 2], flag)


def load_text(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ArtifactIOError(f"함수 파일을 읽을 수 없습니다 ({path}): {err}", path=str(path)) from err
    return parse_text(text, source=str(path))


def sample_frame(u, points=201):
    """그래프용 표본. 균일 격자에 구간점의 양쪽 극한을 더한 DataFrame (x, value)."""
    grid = np.linspace(u.x[0], u.x[-1], points)
    xs = np.concatenate((grid, u.x[1:-1], u.x[1:-1]))
    values = np.concatenate((evaluate(u, grid), u.left[1:-1], u.right[1:-1]))
    frame = pd.DataFrame({"x": xs, "value": values})
    return frame.sort_values("x", kind="stable").reset_index(drop=True)
