#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
커널 프로파일 φ 정의와 허용 조건 검사

φ: [0, ∞) → [0, ∞) 는 유계이고 유한 개의 점프를 제외하면 연속이다.
점프점에서는 왼쪽 극한값을 쓴다. 1_{(1,∞)} 과 1_{[0,1]} 형태의 기본
프로파일이 정의 그대로 재현된다.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import integrate

from common.errors import (
    ArtifactIOError,
    DegenerateProfileError,
    InvalidParameterError,
    QuadratureFailureError,
)


# ============================================================================
# Constants
# ============================================================================

NORMALIZATION_TARGET = 0.5
NORMALIZATION_TOL = 1e-9
TAIL_DOUBLINGS = 10         # T = max(last breakpoint, 1) * 2**10
ALPHA_GRID_POINTS = 4096
BETA_GRID_POINTS = 8192
JUMP_SNAP_RTOL = 1e-9       # |Δu|/δ 가 φ 의 점프점과 이만큼 가까우면 점프점으로 붙인다

SAMPLE_PROFILE_FILE = Path(__file__).parent / "sample_profile.txt"


class ProfileKind(str, Enum):
    INDICATOR_STEP = "IndicatorStep"
    SATURATING_POWER = "SaturatingPower"
    COMPACT_BUMP = "CompactBump"
    TABULATED = "Tabulated"


KIND_ALIASES = {
    "indicator": ProfileKind.INDICATOR_STEP,
    "indicatorstep": ProfileKind.INDICATOR_STEP,
    "step": ProfileKind.INDICATOR_STEP,
    "saturating": ProfileKind.SATURATING_POWER,
    "saturatingpower": ProfileKind.SATURATING_POWER,
    "power": ProfileKind.SATURATING_POWER,
    "compact": ProfileKind.COMPACT_BUMP,
    "compactbump": ProfileKind.COMPACT_BUMP,
    "bump": ProfileKind.COMPACT_BUMP,
    "tabulated": ProfileKind.TABULATED,
    "table": ProfileKind.TABULATED,
}


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class PhiProfile:
    kind: ProfileKind
    p: float
    scale: float
    jump_points: tuple = ()
    alpha: float = 0.0              # φ(t) ≤ alpha·t^{p+1} on [0,1] 의 상한
    beta: float = 0.0               # φ ≤ beta 의 상한
    normalized: bool = False
    table_t: tuple = ()             # Tabulated: 점프점은 같은 t 가 두 번 (왼쪽값, 오른쪽값)
    table_v: tuple = ()
    source: str = ""

    def __post_init__(self):
        if not (self.p >= 1.0 and math.isfinite(self.p)):
            raise InvalidParameterError(f"p 는 1 이상이어야 합니다: {self.p}", p=self.p)
        if not (self.scale > 0.0 and math.isfinite(self.scale)):
            raise InvalidParameterError(f"scale 은 양수여야 합니다: {self.scale}", scale=self.scale)
        jumps = tuple(float(j) for j in self.jump_points)
        if any(j <= 0.0 for j in jumps) or any(b <= a for a, b in zip(jumps, jumps[1:])):
            raise InvalidParameterError(f"점프점은 양수이고 순증가해야 합니다: {jumps}", jump_points=jumps)
        object.__setattr__(self, "jump_points", jumps)

    def to_record(self):
        return {
            "kind": self.kind.value,
            "p": self.p,
            "scale": self.scale,
            "jump_points": list(self.jump_points),
            "alpha": self.alpha,
            "beta": self.beta,
            "normalized": self.normalized,
            "source": self.source,
        }


@dataclass(frozen=True)
class NormalizationDetails:
    value: float
    error: float
    tail: float             # ∫_T^∞, 꼬리에서 φ 가 상수이므로 정확한 값
    tail_bound: float       # beta/(p·T^p)
    cutoff: float


@dataclass
class AdmissibilityReport:
    alpha_measured: float
    alpha_cap: float
    beta_measured: float
    beta_cap: float
    normalization: float
    limit_factor: float     # 2·I(φ): Λ_δ(u) 의 극한이 ∫|u'|^p 의 몇 배인지
    checks: dict = field(default_factory=dict)

    @property
    def passed(self):
        return all(self.checks.values())

    def to_record(self):
        return {
            "alpha_measured": self.alpha_measured,
            "alpha_cap": self.alpha_cap,
            "beta_measured": self.beta_measured,
            "beta_cap": self.beta_cap,
            "normalization": self.normalization,
            "limit_factor": self.limit_factor,
            "checks": dict(self.checks),
            "passed": self.passed,
        }


# ============================================================================
# Construction
# ============================================================================

def parse_kind(name):
    if isinstance(name, ProfileKind):
        return name
    key = str(name).strip().replace("-", "").replace("_", "").lower()
    if key not in KIND_ALIASES:
        raise InvalidParameterError(f"알 수 없는 프로파일 종류: '{name}'", kind=name)
    return KIND_ALIASES[key]


def _builtin_integral(kind, p, scale):
    """기본 프로파일의 ∫_0^∞ φ(t) t^{-(p+1)} dt (닫힌 형태)."""
    if kind is ProfileKind.INDICATOR_STEP:
        return scale / p
    if kind is ProfileKind.SATURATING_POWER:
        return scale * (1.0 + 1.0 / p)
    return scale


def make_profile(kind, p, scale=None, alpha=None, beta=None):
    """
    기본 프로파일 생성

    scale=None 이면 정규화된 배율 (p/2, 1/(2(1+1/p)), 1/2) 을 쓴다.
    alpha/beta 를 생략하면 해석적으로 최소인 상한을 넣는다.
    """
    kind = parse_kind(kind)
    if kind is ProfileKind.TABULATED:
        raise InvalidParameterError("Tabulated 프로파일은 load_tabulated() 또는 tabulated_profile() 로 만드세요.")
    p = float(p)
    if p < 1.0:
        raise InvalidParameterError(f"p 는 1 이상이어야 합니다: {p}", p=p)
    if scale is None:
        scale = NORMALIZATION_TARGET / _builtin_integral(kind, p, 1.0)
    scale = float(scale)
    jumps = () if kind is ProfileKind.SATURATING_POWER else (1.0,)
    default_alpha = 0.0 if kind is ProfileKind.INDICATOR_STEP else scale
    integral = _builtin_integral(kind, p, scale)
    return PhiProfile(
        kind=kind,
        p=p,
        scale=scale,
        jump_points=jumps,
        alpha=default_alpha if alpha is None else float(alpha),
        beta=scale if beta is None else float(beta),
        normalized=abs(integral - NORMALIZATION_TARGET) <= NORMALIZATION_TOL,
    )


def tabulated_profile(ts, vs, p, jumps=(), scale=1.0, alpha=None, beta=None, source=""):
    """(t, φ(t)) 표본으로 Tabulated 프로파일을 만든다. 점프점은 t 를 두 번 적는다."""
    ts = [float(t) for t in ts]
    vs = [float(v) for v in vs]
    jumps = tuple(sorted(float(j) for j in jumps))
    if len(ts) != len(vs) or len(ts) < 2:
        raise InvalidParameterError("표본은 2개 이상이고 t, φ 의 개수가 같아야 합니다.")
    if ts[0] != 0.0 or vs[0] != 0.0:
        raise InvalidParameterError(f"첫 표본은 (0, 0) 이어야 합니다: ({ts[0]}, {vs[0]})")
    if any(v < 0.0 for v in vs):
        raise InvalidParameterError("φ 표본값은 음수일 수 없습니다.")
    duplicated = []
    for i in range(1, len(ts)):
        if ts[i] < ts[i - 1]:
            raise InvalidParameterError(f"표본 t 가 증가하지 않습니다: {ts[i - 1]} → {ts[i]}")
        if ts[i] == ts[i - 1]:
            if i >= 2 and ts[i - 2] == ts[i]:
                raise InvalidParameterError(f"같은 t 가 세 번 이상 나옵니다: {ts[i]}")
            duplicated.append(ts[i])
    if tuple(duplicated) != jumps:
        raise InvalidParameterError(
            f"점프 지시자와 중복 표본이 일치하지 않습니다: jump={list(jumps)}, 중복={duplicated}"
        )
    if jumps and jumps[-1] == ts[-1]:
        raise InvalidParameterError("마지막 표본에는 점프를 둘 수 없습니다.")

    draft = PhiProfile(
        kind=ProfileKind.TABULATED,
        p=float(p),
        scale=float(scale),
        jump_points=jumps,
        alpha=0.0,
        beta=0.0,
        table_t=tuple(ts),
        table_v=tuple(vs),
        source=str(source),
    )
    measured_alpha = _measure_alpha(draft)
    measured_beta = _measure_beta(draft)
    return replace(
        draft,
        alpha=measured_alpha if alpha is None else float(alpha),
        beta=measured_beta if beta is None else float(beta),
    )


def load_tabulated(path, p, scale=1.0, alpha=None, beta=None):
    """
    두 열 텍스트 파일에서 Tabulated 프로파일 로드

    형식: 한 줄에 `t φ(t)`, `# jump <t>` 지시자, 그 밖의 `#` 줄은 주석.
    """
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise ArtifactIOError(f"프로파일 파일을 읽을 수 없습니다 ({path})", path=str(path)) from err

    ts, vs, jumps = [], [], []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            words = line[1:].split()
            if len(words) == 2 and words[0].lower() == "jump":
                try:
                    jumps.append(float(words[1]))
                except ValueError:
                    raise InvalidParameterError(f"{path}:{lineno} 점프 위치를 읽을 수 없습니다: '{raw}'") from None
            continue
        parts = line.split()
        if len(parts) != 2:
            raise InvalidParameterError(f"{path}:{lineno} 두 열 (t φ) 형식이 아닙니다: '{raw}'")
        try:
            ts.append(float(parts[0]))
            vs.append(float(parts[1]))
        except ValueError:
            raise InvalidParameterError(f"{path}:{lineno} 숫자를 읽을 수 없습니다: '{raw}'") from None
    return tabulated_profile(ts, vs, p, jumps=jumps, scale=scale, alpha=alpha, beta=beta, source=str(path))


# ============================================================================
# Evaluation
# ============================================================================

def _table_eval(profile, t, side):
    ts = np.asarray(profile.table_t)
    vs = np.asarray(profile.table_v)
    idx = np.searchsorted(ts, t, side=side)
    hi = np.clip(idx, 1, len(ts) - 1)
    lo = hi - 1
    width = ts[hi] - ts[lo]
    safe = np.where(width > 0.0, width, 1.0)
    w = np.where(width > 0.0, (t - ts[lo]) / safe, 1.0)
    inside = vs[lo] + w * (vs[hi] - vs[lo])
    # side='right' 로 들어온 정확한 점프점은 오른쪽 구간의 시작값
    return np.where(t >= ts[-1], vs[-1], np.where(t <= 0.0, 0.0, inside))


def _shape(profile, t, side="left"):
    """scale 을 곱하기 전 기본 모양. side 는 점프점에서 취할 극한."""
    p = profile.p
    kind = profile.kind
    if kind is ProfileKind.INDICATOR_STEP:
        return np.where(t >= 1.0, 1.0, 0.0) if side == "right" else np.where(t > 1.0, 1.0, 0.0)
    if kind is ProfileKind.SATURATING_POWER:
        return np.minimum(t ** (p + 1.0), 1.0)
    if kind is ProfileKind.COMPACT_BUMP:
        inside = (t < 1.0) if side == "right" else (t <= 1.0)
        return np.where(inside, t ** (p + 1.0), 0.0)
    return _table_eval(profile, t, "right" if side == "right" else "left")


def _as_output(t_in, values):
    if np.ndim(t_in) == 0:
        return float(values)
    return values


def eval_phi(profile, t):
    """φ(t). 점프점에서는 왼쪽 극한."""
    arr = np.maximum(np.asarray(t, dtype=float), 0.0)
    return _as_output(t, profile.scale * _shape(profile, arr, "left"))


def eval_phi_side(profile, t, side):
    """점프점에서 side ('left' | 'right') 쪽 극한을 취하는 φ(t)."""
    arr = np.maximum(np.asarray(t, dtype=float), 0.0)
    return _as_output(t, profile.scale * _shape(profile, arr, side))


def eval_phi_delta(profile, t, delta):
    """φ_δ(t) = δ^p φ(t/δ)."""
    if not delta > 0.0:
        raise InvalidParameterError(f"δ 는 양수여야 합니다: {delta}", delta=delta)
    arr = np.asarray(t, dtype=float) / delta
    return _as_output(t, delta ** profile.p * eval_phi(profile, arr))


def snap_to_jumps(profile, t):
    """φ 의 점프점에 상대오차 JUMP_SNAP_RTOL 이내로 가까운 인자를 점프점으로 붙인다."""
    arr = np.asarray(t, dtype=float)
    if not profile.jump_points:
        return arr
    out = arr.copy()
    for j in profile.jump_points:
        out = np.where(np.abs(out - j) <= JUMP_SNAP_RTOL * j, j, out)
    return out


def antiderivative(profile, t):
    """Φ(t) = ∫_0^t φ(s) ds (모든 종류에 대해 정확한 값)."""
    arr = np.maximum(np.asarray(t, dtype=float), 0.0)
    p = profile.p
    kind = profile.kind
    if kind is ProfileKind.INDICATOR_STEP:
        out = np.maximum(arr - 1.0, 0.0)
    elif kind is ProfileKind.SATURATING_POWER:
        head = np.minimum(arr, 1.0) ** (p + 2.0) / (p + 2.0)
        out = head + np.maximum(arr - 1.0, 0.0)
    elif kind is ProfileKind.COMPACT_BUMP:
        out = np.minimum(arr, 1.0) ** (p + 2.0) / (p + 2.0)
    else:
        ts = np.asarray(profile.table_t)
        vs = np.asarray(profile.table_v)
        cum = np.concatenate(([0.0], np.cumsum(0.5 * np.diff(ts) * (vs[1:] + vs[:-1]))))
        # side='right' 이므로 점프점에서는 두 번째 표본이 구간 시작이 된다
        idx = np.clip(np.searchsorted(ts, arr, side="right") - 1, 0, len(ts) - 2)
        lo = idx
        hi = idx + 1
        width = np.where(ts[hi] > ts[lo], ts[hi] - ts[lo], 1.0)
        slope = (vs[hi] - vs[lo]) / width
        dt = arr - ts[lo]
        inside = cum[lo] + dt * vs[lo] + 0.5 * slope * dt * dt
        beyond = cum[-1] + vs[-1] * (arr - ts[-1])
        out = np.where(arr >= ts[-1], beyond, inside)
    return _as_output(t, profile.scale * out)


def profile_breakpoints(profile):
    """φ 가 매끄럽지 않은 점들 (점프 + 꺾임). 구적 구간 분할에 쓴다."""
    if profile.kind is ProfileKind.TABULATED:
        return tuple(sorted({t for t in profile.table_t if t > 0.0}))
    return (1.0,)


def tail_start(profile):
    """이 값 이후로 φ 는 상수."""
    return max(profile_breakpoints(profile) + (1.0,))


def tail_value(profile):
    if profile.kind is ProfileKind.COMPACT_BUMP:
        return 0.0
    if profile.kind is ProfileKind.TABULATED:
        return profile.scale * profile.table_v[-1]
    return profile.scale


# ============================================================================
# Normalization
# ============================================================================

def normalization_details(profile, tol=NORMALIZATION_TOL):
    p = profile.p
    cutoff = tail_start(profile) * 2.0 ** TAIL_DOUBLINGS
    cuts = {0.0, cutoff}
    cuts.update(b for b in profile_breakpoints(profile) if b < cutoff)
    start = tail_start(profile)
    cuts.update(start * 2.0 ** k for k in range(1, TAIL_DOUBLINGS))
    edges = sorted(cuts)

    def integrand(t):
        if t <= 0.0:
            return 0.0
        return eval_phi(profile, t) / t ** (p + 1.0)

    pieces, errors = [], []
    for lo, hi in zip(edges, edges[1:]):
        value, err = integrate.quad(integrand, lo, hi, epsabs=tol * 1e-3, epsrel=1e-12, limit=200)
        pieces.append(value)
        errors.append(err)
    error = math.fsum(errors)
    if error > tol:
        raise QuadratureFailureError(
            f"정규화 적분이 허용오차 안에 수렴하지 않았습니다 (오차 {error:.3e} > {tol:.1e})",
            error=error,
        )
    tail = tail_value(profile) / (p * cutoff ** p)
    return NormalizationDetails(
        value=math.fsum(pieces) + tail,
        error=error,
        tail=tail,
        tail_bound=profile.beta / (p * cutoff ** p),
        cutoff=cutoff,
    )


def normalization_integral(profile):
    """I(φ) = ∫_0^∞ φ(t) t^{-(p+1)} dt."""
    return normalization_details(profile).value


def normalize(profile):
    """scale 에 (1/2)/I(φ) 를 곱해 I(φ) = 1/2 로 맞춘다. 이미 정규화된 프로파일은 그대로 반환."""
    if profile.normalized:
        return profile
    value = normalization_integral(profile)
    if value <= 0.0:
        raise DegenerateProfileError("φ ≡ 0 인 프로파일은 정규화할 수 없습니다.", profile=profile)
    factor = NORMALIZATION_TARGET / value
    return replace(
        profile,
        scale=profile.scale * factor,
        alpha=profile.alpha * factor,
        beta=profile.beta * factor,
        normalized=True,
    )


# ============================================================================
# Admissibility
# ============================================================================

def _alpha_samples(profile):
    grid = np.linspace(0.0, 1.0, ALPHA_GRID_POINTS + 1)[1:]
    values = eval_phi(profile, grid)
    extra_t, extra_v = [], []
    for j in profile.jump_points:
        if j <= 1.0:
            extra_t.append(j)
            extra_v.append(eval_phi_side(profile, j, "left"))
        if j < 1.0:
            extra_t.append(j)
            extra_v.append(eval_phi_side(profile, j, "right"))
    return np.concatenate((grid, extra_t)), np.concatenate((values, extra_v))


def _measure_alpha(profile):
    ts, vs = _alpha_samples(profile)
    return float(np.max(vs / ts ** (profile.p + 1.0)))


def _beta_samples(profile):
    grid = np.linspace(0.0, 2.0 * tail_start(profile), BETA_GRID_POINTS + 1)
    values = [eval_phi(profile, grid), [tail_value(profile)]]
    for j in profile.jump_points:
        values.append([eval_phi_side(profile, j, "left"), eval_phi_side(profile, j, "right")])
    return np.concatenate(values)


def _measure_beta(profile):
    return float(np.max(_beta_samples(profile)))


def verify_conditions(profile):
    """세 가지 허용 조건과 정규화 조건을 검사한 보고서. 실패는 보고서에 담고 예외를 던지지 않는다."""
    alpha = _measure_alpha(profile)
    samples = _beta_samples(profile)
    beta = float(np.max(samples))
    try:
        value = normalization_integral(profile)
        normalization_ok = abs(value - NORMALIZATION_TARGET) <= NORMALIZATION_TOL
    except QuadratureFailureError:
        value = float("nan")
        normalization_ok = False
    checks = {
        "vanishes_at_zero": eval_phi(profile, 0.0) == 0.0,
        "nonnegative": bool(np.min(samples) >= 0.0),
        "alpha_bound": alpha <= profile.alpha * (1.0 + 1e-9) + 1e-15,
        "beta_bound": beta <= profile.beta * (1.0 + 1e-9) + 1e-15,
        "normalization": normalization_ok,
    }
    return AdmissibilityReport(
        alpha_measured=alpha,
        alpha_cap=profile.alpha,
        beta_measured=beta,
        beta_cap=profile.beta,
        normalization=value,
        limit_factor=2.0 * value,
        checks=checks,
    )
