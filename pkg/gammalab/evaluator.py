#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
비국소 에너지 Λ_δ(u, I) 계산

    Λ_δ(u, I) = ∫_I ∫_I φ_δ(|u(x) − u(y)|) / |x − y|^{p+1} dx dy,   φ_δ(t) = δ^p φ(t/δ)

적분은 구간 쌍 (i ≤ j) 별로 y > x 영역만 계산해 2 배 한다. 구간 쌍 위에서
u(y) − u(x) 는 (x, y) 에 대해 선형이므로, r = y − x 를 고정하면 안쪽 적분이
φ 의 원시함수로 정확히 떨어진다. 바깥쪽 r 적분만 Gauss–Legendre 로 계산한다.

점프에서 발산하는 경우는 수치적 폭주가 아니라 φ 의 한쪽 극한을 보고 증명서와
함께 판정한다.
"""

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import integrate

from common.errors import (
    InconclusiveQuadratureError,
    InvalidParameterError,
    QuadratureFailureError,
)
from common.logs import get_logger
from common.parallel import ordered_map
from gammalab import profile as phi
from gammalab.gridfn import as_interval, evaluate, restrict, sobolev_seminorm_p
from gammalab.quadrature import geometric_edges, graded_edges, integrate_pieces

logger = get_logger("evaluator")

MIDPOINT_RTOL = 1e-7        # 안쪽 Δ 범위가 이보다 좁으면 구간 중점 규칙
GRADING_DIVISOR = 8.0       # 대각선 쪽 분할은 폭 δ/(8·기울기) 까지
SLOPE_EPS = 1e-12
PROBE_SAMPLES = 9


# ============================================================================
# Types
# ============================================================================

class FarFieldPolicy(str, Enum):
    ANALYTIC_TAIL = "analytic_tail"
    HARD_CUTOFF = "hard_cutoff"


@dataclass(frozen=True)
class QuadConfig:
    gauss_order: int = 10
    max_subdivision_depth: int = 12
    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    diagonal_band_refinement: int = 48
    divergence_probe_levels: int = 12
    far_field_cutoff_policy: FarFieldPolicy = FarFieldPolicy.ANALYTIC_TAIL
    require_normalized: bool = True
    threads: int = None

    def __post_init__(self):
        if int(self.gauss_order) != self.gauss_order or self.gauss_order < 2:
            raise InvalidParameterError(f"gauss_order 는 2 이상의 정수여야 합니다: {self.gauss_order}")
        if not self.rel_tol > 0.0:
            raise InvalidParameterError(f"rel_tol 은 양수여야 합니다: {self.rel_tol}")
        if self.abs_tol < 0.0 or self.max_subdivision_depth < 0:
            raise InvalidParameterError("abs_tol 과 max_subdivision_depth 는 음수일 수 없습니다.")
        if self.divergence_probe_levels < 1 or self.diagonal_band_refinement < 0:
            raise InvalidParameterError("divergence_probe_levels ≥ 1, diagonal_band_refinement ≥ 0 이어야 합니다.")
        object.__setattr__(self, "far_field_cutoff_policy", FarFieldPolicy(self.far_field_cutoff_policy))

    def to_record(self):
        return {
            "gauss_order": self.gauss_order,
            "max_subdivision_depth": self.max_subdivision_depth,
            "rel_tol": self.rel_tol,
            "abs_tol": self.abs_tol,
            "diagonal_band_refinement": self.diagonal_band_refinement,
            "divergence_probe_levels": self.divergence_probe_levels,
            "far_field_cutoff_policy": self.far_field_cutoff_policy.value,
            "require_normalized": self.require_normalized,
        }


@dataclass(frozen=True)
class DivergenceCertificate:
    location: float
    jump: float                     # 부호 있는 점프 u(c+) − u(c−)
    side: str                       # 'above' | 'below' | 'exact' | 'far-field'
    probe_width: float              # φ 인자 공간에서의 마지막 탐침 폭 η
    phi_delta_lower_bound: float    # 탐침 띠 위 φ_δ 의 하한 m > 0

    def to_record(self):
        return {
            "location": self.location,
            "jump": self.jump,
            "side": self.side,
            "probe_width": self.probe_width,
            "phi_delta_lower_bound": self.phi_delta_lower_bound,
        }


@dataclass(frozen=True)
class EnergyValue:
    value: float
    error_estimate: float = 0.0
    certificate: DivergenceCertificate = None
    pieces: int = field(default=0, compare=False)

    @property
    def diverges(self):
        return self.certificate is not None

    @classmethod
    def divergent(cls, certificate):
        return cls(math.inf, 0.0, certificate)

    def to_record(self):
        return {
            "value": self.value,
            "error_estimate": self.error_estimate,
            "diverges": self.diverges,
            "certificate": self.certificate.to_record() if self.certificate else None,
        }


# ============================================================================
# Kernel helpers
# ============================================================================

@dataclass(frozen=True)
class _Kernel:
    """δ, p, φ 와 구적 설정을 묶어 구간 쌍 적분에 넘기는 값."""
    profile: phi.PhiProfile
    delta: float
    p: float
    config: QuadConfig
    thresholds: tuple

    @classmethod
    def build(cls, profile, delta, p, config):
        thresholds = tuple(delta * t for t in phi.profile_breakpoints(profile))
        return cls(profile, delta, p, config, thresholds)

    def phi_delta(self, t):
        scaled = phi.snap_to_jumps(self.profile, np.abs(t) / self.delta)
        return self.delta ** self.p * phi.eval_phi(self.profile, scaled)

    def primitive(self, d):
        """F(d) = sign(d)·∫_0^{|d|} φ_δ(s) ds."""
        mag = np.abs(d)
        return np.sign(d) * self.delta ** (self.p + 1.0) * phi.antiderivative(self.profile, mag / self.delta)

    def cuts(self):
        """|Δ| 이 φ 의 꺾임/점프를 지나는 Δ 값 (양·음, 0 포함)."""
        return sorted({0.0, *self.thresholds, *(-t for t in self.thresholds)})


def _check_inputs(delta, p, profile, config):
    if not (delta > 0.0 and math.isfinite(delta)):
        raise InvalidParameterError(f"δ 는 양수여야 합니다: {delta}", delta=delta)
    if abs(p - profile.p) > 1e-12:
        raise InvalidParameterError(f"p={p} 가 프로파일의 p={profile.p} 와 다릅니다.", p=p)
    if config.require_normalized and not profile.normalized:
        raise InvalidParameterError(
            "정규화되지 않은 프로파일입니다. normalize() 를 먼저 적용하거나 require_normalized=False 로 명시하세요.",
            profile=profile,
        )


def _segments(u):
    """(xa, xb, ua, s) 배열: 시작점, 끝점, 시작점 값, 기울기."""
    return np.column_stack((u.x[:-1], u.x[1:], u.right[:-1], u.slopes))


# ============================================================================
# Divergence
# ============================================================================

def _probe(profile, t0, side, levels):
    """φ 인자 공간에서 t0 의 side 쪽 띠 위 φ 하한을 점점 좁혀가며 구한다."""
    if side == "exact":
        return float(phi.eval_phi(profile, t0)), 0.0
    if side == "above":
        limit = phi.eval_phi_side(profile, t0, "right")
    else:
        limit = phi.eval_phi_side(profile, t0, "left")
    width = min(0.5 * t0, 1.0) if t0 > 0.0 else 1.0
    offsets = np.linspace(0.0, 1.0, PROBE_SAMPLES)[1:]
    lower = 0.0
    for _ in range(levels):
        if side == "above":
            samples = t0 + width * offsets
        else:
            samples = np.maximum(t0 - width * offsets, 0.0)
        lower = float(np.min(phi.eval_phi(profile, samples)))
        if limit > 0.0 and lower > 0.0:
            return min(limit, lower), width
        width *= 0.5
    # 극한은 0 이지만 가장 좁은 띠에서 양수: 고립된 영점도 발산으로 본다
    if lower > 0.0:
        return lower, 2.0 * width
    return 0.0, width


def classify_jump(location, jump, slope_left, slope_right, delta, profile, config):
    """
    한 점프의 발산 여부. 발산하면 증명서, 아니면 None.

    점프 근처에서 |Δu| 은 |J| 에 위(above) 또는 아래(below)에서 다가간다.
    다가가는 쪽의 φ 극한이 양수면 띠 적분 ∫∫|x−y|^{−(p+1)} 이 발산한다.
    """
    t0 = float(phi.snap_to_jumps(profile, abs(jump) / delta))
    sign = 1.0 if jump > 0.0 else -1.0
    coeffs = [sign * s if abs(s) > SLOPE_EPS else 0.0 for s in (slope_left, slope_right)]
    sides = []
    if any(c > 0.0 for c in coeffs):
        sides.append("above")
    if any(c < 0.0 for c in coeffs):
        sides.append("below")
    if not sides:
        sides = ["exact"]
    for side in sides:
        lower, width = _probe(profile, t0, side, config.divergence_probe_levels)
        if lower > 0.0:
            return DivergenceCertificate(
                location=float(location),
                jump=float(jump),
                side=side,
                probe_width=width * delta,
                phi_delta_lower_bound=delta ** profile.p * lower,
            )
    return None


def divergence_certificate(u, delta, profile, config=None):
    """u 의 내부 점프 중 첫 번째 발산 점프의 증명서 (없으면 None)."""
    config = config or QuadConfig()
    slopes = u.slopes
    for k, jump in enumerate(u.jumps, start=1):
        if jump == 0.0:
            continue
        cert = classify_jump(u.x[k], jump, slopes[k - 1], slopes[k], delta, profile, config)
        if cert is not None:
            return cert
    return None


# ============================================================================
# Segment-pair integration
# ============================================================================

def _inner(kernel, d_lo, d_hi, length, ds):
    """∫ φ_δ(|Δ(y)|) dy over the cross-section, Δ linear from d_lo to d_hi."""
    spread = np.abs(d_hi - d_lo)
    scale = np.maximum(np.maximum(np.abs(d_lo), np.abs(d_hi)), kernel.delta)
    narrow = spread <= MIDPOINT_RTOL * scale
    if ds != 0.0:
        exact = (kernel.primitive(d_hi) - kernel.primitive(d_lo)) / ds
    else:
        exact = np.zeros_like(d_lo)
    if not np.any(narrow):
        return exact

    # 좁은 범위: 경계값(φ 의 꺾임/점프)에서 나눈 조각별 중점 규칙
    lo, hi = np.minimum(d_lo, d_hi), np.maximum(d_lo, d_hi)
    width = np.where(spread > 0.0, spread, 1.0)
    mid = np.zeros_like(d_lo)
    start = lo
    for cut in kernel.cuts():
        inside = (cut > start) & (cut < hi)
        stop = np.where(inside, cut, start)
        frac = np.where(spread > 0.0, (stop - start) / width, 0.0)
        mid = mid + frac * kernel.phi_delta(0.5 * (start + stop))
        start = np.maximum(start, stop)
    frac = np.where(spread > 0.0, (hi - start) / width, 1.0)
    mid = mid + frac * kernel.phi_delta(0.5 * (start + hi))
    return np.where(narrow, length * mid, exact)


def _pair_edges(kernel, seg_i, seg_j, same):
    xa_i, xb_i, ua_i, s_i = seg_i
    xa_j, xb_j, ua_j, s_j = seg_j
    r_min = 0.0 if same else max(0.0, xa_j - xb_i)
    r_max = xb_j - xa_i
    C = ua_j - s_j * xa_j - ua_i + s_i * xa_i
    ds = s_j - s_i

    def ends(r):
        y_lo = max(xa_j, xa_i + r)
        y_hi = min(xb_j, xb_i + r)
        return C + ds * y_lo + s_i * r, C + ds * y_hi + s_i * r

    knots = {r_min, r_max}
    knots.update(r for r in (xa_j - xa_i, xb_j - xb_i) if r_min < r < r_max)
    knots = sorted(knots)
    crossings = set()
    for k0, k1 in zip(knots, knots[1:]):
        e0, e1 = ends(k0), ends(k1)
        for d0, d1 in zip(e0, e1):
            for target in kernel.cuts():
                if target == 0.0:
                    continue
                if (d0 - target) * (d1 - target) < 0.0:
                    crossings.add(k0 + (target - d0) * (k1 - k0) / (d1 - d0))
    edges = sorted(set(knots) | crossings)
    return edges, C, ds


def _pair_energy(kernel, segs, i, j):
    """구간 i ≤ j 쌍의 y > x 부분 적분. (값, 오차, 수렴 여부)"""
    seg_i, seg_j = segs[i], segs[j]
    xa_i, xb_i, _, s_i = seg_i
    xa_j, xb_j, _, s_j = seg_j
    edges, C, ds = _pair_edges(kernel, seg_i, seg_j, i == j)
    config = kernel.config
    steepest = max(abs(s_i), abs(s_j))
    floor = kernel.delta / (GRADING_DIVISOR * steepest) if steepest > SLOPE_EPS else math.inf

    pieces = []
    for lo, hi in zip(edges, edges[1:]):
        if hi - lo <= 1e-15 * max(1.0, hi):
            continue
        if lo <= 0.0:
            sub = graded_edges(lo, hi, floor, config.diagonal_band_refinement)
        else:
            sub = geometric_edges(lo, hi)
        pieces.extend(zip(sub, sub[1:]))

    p1 = kernel.p + 1.0

    def integrand(r):
        y_lo = np.maximum(xa_j, xa_i + r)
        y_hi = np.minimum(xb_j, xb_i + r)
        length = np.maximum(y_hi - y_lo, 0.0)
        d_lo = C + ds * y_lo + s_i * r
        d_hi = C + ds * y_hi + s_i * r
        inner = _inner(kernel, d_lo, d_hi, length, ds)
        return np.where(length > 0.0, inner, 0.0) / r ** p1

    result = integrate_pieces(
        integrand,
        pieces,
        config.gauss_order,
        config.rel_tol,
        config.abs_tol,
        config.max_subdivision_depth,
    )
    return result.value, result.error, result.converged, result.pieces


def _pair_list(n):
    return [(i, j) for i in range(n) for j in range(i, n)]


def _evaluate_pairs(kernel, segs, pairs):
    return ordered_map(lambda ij: _pair_energy(kernel, segs, *ij), pairs, kernel.config.threads)


def _finish(results, config, context):
    values = [r[0] for r in results]
    errors = [r[1] for r in results]
    value = 2.0 * math.fsum(values)
    error = 2.0 * math.fsum(errors)
    pieces = sum(r[3] for r in results)
    if error > config.rel_tol * abs(value) + config.abs_tol * max(len(results), 1):
        raise InconclusiveQuadratureError(
            f"구적 예산 안에서 허용오차를 만족하지 못했습니다 (값 {value:.6e}, 오차 {error:.3e})",
            value=value,
            error=error,
            **context,
        )
    return EnergyValue(max(value, 0.0), error, None, pieces)


# ============================================================================
# Public API
# ============================================================================

def lambda_delta(u, interval, delta, p, profile, config=None):
    """Λ_δ(u, I). 발산하면 +∞ 와 증명서를 담은 EnergyValue."""
    config = config or QuadConfig()
    _check_inputs(delta, p, profile, config)
    w = restrict(u, as_interval(interval))
    cert = divergence_certificate(w, delta, profile, config)
    if cert is not None:
        logger.debug("발산 점프 x=%.6g J=%.6g (%s)", cert.location, cert.jump, cert.side)
        return EnergyValue.divergent(cert)
    kernel = _Kernel.build(profile, delta, p, config)
    segs = _segments(w)
    results = _evaluate_pairs(kernel, segs, _pair_list(len(segs)))
    return _finish(results, config, {"delta": delta, "segments": len(segs)})


def lambda_plain(u, interval, p, profile, config=None):
    """Λ(u, I) = Λ_1(u, I)."""
    return lambda_delta(u, interval, 1.0, p, profile, config)


def lambda_affine_1d(slope, length, delta, p, profile):
    """
    아핀 함수 (기울기 slope, 길이 length) 의 Λ_δ 를 1차원 적분으로:
    2 ∫_0^L (L − s) φ_δ(|slope|·s) s^{−(p+1)} ds.
    """
    if not (delta > 0.0 and length > 0.0):
        raise InvalidParameterError(f"δ 와 length 는 양수여야 합니다: δ={delta}, L={length}")
    a = abs(slope)
    if a == 0.0:
        return 0.0
    kernel = _Kernel.build(profile, delta, p, QuadConfig(require_normalized=False))

    def integrand(s):
        return (length - s) * float(kernel.phi_delta(a * s)) / s ** (p + 1.0)

    cuts = {0.0, length}
    cuts.update(t / a for t in kernel.thresholds if t / a < length)
    start = min(c for c in cuts if c > 0.0)
    cuts.update(start * 2.0 ** (-k) for k in range(1, 40))
    cuts.update(geometric_edges(start, length))
    edges = sorted(cuts)
    total, error = [], []
    for lo, hi in zip(edges, edges[1:]):
        value, err = integrate.quad(integrand, lo, hi, epsabs=0.0, epsrel=1e-12, limit=200)
        total.append(value)
        error.append(err)
    value = 2.0 * math.fsum(total)
    if 2.0 * math.fsum(error) > 1e-9 * max(value, 1e-300) + 1e-15:
        raise QuadratureFailureError("1차원 아핀 적분이 수렴하지 않았습니다.", slope=slope, delta=delta)
    return value


def _radial_integral(kernel, rho0, rho1, d0, d1, power, coeff):
    """∫_{rho0}^{rho1} φ_δ(|d(ρ)|)·coeff·ρ^{−power} dρ, d 는 ρ 에 대해 선형."""
    if rho1 - rho0 <= 0.0:
        return 0.0, 0.0
    slope = (d1 - d0) / (rho1 - rho0)
    edges = {rho0, rho1}
    for target in kernel.cuts():
        if target != 0.0 and (d0 - target) * (d1 - target) < 0.0:
            edges.add(rho0 + (target - d0) / slope)
    edges = sorted(edges)
    floor = kernel.delta / (GRADING_DIVISOR * abs(slope)) if abs(slope) > SLOPE_EPS else math.inf
    pieces = []
    for lo, hi in zip(edges, edges[1:]):
        sub = graded_edges(lo, hi, floor, kernel.config.diagonal_band_refinement) if lo <= 0.0 else geometric_edges(lo, hi)
        pieces.extend(zip(sub, sub[1:]))

    def integrand(rho):
        d = d0 + slope * (rho - rho0)
        return coeff * kernel.phi_delta(d) / rho ** power

    config = kernel.config
    result = integrate_pieces(integrand, pieces, config.gauss_order, config.rel_tol, config.abs_tol, config.max_subdivision_depth)
    return result.value, result.error


def local_energy(u, x0, delta, p, profile, config=None):
    """∫ φ_δ(|u(x0) − u(y)|) / |x0 − y|^{p+1} dy. 기준점 선택에 쓴다."""
    config = config or QuadConfig()
    _check_inputs(delta, p, profile, config)
    kernel = _Kernel.build(profile, delta, p, config)
    u0 = evaluate(u, x0)
    values = []
    for k in range(u.n_segments):
        xa, xb = u.x[k], u.x[k + 1]
        va, vb = u.right[k], u.left[k + 1]
        slope = (vb - va) / (xb - xa)
        parts = []
        if xb <= x0:
            parts.append((xb, xa))
        elif xa >= x0:
            parts.append((xa, xb))
        else:
            parts.extend([(x0, xa), (x0, xb)])
        for near, far in parts:
            dn = va + slope * (near - xa) - u0
            df = va + slope * (far - xa) - u0
            # x0 가 점프 위에 있으면 가까운 쪽 차이가 0 이 아니다
            if near == x0 and abs(dn) > 1e-12 * max(1.0, abs(u0)) and kernel.phi_delta(dn) > 0.0:
                return math.inf
            value, _ = _radial_integral(kernel, abs(near - x0), abs(far - x0), dn, df, p + 1.0, 1.0)
            values.append(value)
    return math.fsum(values)


def lambda_delta_on_line(u, delta, p, profile, config=None):
    """
    창 밖에서 상수인 u 의 ℝ 위 에너지: 창×창 + 2·(창×바깥) + 바깥×바깥.

    바깥 영역은 상수이므로 y 방향 적분을 닫힌 형태로 처리하고
    ∫ φ_δ(|u(x) − c|)·dist^{−p}/p dx 의 1차원 적분만 남긴다.
    """
    config = config or QuadConfig()
    core = lambda_delta(u, u.interval, delta, p, profile, config)
    if core.diverges or config.far_field_cutoff_policy is FarFieldPolicy.HARD_CUTOFF:
        return core

    kernel = _Kernel.build(profile, delta, p, config)
    a, b = float(u.x[0]), float(u.x[-1])
    c_left, c_right = float(u.right[0]), float(u.left[-1])

    far = 0.0
    gap = c_right - c_left
    phi_far = float(kernel.phi_delta(gap))
    if phi_far > 0.0:
        if p == 1.0:
            cert = DivergenceCertificate((a + b) / 2.0, gap, "far-field", 0.0, phi_far)
            return EnergyValue.divergent(cert)
        far = 2.0 * phi_far * (b - a) ** (1.0 - p) / (p * (p - 1.0))

    values, errors = [], []
    for k in range(u.n_segments):
        xa, xb = float(u.x[k]), float(u.x[k + 1])
        va, vb = float(u.right[k]), float(u.left[k + 1])
        # 오른쪽 바깥 (y > b): ρ = b − x
        value, err = _radial_integral(kernel, b - xb, b - xa, vb - c_right, va - c_right, p, 1.0 / p)
        values.append(value)
        errors.append(err)
        # 왼쪽 바깥 (y < a): ρ = x − a
        value, err = _radial_integral(kernel, xa - a, xb - a, va - c_left, vb - c_left, p, 1.0 / p)
        values.append(value)
        errors.append(err)
    tails = 2.0 * math.fsum(values)
    total = core.value + tails + far
    return EnergyValue(total, core.error_estimate + 2.0 * math.fsum(errors), None, core.pieces)


def staircase_oracle(delta, profile=None):
    """
    δ 높이 계단 (칸 폭 δ) 의 p = 1 에너지 닫힌 형태.

    φ(k) 는 k 칸 떨어진 두 칸의 값 차 kδ 에 대한 φ 값. 기본은 지시 함수 프로파일.
    """
    if not 0.0 < delta < 1.0:
        raise InvalidParameterError(f"δ 는 (0, 1) 안이어야 합니다: {delta}", delta=delta)
    if profile is None:
        profile = phi.make_profile(phi.ProfileKind.INDICATOR_STEP, 1.0)
    if profile.p != 1.0:
        raise InvalidParameterError("계단 닫힌 형태는 p = 1 에서만 정의됩니다.", p=profile.p)
    if phi.eval_phi(profile, 1.0) > 0.0:
        return math.inf
    count = int(math.floor(1.0 / delta + 1e-9))
    terms = []
    for k in range(2, count + 1):
        weight = 2.0 * float(phi.eval_phi(profile, float(k)))
        if weight == 0.0:
            continue
        terms.append((1.0 - k * delta) * weight * -math.log1p(-1.0 / (k * k)))
    return math.fsum(terms)


def lambda_zero(u, p, kappa):
    """극한 범함수 κ·∫|u′|^p (p = 1 이면 κ·|Du|)."""
    seminorm = sobolev_seminorm_p(u, p)
    if math.isinf(seminorm):
        return math.inf
    return kappa * seminorm


# ============================================================================
# Incremental table
# ============================================================================

class SegmentEnergyTable:
    """
    구간 쌍 에너지 행렬. 최적화에서 일부 구간만 바뀌면 그 행/열만 다시 계산한다.

    총합은 항상 전체 상삼각 행렬의 fsum 이라 갱신 순서와 무관하다.
    """

    def __init__(self, u, delta, p, profile, config=None, _matrix=None, _errors=None, _cert=None):
        self.config = config or QuadConfig()
        _check_inputs(delta, p, profile, self.config)
        self.fn = u
        self.delta = delta
        self.p = p
        self.profile = profile
        self.kernel = _Kernel.build(profile, delta, p, self.config)
        n = u.n_segments
        if _matrix is not None:
            self.matrix, self.errors, self.certificate = _matrix, _errors, _cert
            return
        self.certificate = divergence_certificate(u, delta, profile, self.config)
        self.matrix = np.zeros((n, n))
        self.errors = np.zeros((n, n))
        if self.certificate is None:
            self._fill(_pair_list(n))

    def _fill(self, pairs):
        segs = _segments(self.fn)
        for (i, j), result in zip(pairs, _evaluate_pairs(self.kernel, segs, pairs)):
            self.matrix[i, j] = result[0]
            self.errors[i, j] = result[1]

    @property
    def total(self):
        if self.certificate is not None:
            return math.inf
        return 2.0 * math.fsum(self.matrix[np.triu_indices(self.fn.n_segments)])

    def energy(self):
        if self.certificate is not None:
            return EnergyValue.divergent(self.certificate)
        err = 2.0 * math.fsum(self.errors[np.triu_indices(self.fn.n_segments)])
        return EnergyValue(max(self.total, 0.0), err)

    def propose(self, new_fn, changed):
        """
        구간 수가 같은 new_fn 에 대한 새 표. changed 는 값이나 끝점이 바뀐 구간 번호들.

        changed 밖의 구간은 끝점과 값이 모두 그대로여야 한다.
        """
        if len(new_fn.x) != len(self.fn.x):
            return SegmentEnergyTable(new_fn, self.delta, self.p, self.profile, self.config)
        changed = sorted(set(changed))
        slopes = new_fn.slopes
        for k in sorted({b for c in changed for b in (c, c + 1)}):
            if 0 < k < new_fn.n_segments and new_fn.jumps[k - 1] != 0.0:
                cert = classify_jump(
                    new_fn.x[k], new_fn.jumps[k - 1], slopes[k - 1], slopes[k], self.delta, self.profile, self.config
                )
                if cert is not None:
                    return SegmentEnergyTable(
                        new_fn, self.delta, self.p, self.profile, self.config,
                        _matrix=self.matrix, _errors=self.errors, _cert=cert,
                    )
        if self.certificate is not None:
            return SegmentEnergyTable(new_fn, self.delta, self.p, self.profile, self.config)
        table = SegmentEnergyTable(
            new_fn, self.delta, self.p, self.profile, self.config,
            _matrix=self.matrix.copy(), _errors=self.errors.copy(), _cert=None,
        )
        n = new_fn.n_segments
        pairs = sorted({(min(c, k), max(c, k)) for c in changed for k in range(n)})
        table._fill(pairs)
        return table
