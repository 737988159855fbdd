#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Γ-극한 상수 κ, γ 추정과 수렴 검사

- pointwise_scan: 고정된 u 에 대해 δ → 0 일 때 Λ_δ(u) → ∫|u′|^p 확인
- estimate_kappa: U 근처 (‖v − U‖_p ≤ ε(δ)) 에서 Λ_δ 최소화
- estimate_gamma_step: H_{1/2} 근처 (L¹) 에서 Λ_δ 최소화 (p = 1)
- 각종 탐침: (G1) 하한, Sobolev 소속, γ → κ 전이, σ 비율
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from common.errors import (
    DivergentScanError,
    EstimationFailureError,
    InvalidLadderError,
    InvalidParameterError,
    InvalidSpecError,
    ProbeRejectedError,
)
from common.logs import get_logger, log_record
from common.parallel import ordered_map
from gammalab import profile as phi
from gammalab.annealing import OptimizerConfig, anneal, start_rng
from gammalab.evaluator import QuadConfig, lambda_delta
from gammalab.gridfn import (
    as_interval,
    difference_quotient_norm,
    evaluate,
    from_values,
    lp_distance,
    make_affine,
    make_heaviside,
    make_staircase,
    restrict,
    sobolev_seminorm_p,
)
from gammalab.recovery import graded_step, localize_step_competitor, recover_step_p1, step_ramp, step_to_identity

logger = get_logger("gamma")

TAIL_ENTRIES = 3
STAIRCASE_NUDGE = 1e-6
FAMILY_TOLERANCE = 0.1
UNBOUNDED_SLOPE_FRACTION = 0.5
STEP_WIDTH_FRACTION = 1.9       # γ 시드 경사로 폭 = 1.9·ε (L¹ 거리 ≈ 폭/2)
GRADED_BUDGET = 0.98           # graded_staircase 시드가 쓰는 ε 의 비율


# ============================================================================
# Types
# ============================================================================

@dataclass(frozen=True)
class ConvergenceScan:
    ladder: tuple
    values: tuple
    errors: tuple
    target: float
    model: dict
    extrapolated_limit: float

    def to_record(self):
        return {
            "ladder": list(self.ladder),
            "values": list(self.values),
            "errors": list(self.errors),
            "target": self.target,
            "model": dict(self.model),
            "extrapolated_limit": self.extrapolated_limit,
        }


@dataclass(frozen=True)
class DeltaMinimum:
    delta: float
    energy: float
    candidate: str
    constraint: float
    epsilon: float
    starts: int
    accepted: int
    evaluated: int
    seed: int
    binding: bool = True      # ε < flat_distance: 상수 함수가 제약 밖

    def to_record(self):
        return {
            "delta": self.delta,
            "best_energy": self.energy,
            "candidate": self.candidate,
            "constraint": self.constraint,
            "epsilon": self.epsilon,
            "binding": self.binding,
            "starts": self.starts,
            "accepted": self.accepted,
            "evaluated": self.evaluated,
            "seed": self.seed,
        }


@dataclass(frozen=True)
class KappaEstimate:
    value: float
    per_delta: tuple
    extrapolated_limit: float
    bracket: tuple
    minimizers: dict = field(default_factory=dict, compare=False)
    diagnostics: dict = field(default_factory=dict)
    target: str = "U"

    def to_record(self):
        return {
            "target": self.target,
            "value": self.value,
            "extrapolated_limit": self.extrapolated_limit,
            "bracket": list(self.bracket),
            "per_delta": [row.to_record() for row in self.per_delta],
            "diagnostics": dict(self.diagnostics),
        }


@dataclass(frozen=True)
class GammaEstimate(KappaEstimate):
    target: str = "H_1/2"


@dataclass
class ProbeReport:
    name: str
    passed: bool
    rows: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    def to_record(self):
        return {"name": self.name, "passed": self.passed, "rows": list(self.rows), "notes": list(self.notes)}


# ============================================================================
# Ladders
# ============================================================================

def validate_ladder(ladder):
    values = [float(d) for d in ladder]
    if not values:
        raise InvalidLadderError("δ 사다리가 비어 있습니다.")
    if any(not (d > 0.0 and math.isfinite(d)) for d in values):
        raise InvalidLadderError(f"δ 는 모두 양수여야 합니다: {values}", ladder=values)
    if any(b >= a for a, b in zip(values, values[1:])):
        raise InvalidLadderError(f"δ 사다리는 순감소해야 합니다: {values}", ladder=values)
    return values


def geometric_ladder(start, factor, count):
    if not (start > 0.0 and 0.0 < factor < 1.0 and count >= 1):
        raise InvalidLadderError(
            f"기하 사다리 인자가 잘못되었습니다: start={start}, factor={factor}, count={count}"
        )
    return [start * factor ** j for j in range(int(count))]


def log_ladder(start, count):
    """δ_{j+1} = δ_j / ⌈ln(1/δ_j)⌉ (⌈·⌉ ≤ 1 이면 2 로 나눈다)."""
    if not (0.0 < start < 1.0 and count >= 1):
        raise InvalidLadderError(f"로그 사다리 인자가 잘못되었습니다: start={start}, count={count}")
    ladder = [float(start)]
    while len(ladder) < count:
        divisor = math.ceil(math.log(1.0 / ladder[-1]))
        ladder.append(ladder[-1] / (divisor if divisor > 1 else 2))
    return ladder


def _fit_limit(ladder, values):
    """E(δ) ≈ L + a·δ + b·δ|ln δ| 최소제곱. 점이 적으면 뒤쪽 항부터 뺀다."""
    deltas = np.asarray(ladder, dtype=float)
    y = np.asarray(values, dtype=float)
    columns = [np.ones_like(deltas), deltas * np.abs(np.log(deltas)), deltas]
    used = columns[: min(len(deltas), 3)]
    coeffs, *_ = np.linalg.lstsq(np.column_stack(used), y, rcond=None)
    coeffs = list(coeffs) + [0.0] * (3 - len(coeffs))
    return {"limit": float(coeffs[0]), "b_delta_log": float(coeffs[1]), "a_delta": float(coeffs[2])}


# ============================================================================
# Pointwise scan
# ============================================================================

def pointwise_scan(u, interval, profile, p, ladder, config=None):
    """사다리의 각 δ 에서 Λ_δ(u, I) 와 목표값 ∫_I |u′|^p."""
    config = config or QuadConfig()
    ladder = validate_ladder(ladder)
    window = restrict(u, as_interval(interval))
    if not window.is_continuous:
        raise InvalidSpecError("pointwise_scan 은 연속 함수에만 적용합니다.", function=window.to_record())
    values, errors = [], []
    for delta in ladder:
        energy = lambda_delta(window, window.interval, delta, p, profile, config)
        if energy.diverges:
            raise DivergentScanError(
                f"δ={delta} 에서 에너지가 발산합니다.",
                delta=delta,
                certificate=energy.certificate.to_record(),
            )
        values.append(energy.value)
        errors.append(energy.error_estimate)
        log_record(logger, "scan", {"delta": delta, "energy": energy.value, "error": energy.error_estimate})
    model = _fit_limit(ladder, values)
    return ConvergenceScan(
        ladder=tuple(ladder),
        values=tuple(values),
        errors=tuple(errors),
        target=sobolev_seminorm_p(window, p),
        model=model,
        extrapolated_limit=model["limit"],
    )


# ============================================================================
# Seeds
# ============================================================================

def identity_seed(nodes):
    grid = np.linspace(0.0, 1.0, int(nodes) + 2)
    return from_values(grid, grid)


def staircase_seeds(delta, profile):
    """κ 시작점: 높이 δ(1+10⁻⁶), 2δ, (φ(1) = 0 이면) δ 인 계단."""
    steps = [("staircase_nudged", delta * (1.0 + STAIRCASE_NUDGE)), ("staircase_2delta", 2.0 * delta)]
    if phi.eval_phi(profile, 1.0) == 0.0:
        steps.append(("staircase_delta", delta))
    return [(name, make_staircase((0.0, 1.0), step)) for name, step in steps if step < 1.0]


def kappa_seeds(delta, profile, nodes, opt, rng):
    base = identity_seed(nodes)
    seeds = [("identity", base)] + staircase_seeds(delta, profile)
    for j in range(opt.restarts):
        noise = rng.normal(0.0, 0.5 * delta, size=len(base.x))
        seeds.append((f"perturbed_{j}", from_values(base.x, base.left + noise)))
    return seeds


def gamma_seeds(delta, profile, nodes, opt, rng):
    width = min(STEP_WIDTH_FRACTION * opt.epsilon(delta), 0.5)
    ramp = step_ramp(0.5, width, nodes)
    seeds = [("ramp", ramp)]
    graded = graded_step(0.5, delta, profile, GRADED_BUDGET * opt.epsilon(delta))
    if graded is not None:
        seeds.append(("graded_staircase", graded[0]))
    if delta < 1.0:
        seeds.append(("step_recovery", recover_step_p1(0.5, delta, profile, width=width, measure=False)))
        seeds.append(("step_recovery_default", recover_step_p1(0.5, delta, profile, measure=False)))
    for j in range(opt.restarts):
        noise = rng.normal(0.0, 0.5 * delta, size=len(ramp.x))
        seeds.append((f"perturbed_{j}", from_values(ramp.x, np.clip(ramp.left + noise, 0.0, 1.0))))
    return seeds


# ============================================================================
# Estimation
# ============================================================================

def flat_distance(target, p):
    """
    min_c ‖target − c‖_p: 가장 가까운 상수 함수까지의 거리.

    ε(δ) 가 이 값 이상이면 에너지 0 인 상수가 제약 안에 들어 그 δ 의 최솟값은 κ, γ 에 대해 말해 주지 않는다.
    """
    a, b = float(target.x[0]), float(target.x[-1])
    lo = float(min(target.left.min(), target.right.min()))
    hi = float(max(target.left.max(), target.right.max()))

    def distance(c):
        return lp_distance(target, make_affine((a, b), 0.0, c), p)

    if hi - lo <= 0.0:
        return 0.0
    result = optimize.minimize_scalar(distance, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
    return float(min(result.fun, distance(lo), distance(hi)))


def _minimize_at(delta_index, delta, target, seed_fn, profile, nodes, opt, quad, flat):
    seeds = seed_fn(delta, profile, nodes, opt, start_rng(opt.seed, delta_index, 0))

    def run(item):
        start_index, (name, start) = item
        rng = start_rng(opt.seed, delta_index, start_index + 1)
        return anneal(name, start, target, delta, profile, opt, rng, quad)

    results = [r for r in ordered_map(run, list(enumerate(seeds)), opt.threads) if r is not None]
    if not results:
        raise EstimationFailureError(
            f"δ={delta} 에서 모든 시작점이 발산하거나 제약을 벗어났습니다.",
            delta=delta,
            starts=len(seeds),
        )
    best = min(results, key=lambda r: r.energy)
    row = DeltaMinimum(
        delta=delta,
        energy=best.energy,
        candidate=best.name,
        constraint=best.distance,
        epsilon=opt.epsilon(delta),
        starts=len(results),
        accepted=sum(r.accepted for r in results),
        evaluated=sum(r.evaluated for r in results),
        seed=opt.seed,
        binding=opt.epsilon(delta) < flat,
    )
    log_record(logger, "minimum", row.to_record())
    return row, best.best


def _estimate(cls, target, seed_fn, profile, ladder, nodes, opt, quad):
    ladder = validate_ladder(ladder)
    if nodes < 1:
        raise InvalidParameterError(f"nodes 는 1 이상이어야 합니다: {nodes}", nodes=nodes)
    flat = flat_distance(target, profile.p)
    rows, minimizers = [], {}
    for index, delta in enumerate(ladder):
        row, fn = _minimize_at(index, delta, target, seed_fn, profile, nodes, opt, quad, flat)
        rows.append(row)
        minimizers[delta] = fn

    # 상수가 제약 안에 드는 δ 의 최솟값은 추정에서 뺀다
    binding = [row for row in rows if row.binding]
    if not binding:
        logger.warning("ε(δ) ≥ %.4g 인 δ 뿐입니다. 모든 행으로 추정합니다: %s", flat, ladder)
        binding = rows
    tail = binding[-TAIL_ENTRIES:]
    tail_min = min(row.energy for row in tail)
    limit = _fit_limit([r.delta for r in tail], [r.energy for r in tail])["limit"] if len(tail) > 1 else tail_min
    limit = max(limit, 0.0)
    return cls(
        value=min(row.energy for row in binding),
        per_delta=tuple(rows),
        extrapolated_limit=limit,
        bracket=(min(tail_min, limit), max(tail_min, limit)),
        minimizers=minimizers,
        diagnostics={
            "nodes": nodes,
            "flat_distance": flat,
            "unconstrained_deltas": [row.delta for row in rows if not row.binding],
            "optimizer": opt.to_record(),
            "starts": sum(r.starts for r in rows),
            "accepted": sum(r.accepted for r in rows),
            "evaluated": sum(r.evaluated for r in rows),
        },
    )


def estimate_kappa(profile, p, ladder, nodes=16, opt=None, quad=None):
    """‖v − U‖_{L^p} ≤ ε(δ) 아래 Λ_δ(v, (0,1)) 최소화로 κ 를 가늠한다."""
    if abs(p - profile.p) > 1e-12:
        raise InvalidParameterError(f"p={p} 가 프로파일의 p={profile.p} 와 다릅니다.", p=p)
    opt = opt or OptimizerConfig()
    target = make_affine((0.0, 1.0), 1.0, 0.0)
    estimate = _estimate(KappaEstimate, target, kappa_seeds, profile, ladder, nodes, opt, quad)
    log_record(logger, "kappa", estimate.to_record())
    return estimate


def estimate_gamma_step(profile, ladder, nodes=16, opt=None, quad=None):
    """‖v − H_{1/2}‖_{L¹} ≤ ε(δ) 아래 Λ_δ 최소화로 γ 를 가늠한다 (p = 1)."""
    if profile.p != 1.0:
        raise InvalidParameterError(f"γ 추정은 p = 1 에서만 정의됩니다: p={profile.p}", p=profile.p)
    opt = opt or OptimizerConfig()
    target = make_heaviside((0.0, 1.0), 0.5)
    estimate = _estimate(GammaEstimate, target, gamma_seeds, profile, ladder, nodes, opt, quad)
    log_record(logger, "gamma", estimate.to_record())
    return estimate


# ============================================================================
# Probes
# ============================================================================

def _check_family(g, family, p):
    distances = [lp_distance(fn, g, p, g.interval) for _, fn in family]
    if not distances:
        raise ProbeRejectedError("빈 함수족입니다.")
    if distances[-1] > FAMILY_TOLERANCE or distances[-1] > distances[0] + 1e-9:
        raise ProbeRejectedError(
            f"함수족이 L^p 에서 g 로 수렴하지 않습니다 (거리 {distances[0]:.3g} → {distances[-1]:.3g}).",
            distances=distances,
        )
    return distances


def g1_lower_probe(g, families, profile, p, kappa_est, gamma_est=None, points=None, slack=1e-2, config=None):
    """
    (G1) 하한 검사: 사다리 꼬리에서 min Λ_δ(g_δ) ≥ κ·∫|g′|^p − slack.

    points=(t1, t2) 이면 (t1, t2) 위 에너지를 p = 1 에서는 γ·|g(t2) − g(t1)| 과
    비교하고, p > 1 에서는 σ 비율만 기록한다.
    """
    config = config or QuadConfig()
    gamma_est = kappa_est if gamma_est is None else gamma_est
    bound = kappa_est * sobolev_seminorm_p(g, p) - slack
    report = ProbeReport("g1_lower", True)
    for index, family in enumerate(families):
        distances = _check_family(g, family, p)
        tail = family[-TAIL_ENTRIES:]
        energies = [lambda_delta(fn, g.interval, delta, p, profile, config).value for delta, fn in tail]
        minimum = min(energies)
        ok = minimum >= bound
        row = {"family": index, "tail_min": minimum, "bound": bound, "distances": distances, "passed": ok}
        if points is not None:
            t1, t2 = points
            rise = abs(evaluate(g, t2) - evaluate(g, t1))
            local = [lambda_delta(fn, (t1, t2), delta, p, profile, config).value for delta, fn in tail]
            row["local_tail_min"] = min(local)
            if p == 1.0:
                row["local_bound"] = gamma_est * rise - slack
                ok = ok and min(local) >= row["local_bound"]
            else:
                ratios = sigma_ratio_probe(tail, t1, t2, kappa_est, p, profile, config)
                row["sigma_ratios"] = [r["ratio"] for r in ratios.rows]
        row["passed"] = ok
        report.rows.append(row)
        report.passed = report.passed and ok
    log_record(logger, "probe", report.to_record())
    return report


def sigma_ratio_probe(u_family, t1, t2, kappa_est, p, profile, config=None):
    """Λ_δ(u_δ, (t1,t2)) / (κ (t2−t1)^{1−p} |Δu|^p) 를 기록만 한다."""
    config = config or QuadConfig()
    report = ProbeReport("sigma_ratio", True, notes=["σ 값은 주장하지 않고 측정 비율만 기록"])
    for delta, fn in u_family:
        energy = lambda_delta(fn, (t1, t2), delta, p, profile, config).value
        rise = abs(evaluate(fn, t2, "left") - evaluate(fn, t1))
        denominator = kappa_est * (t2 - t1) ** (1.0 - p) * rise ** p
        ratio = energy / denominator if denominator > 0.0 else None
        report.rows.append({"delta": delta, "energy": energy, "denominator": denominator, "ratio": ratio})
    log_record(logger, "probe", report.to_record())
    return report


def sobolev_membership_probe(u, p, h_ladder, window=None):
    """h 사다리 위 ∫|τ_h u|^p. log-log 기울기가 −(p−1)/2 보다 가파르면 무한 증가로 표시."""
    if not p > 1.0:
        raise InvalidParameterError(f"p > 1 이어야 합니다: {p}", p=p)
    window = u.interval if window is None else as_interval(window)
    hs = [float(h) for h in h_ladder]
    values = [difference_quotient_norm(u, h, p, window) for h in hs]
    report = ProbeReport("sobolev_membership", True)
    report.rows = [{"h": h, "value": v} for h, v in zip(hs, values)]
    if len(hs) >= 2 and all(v > 0.0 for v in values):
        slope = float(np.polyfit(np.log(hs), np.log(values), 1)[0])
        unbounded = slope < -UNBOUNDED_SLOPE_FRACTION * (p - 1.0)
        report.notes.append(f"log-log slope {slope:.4f}")
    else:
        unbounded = False
        report.notes.append("기울기를 잴 수 없음 (h 가 하나이거나 값이 0)")
    report.passed = not unbounded
    report.rows.append({"sup": max(values), "unbounded": unbounded})
    log_record(logger, "probe", report.to_record())
    return report


def kappa_from_gamma(estimate, profile, config=None):
    """
    가장 작은 δ 의 γ 최소점을 국소화하고 ln δ^{-1} 칸으로 타일링해 U 의 경쟁 함수로 바꾼다.

    얻은 Λ_μ(f) 는 κ 쪽 상계 후보로 보고, γ 추정과 함께 기록한다.
    """
    config = config or QuadConfig()
    delta = min(estimate.minimizers)
    g = estimate.minimizers[delta]
    h = localize_step_competitor(g, delta, profile, config=config)
    f, mu = step_to_identity(h, delta)
    energy = lambda_delta(f, (0.0, 1.0), mu, profile.p, profile, config)
    identity = make_affine((0.0, 1.0), 1.0, 0.0)
    row = {
        "delta": delta,
        "mu": mu,
        "cells": int(round(delta / mu)),
        "energy": energy.value,
        "gamma_value": estimate.value,
        "distance_to_identity": lp_distance(f, identity, profile.p),
    }
    report = ProbeReport("kappa_from_gamma", not energy.diverges, rows=[row])
    log_record(logger, "probe", report.to_record())
    return report
