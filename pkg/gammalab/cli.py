"""
gamma-lab 명령행 진입점

    python gamma_lab.py scan --profile indicator --p 1 --ladder 0.1,0.01,0.001 --fn U
    python gamma_lab.py kappa --profile compact_bump --delta 0.05 --seed 42 --out output/kappa

모든 명령은 <out>/results.csv, summary.json, summary.md 를 남긴다.
results.csv 맨 위에는 코드 버전과 실제 적용된 설정이 `#` 주석으로 들어가고,
타임스탬프는 run.log 에만 남는다.
"""

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

from common.errors import ArtifactIOError, ConfigError, GammaLabError
from common.logs import banner, get_logger, jsonable, log_record, setup_logging
from common.report import _render_summary, load_template
from gammalab import __version__
from gammalab import profile as phi
from gammalab.config import DEFAULTS, FUNCTION_NAMES, parse_config
from gammalab.evaluator import lambda_delta, lambda_delta_on_line
from gammalab.gamma import estimate_gamma_step, estimate_kappa, kappa_from_gamma, pointwise_scan
from gammalab.gridfn import (
    dump_text,
    evaluate,
    lp_distance,
    sample_frame,
    sobolev_seminorm_p,
    total_variation,
)
from gammalab.invariants import run_suite
from gammalab.recovery import recover_piecewise_linear

logger = get_logger("cli")

FLOAT_FORMAT = "%.17g"
MINIMUM_COLUMNS = ["delta", "best_energy", "constraint", "starts", "seed", "epsilon", "binding", "accepted", "evaluated", "candidate"]

# results.csv 열 순서 (명령별로 고정)
COLUMNS = {
    "check-profile": ["check", "passed"],
    "eval": ["delta", "energy", "error_estimate", "diverges", "certificate_location", "certificate_jump", "certificate_side"],
    "scan": ["delta", "energy", "error_estimate", "target"],
    "kappa": MINIMUM_COLUMNS,
    "gamma1d": MINIMUM_COLUMNS,
    "recover": ["delta", "energy", "error_estimate", "lp_distance", "l1_distance", "boundary_gap", "breakpoints"],
    "invariants": ["case", "check", "value", "reference", "passed"],
}

# run.out 은 산출물 위치일 뿐이라 산출물에 넣지 않는다 (같은 설정이면 같은 바이트)
NOT_EMBEDDED = ("run.out",)


@dataclass
class CommandOutcome:
    rows: list
    summary: dict
    functions: dict = field(default_factory=dict)
    exit_code: int = 0


# ============================================================================
# Commands
# ============================================================================

def _check_profile(plan):
    profile = plan.build_profile(normalized=False)
    report = phi.verify_conditions(profile)
    rows = [{"check": name, "passed": ok} for name, ok in report.checks.items()]
    summary = {
        "profile": profile.to_record(),
        "report": report.to_record(),
        "normalization": report.normalization,
        "passed": report.passed,
    }
    if report.normalization > 0.0:
        summary["normalized_scale"] = phi.normalize(profile).scale
    verdict = "pass" if report.passed else "fail"
    logger.info("normalization %.12g, %s", report.normalization, verdict)
    return CommandOutcome(rows, summary)


def _energy(plan, u, delta, profile):
    if plan.on_line:
        return lambda_delta_on_line(u, delta, profile.p, profile, plan.quad)
    return lambda_delta(u, u.interval, delta, profile.p, profile, plan.quad)


def _eval(plan):
    profile = plan.build_profile()
    u = plan.build_function()
    rows = []
    for delta in plan.ladder:
        energy = _energy(plan, u, delta, profile)
        cert = energy.certificate
        rows.append({
            "delta": delta,
            "energy": energy.value,
            "error_estimate": energy.error_estimate,
            "diverges": energy.diverges,
            "certificate_location": cert.location if cert else None,
            "certificate_jump": cert.jump if cert else None,
            "certificate_side": cert.side if cert else None,
        })
        logger.info("δ=%-10.4g Λ_δ=%.12g%s", delta, energy.value, " (발산)" if energy.diverges else "")
    summary = {"profile": profile.to_record(), "function": u.to_record(), "energies": [r["energy"] for r in rows]}
    return CommandOutcome(rows, summary, {"input": u})


def _scan(plan):
    profile = plan.build_profile()
    u = plan.build_function()
    scan = pointwise_scan(u, u.interval, profile, profile.p, plan.ladder, plan.quad)
    rows = [
        {"delta": d, "energy": v, "error_estimate": e, "target": scan.target}
        for d, v, e in zip(scan.ladder, scan.values, scan.errors)
    ]
    for row in rows:
        logger.info("δ=%-10.4g Λ_δ=%.12g (목표 %.12g)", row["delta"], row["energy"], row["target"])
    return CommandOutcome(rows, {"profile": profile.to_record(), "scan": scan.to_record()}, {"input": u})


def _minimizer_outcome(estimate, extra=None):
    rows = [row.to_record() for row in estimate.per_delta]
    functions = {f"{estimate.target.replace('/', '')}_{j:02d}": fn for j, fn in enumerate(estimate.minimizers.values())}
    summary = {"value": estimate.value, "estimate": estimate.to_record()}
    summary.update(extra or {})
    return CommandOutcome(rows, summary, functions)


def _kappa(plan):
    profile = plan.build_profile()
    estimate = estimate_kappa(profile, profile.p, plan.ladder, plan.nodes, plan.opt, plan.quad)
    logger.info("κ 추정값 %.12g (외삽 %.6g)", estimate.value, estimate.extrapolated_limit)
    return _minimizer_outcome(estimate)


def _gamma1d(plan):
    profile = plan.build_profile()
    estimate = estimate_gamma_step(profile, plan.ladder, plan.nodes, plan.opt, plan.quad)
    transfer = kappa_from_gamma(estimate, profile, plan.quad)
    logger.info("γ 추정값 %.12g (외삽 %.6g)", estimate.value, estimate.extrapolated_limit)
    return _minimizer_outcome(estimate, {"kappa_from_gamma": transfer.to_record()})


def _recover(plan):
    profile = plan.build_profile()
    target = plan.build_function()
    base = plan.build_base(profile)
    a, b = float(target.x[0]), float(target.x[-1])
    rows, functions = [], {"target": target, "base": base}
    for j, delta in enumerate(plan.ladder):
        u = recover_piecewise_linear(target, delta, base, plan.base_delta, profile, plan.quad, measure=False)
        energy = _energy(plan, u, delta, profile)
        gap = max(abs(evaluate(u, a) - evaluate(target, a)), abs(evaluate(u, b, "left") - evaluate(target, b, "left")))
        rows.append({
            "delta": delta,
            "energy": energy.value,
            "error_estimate": energy.error_estimate,
            "lp_distance": lp_distance(u, target, profile.p),
            "l1_distance": lp_distance(u, target, 1.0),
            "boundary_gap": gap,
            "breakpoints": len(u.x),
        })
        functions[f"recovery_{j:02d}"] = u
        logger.info("δ=%-10.4g Λ_δ=%.12g ‖u_δ − u‖₁=%.3g", delta, energy.value, rows[-1]["l1_distance"])
    summary = {
        "profile": profile.to_record(),
        "target": target.to_record(),
        "base_delta": plan.base_delta,
        "total_variation": total_variation(target),
        "limit_seminorm": sobolev_seminorm_p(target, profile.p),
    }
    return CommandOutcome(rows, summary, functions)


def _invariants(plan):
    profile = plan.build_profile()
    report = run_suite(profile, plan.ladder[0], plan.invariant_cases, plan.seed, plan.quad)
    failures = len(report.failures)
    if failures:
        logger.error("불변식 %d건 실패 (전체 %d건)", failures, len(report.rows))
    else:
        logger.info("불변식 %d건 모두 통과", len(report.rows))
    return CommandOutcome(report.rows, report.to_record(), exit_code=0 if report.passed else 1)


COMMANDS = {
    "check-profile": _check_profile,
    "eval": _eval,
    "scan": _scan,
    "kappa": _kappa,
    "gamma1d": _gamma1d,
    "recover": _recover,
    "invariants": _invariants,
}


# ============================================================================
# Artifacts
# ============================================================================

def embedded_config(plan):
    return {k: v for k, v in plan.effective.items() if k not in NOT_EMBEDDED}


def _header_lines(plan):
    lines = [f"# gammalab {__version__}", f"# command={plan.command}"]
    lines.extend(f"# {key}={value}" for key, value in embedded_config(plan).items())
    return lines


def _frame(plan, outcome):
    return pd.DataFrame(outcome.rows, columns=COLUMNS[plan.command])


def _write_csv(plan, frame, path):
    """`#` 헤더 (버전, 명령, 설정) 뒤에 표를 쓴다."""
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(_header_lines(plan)) + "\n")
        frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def write_results_csv(plan, outcome, path):
    _write_csv(plan, _frame(plan, outcome), path)


def _summary_payload(plan, outcome):
    return {
        "version": __version__,
        "command": plan.command,
        "config": embedded_config(plan),
        "summary": outcome.summary,
        "functions": sorted(f"{name}.fn" for name in outcome.functions),
    }


def _render_markdown(plan, outcome):
    scalars = {k: v for k, v in jsonable(outcome.summary).items() if not isinstance(v, (dict, list))}
    fields = {
        "버전": __version__,
        "명령": plan.command,
        "설정": "\n".join(f"- `{k}` = `{v}`" for k, v in embedded_config(plan).items()),
        "요약": "\n".join(f"- **{k}**: {v}" for k, v in sorted(scalars.items())) or "- (스칼라 값 없음)",
        "행수": len(outcome.rows),
        "산출물": "\n".join(f"- {name}.fn" for name in sorted(outcome.functions)) or "- (없음)",
    }
    return _render_summary(load_template("summary.md"), fields)


def write_artifacts(plan, outcome):
    """
    results.csv, summary.json, summary.md, *.fn, *_samples.csv (+ 선택적으로 results.xlsx).

    텍스트 산출물은 모두 같은 `#` 헤더 (버전, 명령, 설정) 로 시작한다.
    """
    out = plan.out
    comments = [line[2:] for line in _header_lines(plan)]
    try:
        write_results_csv(plan, outcome, out / "results.csv")
        payload = json.dumps(jsonable(_summary_payload(plan, outcome)), sort_keys=True, indent=2, ensure_ascii=False)
        (out / "summary.json").write_text(payload + "\n", encoding="utf-8")
        (out / "summary.md").write_text(_render_markdown(plan, outcome), encoding="utf-8")
        for name, fn in outcome.functions.items():
            dump_text(fn, out / f"{name}.fn", comments)
            _write_csv(plan, sample_frame(fn), out / f"{name}_samples.csv")
        if plan.xlsx:
            meta = [("version", __version__), ("command", plan.command)]
            config_frame = pd.DataFrame(meta + list(embedded_config(plan).items()), columns=["key", "value"])
            with pd.ExcelWriter(out / "results.xlsx", engine="openpyxl") as writer:
                _frame(plan, outcome).to_excel(writer, sheet_name="results", index=False)
                config_frame.to_excel(writer, sheet_name="config", index=False)
    except OSError as err:
        raise ArtifactIOError(f"산출물을 쓸 수 없습니다 ({out}): {err}", path=str(out)) from err
    logger.info("산출물 저장 완료 → %s", out)


def write_error_record(out, err):
    """error.json 에 구조화된 오류 레코드를 남긴다. 쓰기 실패는 경고만."""
    try:
        Path(out).mkdir(parents=True, exist_ok=True)
        text = json.dumps(jsonable(err.to_record()), sort_keys=True, indent=2, ensure_ascii=False)
        (Path(out) / "error.json").write_text(text + "\n", encoding="utf-8")
    except OSError as io_err:
        logger.warning("error.json 을 쓰지 못했습니다: %s", io_err)


# ============================================================================
# Run
# ============================================================================

def run(plan):
    """plan 의 명령을 실행하고 산출물을 쓴다. 반환값은 종료 코드."""
    banner(f"gamma-lab {__version__}: {plan.command}")
    log_record(logger, "config", {"version": __version__, "command": plan.command, **plan.effective})

    logger.info("[1/3] 계산 중... (δ 사다리 %s)", ", ".join(f"{d:.4g}" for d in plan.ladder))
    outcome = COMMANDS[plan.command](plan)

    logger.info("[2/3] 산출물 저장 중...")
    write_artifacts(plan, outcome)

    logger.info("[3/3] 요약")
    log_record(logger, "summary", outcome.summary)
    return outcome.exit_code


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="key=value 설정 파일")
    common.add_argument("--profile", help="φ 종류 (indicator, saturating_power, compact_bump, tabulated)")
    common.add_argument("--p", help="지수 p ≥ 1")
    common.add_argument("--delta", help="δ 하나")
    common.add_argument("--ladder", help="δ 사다리 ('0.1,0.01' | 'geometric:0.1:0.5:4' | 'log:0.1:3')")
    common.add_argument("--fn", help=f"함수 ({', '.join(FUNCTION_NAMES[:-1])}) 또는 함수 파일 경로")
    common.add_argument("--nodes", help="최적화 시작 함수의 내부 구간점 수")
    common.add_argument("--restarts", help="δ 마다 추가 무작위 시작점 수")
    common.add_argument("--seed", help="난수 시드 (기본 0)")
    common.add_argument("--out", help="산출물 디렉터리")
    common.add_argument("--xlsx", action="store_true", help="results.xlsx 도 저장")
    common.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="임의의 설정 키 덮어쓰기 (예: --set quad.rel_tol=1e-8), 여러 번 사용 가능",
    )

    parser = argparse.ArgumentParser(description="비국소 범함수 Γ-수렴 수치 실험")
    sub = parser.add_subparsers(dest="command", required=True, metavar="command")
    helps = {
        "check-profile": "φ 허용 조건과 정규화 검사",
        "eval": "사다리의 각 δ 에서 Λ_δ(u) 계산",
        "scan": "Λ_δ(u) → ∫|u′|^p 수렴 확인",
        "kappa": "U 근처 제약 최소화로 κ 추정",
        "gamma1d": "H_{1/2} 근처 제약 최소화로 γ 추정 (p = 1)",
        "recover": "구간별 선형 목표의 복원 함수 구성",
        "invariants": "무작위 함수 모음 위 불변식 검사",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text, description=text)
    return parser


def flag_overrides(args):
    """명령행 플래그를 설정 키로 옮긴다."""
    if args.delta is not None and args.ladder is not None:
        raise ConfigError("--delta 와 --ladder 는 함께 쓸 수 없습니다.", delta=args.delta, ladder=args.ladder)
    overrides = {}
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set 값은 KEY=VALUE 형식이어야 합니다: '{item}'", value=item)
        key, value = (part.strip() for part in item.split("=", 1))
        if key in overrides:
            raise ConfigError(f"--set 키 '{key}' 가 중복되었습니다.", key=key)
        overrides[key] = value
    simple = {
        "profile.kind": args.profile,
        "profile.p": args.p,
        "ladder.spec": args.delta if args.delta is not None else args.ladder,
        "opt.nodes": args.nodes,
        "opt.restarts": args.restarts,
        "run.seed": args.seed,
        "run.out": args.out,
    }
    overrides.update({key: value for key, value in simple.items() if value is not None})
    if args.fn is not None:
        if args.fn in FUNCTION_NAMES[:-1]:
            overrides["fn.name"] = args.fn
        else:
            overrides["fn.name"] = "file"
            overrides["fn.path"] = args.fn
    if args.xlsx:
        overrides["run.xlsx"] = "true"
    return overrides


def main(argv=None):
    args = build_parser().parse_args(argv)
    setup_logging()
    out = Path(args.out or DEFAULTS["run.out"])
    try:
        plan = parse_config(args.command, args.config, flag_overrides(args))
        out = plan.out
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as err:
            raise ArtifactIOError(f"출력 디렉터리를 만들 수 없습니다 ({out}): {err}", path=str(out)) from err
        setup_logging(out / "run.log")
        return run(plan)
    except GammaLabError as err:
        logger.error("%s", err)
        write_error_record(out, err)
        return err.exit_code


if __name__ == "__main__":
    sys.exit(main())
