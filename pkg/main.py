import sys
import argparse
from pathlib import Path
from dotenv import load_dotenv

from common.errors import GammaLabError
from common.logs import banner, setup_logging
from gammalab.cli import run
from gammalab.config import parse_config

load_dotenv()

OUTPUT_DIR = 'output/desk'

# (단계 제목, 명령, 하위 디렉터리, 설정 덮어쓰기)
STEPS = [
    ("φ 허용 조건 검사", "check-profile", "profile_{kind}", {}),
    ("Λ_δ(U) → 1 수렴 확인", "scan", "scan_{kind}", {"fn.name": "U", "ladder.spec": "0.1,0.01,0.001"}),
    ("κ 추정", "kappa", "kappa_{kind}", {"ladder.spec": "0.05,0.025"}),
    ("γ 추정과 γ → κ 전이", "gamma1d", "gamma_{kind}", {"ladder.spec": "0.05,0.025"}),
    ("텐트 함수 복원", "recover", "recover_{kind}", {"fn.name": "tent", "ladder.spec": "0.1,0.05,0.025", "run.base": "staircase"}),
    ("불변식 검사", "invariants", "invariants_{kind}", {"ladder.spec": "0.1"}),
]

KINDS = {
    "check-profile": ("indicator", "saturating_power", "compact_bump"),
    "scan": ("indicator", "saturating_power"),
    "kappa": ("indicator", "compact_bump"),
    "gamma1d": ("indicator",),
    "recover": ("indicator",),
    "invariants": ("indicator",),
}


def main():
    parser = argparse.ArgumentParser(description='Γ-수렴 수치 실험 전체 재현 (책상 규모)')
    parser.add_argument('--out', default=OUTPUT_DIR, help=f'산출물 디렉터리 (기본 {OUTPUT_DIR})')
    parser.add_argument('--seed', default='0', help='난수 시드 (기본 0)')
    parser.add_argument('--restarts', default='2', help='δ 마다 추가 무작위 시작점 수 (기본 2)')
    parser.add_argument('--cases', default='100', help='불변식 검사 함수 수 (기본 100)')
    args = parser.parse_args()

    setup_logging()
    root = Path(args.out)
    failed = []
    total = len(STEPS)

    for index, (title, command, folder, overrides) in enumerate(STEPS, start=1):
        print(f"[{index}/{total}] {title}...")
        for kind in KINDS[command]:
            out = root / folder.format(kind=kind)
            values = {
                "profile.kind": kind,
                "profile.p": "1",
                "run.seed": args.seed,
                "run.out": str(out),
                "opt.restarts": args.restarts,
                "run.invariant_cases": args.cases,
                **overrides,
            }
            try:
                plan = parse_config(command, overrides=values)
                out.mkdir(parents=True, exist_ok=True)
                setup_logging(out / "run.log")
                code = run(plan)
            except GammaLabError as err:
                print(f"[ERROR] {command} ({kind}): {err}", file=sys.stderr)
                code = err.exit_code
            status = "완료" if code == 0 else f"실패 (종료 코드 {code})"
            print(f"      → {kind}: {status} ({out})")
            if code != 0:
                failed.append((command, kind, code))

    banner("전체 결과")
    if failed:
        for command, kind, code in failed:
            print(f"[ERROR] {command} / {kind}: 종료 코드 {code}")
        sys.exit(1)
    print(f"[INFO] 모든 단계 완료 → {root}")


if __name__ == '__main__':
    main()
