"""
실험 계획 (ExperimentPlan) 구성

설정 파일은 `섹션.키=값` 줄의 나열이다. 기본값 ← 설정 파일 ← 명령행 플래그
순으로 덮어쓰며, 모르는 키나 같은 키의 중복은 ConfigError 이다.

    # 예시
    profile.kind=indicator
    profile.p=1
    ladder.spec=log:0.1:3
    opt.restarts=2
    run.seed=42
"""

from dataclasses import dataclass, field
from pathlib import Path

from common.errors import ArtifactIOError, ConfigError
from gammalab import profile as phi
from gammalab.annealing import OptimizerConfig
from gammalab.evaluator import FarFieldPolicy, QuadConfig
from gammalab.gamma import geometric_ladder, log_ladder, validate_ladder
from gammalab.gridfn import (
    Interval,
    from_values,
    load_text,
    make_affine,
    make_heaviside,
    make_staircase,
    make_tent,
)

COMMANDS = ("check-profile", "eval", "scan", "kappa", "gamma1d", "recover", "invariants")
SECTIONS = ("profile", "fn", "ladder", "quad", "opt", "run")
FUNCTION_NAMES = ("U", "affine", "constant", "heaviside", "tent", "staircase", "file")
BASE_NAMES = ("identity", "staircase")

DEFAULTS = {
    "profile.kind": "indicator",
    "profile.p": "1",
    "profile.scale": "auto",
    "profile.normalize": "true",
    "profile.table": "",
    "fn.name": "U",
    "fn.a": "0",
    "fn.b": "1",
    "fn.c": "0.5",
    "fn.slope": "1",
    "fn.intercept": "0",
    "fn.height": "1",
    "fn.step": "0.1",
    "fn.path": "",
    "fn.on_line": "false",
    "ladder.spec": "0.1,0.01,0.001",
    "quad.gauss_order": "10",
    "quad.max_subdivision_depth": "12",
    "quad.rel_tol": "1e-9",
    "quad.abs_tol": "1e-14",
    "quad.diagonal_band_refinement": "48",
    "quad.divergence_probe_levels": "12",
    "quad.far_field_cutoff_policy": "analytic_tail",
    "opt.nodes": "16",
    "opt.restarts": "4",
    "opt.stages": "20",
    "opt.moves_per_stage": "25",
    "opt.cooling": "0.95",
    "opt.target_acceptance": "0.3",
    "opt.polish_sweeps": "2",
    "opt.epsilon_exponent": "0.5",
    "run.seed": "0",
    "run.out": "output",
    "run.xlsx": "false",
    "run.base": "identity",
    "run.base_delta": "0.1",
    "run.invariant_cases": "100",
}

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


# ============================================================================
# Parsing helpers
# ============================================================================

def _number(values, key, cast=float):
    raw = values[key]
    try:
        return cast(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"설정 '{key}' 의 값이 올바르지 않습니다: '{raw}'", key=key, value=raw) from None


def _flag(values, key):
    raw = str(values[key]).strip().lower()
    if raw in _TRUE:
        return True
    if raw in _FALSE:
        return False
    raise ConfigError(f"설정 '{key}' 는 true/false 여야 합니다: '{values[key]}'", key=key)


def parse_ladder(spec):
    """'0.1,0.01' | 'geometric:start:factor:count' | 'log:start:count'"""
    text = str(spec).strip()
    try:
        if text.startswith("geometric:"):
            _, start, factor, count = text.split(":")
            ladder = geometric_ladder(float(start), float(factor), int(count))
        elif text.startswith("log:"):
            _, start, count = text.split(":")
            ladder = log_ladder(float(start), int(count))
        else:
            ladder = [float(item) for item in text.split(",") if item.strip()]
    except ValueError:
        raise ConfigError(f"δ 사다리 형식을 해석할 수 없습니다: '{text}'", ladder=text) from None
    return validate_ladder(ladder)


def read_config_file(path):
    """key=value 파일을 dict 로. 모르는 키/중복/형식 오류는 ConfigError."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise ArtifactIOError(f"설정 파일을 읽을 수 없습니다 ({path}): {err}", path=str(path)) from err
    values = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: 'key=value' 형식이 아닙니다: '{raw.strip()}'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        _check_key(key, f"{path}:{lineno}")
        if key in values:
            raise ConfigError(f"{path}:{lineno}: 키 '{key}' 가 중복되었습니다.", key=key)
        values[key] = value
    return values


def _check_key(key, where="설정"):
    if key not in DEFAULTS:
        section = key.split(".", 1)[0]
        hint = "" if section in SECTIONS else f" (섹션은 {', '.join(SECTIONS)} 중 하나)"
        raise ConfigError(f"{where}: 알 수 없는 설정 키 '{key}'{hint}", key=key)


# ============================================================================
# ExperimentPlan
# ============================================================================

@dataclass(frozen=True)
class ExperimentPlan:
    command: str
    values: dict = field(compare=False)
    ladder: tuple
    quad: QuadConfig
    opt: OptimizerConfig
    nodes: int
    seed: int
    out: Path

    @property
    def effective(self):
        """모든 기본값이 채워진 설정 (정렬된 key → 문자열)."""
        return {key: str(self.values[key]) for key in sorted(self.values)}

    @property
    def p(self):
        return _number(self.values, "profile.p")

    @property
    def xlsx(self):
        return _flag(self.values, "run.xlsx")

    @property
    def on_line(self):
        return _flag(self.values, "fn.on_line")

    @property
    def base_delta(self):
        return _number(self.values, "run.base_delta")

    @property
    def invariant_cases(self):
        return _number(self.values, "run.invariant_cases", int)

    def build_profile(self, normalized=None):
        """설정의 φ. normalized=None 이면 profile.normalize 설정을 따른다."""
        values = self.values
        kind = phi.parse_kind(values["profile.kind"])
        raw_scale = values["profile.scale"].strip().lower()
        scale = None if raw_scale == "auto" else _number(values, "profile.scale")
        if kind is phi.ProfileKind.TABULATED:
            table = values["profile.table"] or str(phi.SAMPLE_PROFILE_FILE)
            profile = phi.load_tabulated(table, self.p, scale=1.0 if scale is None else scale)
        else:
            profile = phi.make_profile(kind, self.p, scale=scale)
        wanted = _flag(values, "profile.normalize") if normalized is None else normalized
        return phi.normalize(profile) if wanted else profile

    def build_function(self):
        values = self.values
        name = values["fn.name"]
        interval = Interval(_number(values, "fn.a"), _number(values, "fn.b"), self.on_line)
        if name == "U":
            return make_affine(interval, 1.0, 0.0)
        if name == "affine":
            return make_affine(interval, _number(values, "fn.slope"), _number(values, "fn.intercept"))
        if name == "constant":
            height = _number(values, "fn.height")
            return from_values([interval.a, interval.b], [height, height], interval.truncation_of_line)
        if name == "heaviside":
            return make_heaviside(interval, _number(values, "fn.c"))
        if name == "tent":
            return make_tent(interval, _number(values, "fn.c"), _number(values, "fn.height"))
        if name == "staircase":
            return make_staircase(interval, _number(values, "fn.step"))
        if not values["fn.path"]:
            raise ConfigError("fn.name=file 이면 fn.path 가 필요합니다.", key="fn.path")
        return load_text(values["fn.path"])

    def build_base(self, profile):
        """recover 명령의 기준 경쟁 함수."""
        name = self.values["run.base"]
        if name == "identity":
            return make_affine((0.0, 1.0), 1.0, 0.0)
        if name == "staircase":
            step = self.base_delta if phi.eval_phi(profile, 1.0) == 0.0 else 2.0 * self.base_delta
            return make_staircase((0.0, 1.0), step)
        return load_text(name)


def parse_config(command, path=None, overrides=None):
    """
    기본값, 설정 파일, 명령행 값을 합쳐 ExperimentPlan 을 만든다.

    Args:
        command: COMMANDS 중 하나
        path: key=value 설정 파일 경로 (없으면 None)
        overrides: 명령행에서 온 {key: value}

    Raises:
        ConfigError: 알 수 없는 명령/키, 잘못된 값
        InvalidLadderError: δ 사다리가 비었거나 순감소가 아님
    """
    if command not in COMMANDS:
        raise ConfigError(f"알 수 없는 명령: '{command}' (허용: {', '.join(COMMANDS)})", command=command)
    values = dict(DEFAULTS)
    if path:
        values.update(read_config_file(path))
    for key, value in (overrides or {}).items():
        _check_key(key, "명령행")
        values[key] = str(value)

    if values["fn.name"] not in FUNCTION_NAMES:
        raise ConfigError(f"알 수 없는 함수 이름: '{values['fn.name']}' (허용: {', '.join(FUNCTION_NAMES)})")
    if values["run.base"] not in BASE_NAMES and not Path(values["run.base"]).suffix:
        raise ConfigError(f"run.base 는 {', '.join(BASE_NAMES)} 또는 함수 파일 경로여야 합니다: '{values['run.base']}'")
    try:
        FarFieldPolicy(values["quad.far_field_cutoff_policy"])
    except ValueError:
        raise ConfigError(
            f"quad.far_field_cutoff_policy 가 올바르지 않습니다: '{values['quad.far_field_cutoff_policy']}'"
        ) from None

    quad = QuadConfig(
        gauss_order=_number(values, "quad.gauss_order", int),
        max_subdivision_depth=_number(values, "quad.max_subdivision_depth", int),
        rel_tol=_number(values, "quad.rel_tol"),
        abs_tol=_number(values, "quad.abs_tol"),
        diagonal_band_refinement=_number(values, "quad.diagonal_band_refinement", int),
        divergence_probe_levels=_number(values, "quad.divergence_probe_levels", int),
        far_field_cutoff_policy=values["quad.far_field_cutoff_policy"],
        require_normalized=_flag(values, "profile.normalize"),
    )
    seed = _number(values, "run.seed", int)
    if not 0 <= seed < 2 ** 64:
        raise ConfigError(f"run.seed 는 64비트 음이 아닌 정수여야 합니다: {seed}", seed=seed)
    opt = OptimizerConfig(
        restarts=_number(values, "opt.restarts", int),
        stages=_number(values, "opt.stages", int),
        moves_per_stage=_number(values, "opt.moves_per_stage", int),
        cooling=_number(values, "opt.cooling"),
        target_acceptance=_number(values, "opt.target_acceptance"),
        polish_sweeps=_number(values, "opt.polish_sweeps", int),
        seed=seed,
        epsilon_exponent=_number(values, "opt.epsilon_exponent"),
    )
    nodes = _number(values, "opt.nodes", int)
    if nodes < 1:
        raise ConfigError(f"opt.nodes 는 1 이상이어야 합니다: {nodes}", nodes=nodes)

    return ExperimentPlan(
        command=command,
        values=values,
        ladder=tuple(parse_ladder(values["ladder.spec"])),
        quad=quad,
        opt=opt,
        nodes=nodes,
        seed=seed,
        out=Path(values["run.out"]),
    )
