"""
gamma-lab 예외 계층

모든 예외는 GammaLabError 를 상속하고, CLI 가 그대로 프로세스 종료 코드로
사용하는 exit_code 를 가진다.
"""


class GammaLabError(Exception):
    exit_code = 1
    kind = "error"

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_record(self):
        """error.json 에 기록할 구조화된 오류 레코드."""
        return {
            "error": self.kind,
            "exit_code": self.exit_code,
            "message": str(self),
            "details": {k: _plain(v) for k, v in self.details.items()},
        }


class ConfigError(GammaLabError):
    exit_code = 2
    kind = "config"


class ArtifactIOError(GammaLabError):
    exit_code = 3
    kind = "io"


class InvalidParameterError(GammaLabError):
    exit_code = 4
    kind = "invalid-parameter"


class InvalidSpecError(GammaLabError):
    exit_code = 5
    kind = "invalid-spec"


class InvalidLadderError(GammaLabError):
    exit_code = 6
    kind = "invalid-ladder"


class DegenerateProfileError(GammaLabError):
    exit_code = 7
    kind = "degenerate-profile"


class QuadratureFailureError(GammaLabError):
    exit_code = 8
    kind = "quadrature-failure"


class InconclusiveQuadratureError(GammaLabError):
    exit_code = 9
    kind = "inconclusive-quadrature"


class DivergentScanError(GammaLabError):
    exit_code = 10
    kind = "divergent-scan"


class EstimationFailureError(GammaLabError):
    exit_code = 11
    kind = "estimation-failure"


class ProbeRejectedError(GammaLabError):
    exit_code = 12
    kind = "probe-rejected"


def _plain(value):
    if hasattr(value, "to_record"):
        return value.to_record()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, float) and value != value:
        return None
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)
