"""요약 템플릿 렌더링 도우미."""

from pathlib import Path

from common.errors import ArtifactIOError

TEMPLATE_DIR = Path(__file__).resolve().parent.parent / "templates"


def load_template(name="summary.md"):
    path = TEMPLATE_DIR / name
    try:
        return path.read_text(encoding="utf-8")
    except OSError as err:
        raise ArtifactIOError(f"템플릿 파일을 찾을 수 없습니다 ({path})", path=str(path)) from err


def _render_summary(template_content, fields):
    """요약 템플릿의 {키} 플레이스홀더를 실제 값으로 치환."""
    message = template_content
    for key, value in fields.items():
        message = message.replace("{" + key + "}", str(value))
    return message
