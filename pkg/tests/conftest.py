from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

# (criterion, status, detail) lines collected by the acceptance suite
ACCEPTANCE_LINES: list[tuple[str, str, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(ACCEPTANCE_LINES, key=lambda r: int(r[0].split()[1])):
        terminalreporter.write_line(f"{status:4s}  {name}: {detail}")


@pytest.fixture
def synth20() -> Path:
    return FIXTURES / "synth20"


@pytest.fixture
def write_text(tmp_path):
    def _write(name: str, text: str) -> Path:
        path = tmp_path / name
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        return path

    return _write
