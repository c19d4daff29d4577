import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

_VERDICTS: dict[int, tuple[str, bool, list[str]]] = {}


class Criterion:
    """Collects the checks of one acceptance criterion and reports a single verdict."""

    def __init__(self):
        self.number = None
        self.title = ""
        self.lines: list[str] = []
        self.ok = True
        self.finished = False

    def __call__(self, number: int, title: str) -> "Criterion":
        self.number, self.title = number, title
        return self

    def check(self, label: str, passed: bool, detail: str = "") -> None:
        passed = bool(passed)
        self.ok &= passed
        self.lines.append(f"{'ok  ' if passed else 'FAIL'} {label}: {detail}")

    def verify(self) -> None:
        self.finished = True
        verdict = "PASS" if self.ok else "FAIL"
        print(f"ACCEPTANCE {self.number:2d} {verdict}  {self.title}")
        for line in self.lines:
            print("    " + line)
        assert self.ok, "\n".join(self.lines)


@pytest.fixture
def criterion():
    c = Criterion()
    yield c
    if c.number is not None:
        _VERDICTS[c.number] = (c.title, c.finished and c.ok, c.lines)


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_VERDICTS):
        title, ok, lines = _VERDICTS[k]
        terminalreporter.write_line(f"ACCEPTANCE {k:2d} {'PASS' if ok else 'FAIL'}  {title}")
        for line in lines:
            terminalreporter.write_line("    " + line)
