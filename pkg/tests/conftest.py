"""Collects one verdict line per acceptance criterion and prints them at the end of the run."""
import pytest

_VERDICTS: dict[int, list[tuple[bool, str]]] = {}


class AcceptanceLog:
    def record(self, criterion: int, passed: bool, detail: str) -> bool:
        _VERDICTS.setdefault(criterion, []).append((bool(passed), detail))
        print(f"[acceptance {criterion}] {'PASS' if passed else 'FAIL'}: {detail}")
        return bool(passed)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_VERDICTS):
        parts = _VERDICTS[n]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}")
