"""Collects acceptance outcomes and prints one line per criterion."""
from collections import defaultdict

import pytest

_RESULTS: dict = defaultdict(list)


class Recorder:
    def __call__(self, criterion: int, part: str, ok: bool, detail: str) -> bool:
        _RESULTS[criterion].append((part, bool(ok), detail))
        print(f"criterion {criterion} [{part}]: {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)


@pytest.fixture(scope="session")
def acceptance():
    return Recorder()


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for c in sorted(_RESULTS):
        parts = _RESULTS[c]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'pass' if good else 'FAIL'} ({d})" for name, good, d in parts)
        terminalreporter.write_line(f"criterion {c:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
