import contextlib

import pytest

_RESULTS = {}


class _Recorder:
    def __init__(self, number, title):
        self.number, self.title, self.details = number, title, []

    def note(self, text):
        self.details.append(str(text))


@contextlib.contextmanager
def _criterion(number, title):
    rec = _Recorder(number, title)
    try:
        yield rec
    except BaseException as exc:
        _RESULTS[number] = (title, False, "; ".join(rec.details + [f"{type(exc).__name__}: {exc}".splitlines()[0]]))
        raise
    _RESULTS[number] = (title, True, "; ".join(rec.details))


@pytest.fixture
def criterion():
    return _criterion


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_RESULTS):
        title, ok, detail = _RESULTS[number]
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title}"
        terminalreporter.write_line(line + (f" ({detail})" if detail else ""))
