import contextlib
import time

import pytest

from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.register_profile("stress", max_examples=400, deadline=None)
settings.load_profile("default")

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Context manager timing an acceptance criterion and recording PASS/FAIL."""

    @contextlib.contextmanager
    def run(number, title, limit):
        start = time.perf_counter()
        status = "FAIL"
        try:
            yield
            elapsed = time.perf_counter() - start
            status = "PASS" if elapsed < limit else "FAIL"
            _ACCEPTANCE[number] = (status, title, elapsed, limit)
            print(f"criterion {number}: {status} {title} ({elapsed:.2f}s / {limit}s)")
            assert elapsed < limit, f"runtime {elapsed:.1f}s exceeds {limit}s"
        except BaseException:
            if number not in _ACCEPTANCE:
                _ACCEPTANCE[number] = ("FAIL", title, time.perf_counter() - start, limit)
                print(f"criterion {number}: FAIL {title}")
            raise

    return run


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        status, title, elapsed, limit = _ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}  ({elapsed:.2f}s, limit {limit}s)")
