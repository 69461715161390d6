import numpy as np
import pytest

_CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def criterion():
    """Record the verdict of an acceptance criterion and fail the test if it is not met."""
    def verdict(number: int, ok: bool, detail: str):
        _CRITERIA[number] = (bool(ok), detail)
        assert ok, f"criterion {number} not met: {detail}"
    return verdict


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        ok, detail = _CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
