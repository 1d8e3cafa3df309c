import pytest

ACCEPTANCE: dict[int, tuple[str, str]] = {}


@pytest.fixture
def criterion():
    """Record ``(number, passed, detail)`` for the acceptance summary; ``None`` means skipped."""

    def record(number: int, passed: bool | None, detail: str = "") -> None:
        status = "SKIP" if passed is None else "PASS" if passed else "FAIL"
        ACCEPTANCE[number] = (status, detail)
        print(f"criterion {number}: {status} {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number}: {status} {detail}".rstrip())
