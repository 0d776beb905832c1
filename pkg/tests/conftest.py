import pytest

ACCEPTANCE: dict[int, tuple[bool, str]] = {}

TITLES = {
    1: "timing reproduction",
    2: "tau reproduction and two-qubit schedule duration",
    3: "gate identities",
    4: "table verification",
    5: "exact round trip and route agreement",
    6: "shot-noise scaling",
    7: "three-qubit coefficient",
    8: "physicality projection",
    9: "process tomography",
    10: "CLI determinism",
}


@pytest.fixture
def criterion():
    """Record a criterion verdict; the assertion still decides the test outcome."""

    def record(number: int, passed: bool, detail: str) -> None:
        ACCEPTANCE[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(TITLES):
        if number not in ACCEPTANCE:
            terminalreporter.write_line(f"criterion {number:2d} ({TITLES[number]}): NOT RUN")
            continue
        passed, detail = ACCEPTANCE[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} ({TITLES[number]}): {verdict}  {detail}")
