import numpy as np
import pytest

from coherase import states as st

_ACCEPTANCE_LINES: list[str] = []


class AcceptanceLog:
    """Collects one verdict line per acceptance criterion."""

    def record(self, number: int, title: str, ok: bool, detail: str = "") -> None:
        verdict = "PASS" if ok else "FAIL"
        line = f"[{verdict}] criterion {number:>2}: {title}"
        if detail:
            line += f" ({detail})"
        _ACCEPTANCE_LINES.append(line)
        print(line)


@pytest.fixture(scope="session")
def acceptance():
    return AcceptanceLog()


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split("criterion")[1].split(":")[0])):
            terminalreporter.write_line(line)


@pytest.fixture
def psi2():
    return st.projector(st.maximally_coherent(2))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
