import numpy as np
import pytest

from gravcat.core import CONSTANTS, preset_protocol

AMU = CONSTANTS.amu


@pytest.fixture
def romero():
    return preset_protocol("RomeroIsart")


@pytest.fixture
def pino():
    return preset_protocol("Pino")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict[str, tuple[bool, str]] = {}
ACCEPTANCE_INFO: list[str] = []


def record_acceptance(key: str, ok: bool, detail: str) -> None:
    ACCEPTANCE[key] = (bool(ok), detail)
    print(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE and not ACCEPTANCE_INFO:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
    for line in ACCEPTANCE_INFO:
        terminalreporter.write_line(f"[INFO] {line}")
