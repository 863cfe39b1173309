from pathlib import Path

import pytest

from fama_sim.channel import ScatteringEnvironment

DATA = Path(__file__).parent / "data"
ROOT = Path(__file__).resolve().parents[1]

# criterion number -> (passed, detail); filled by test_acceptance
ACCEPTANCE = {}


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def paper_env():
    return ScatteringEnvironment(k_factor=20.0, omega=1.0, n_paths=5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {status}  {detail}")
