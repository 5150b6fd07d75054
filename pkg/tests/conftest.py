from __future__ import annotations

from pathlib import Path

import pytest

from helpers import BRANCHY_LISTING
from sasscfg.cfg import build_cfg
from sasscfg.sass import parse_listing

REPO_ROOT = Path(__file__).resolve().parent.parent

# Collected by the logreport hook; rendered as one PASS/FAIL line per
# acceptance check in the terminal summary.
_acceptance_results: list[tuple[str, bool]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.rsplit("::", 1)[-1]
        _acceptance_results.append((name, report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance checks")
    for name, passed in sorted(_acceptance_results):
        label = name.removeprefix("test_").replace("_", " ")
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} {label}")


@pytest.fixture(scope="session")
def corpus_manifest() -> Path:
    return REPO_ROOT / "corpus" / "manifest.txt"


@pytest.fixture
def branchy_listing():
    return parse_listing(BRANCHY_LISTING, kernel_id="gk110.cuda.blas.dguard")


@pytest.fixture
def branchy_cfg(branchy_listing):
    return build_cfg(branchy_listing, arch="kepler")
