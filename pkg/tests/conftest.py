"""Shared instances and the per-criterion summary printed after the acceptance run."""

import numpy as np
import pytest

from quadreg.designs import lsd_to_scheme, scheme_to_lsd
from quadreg.mub import construct_d4, construct_d16, mub_to_scheme, sub_mub


@pytest.fixture(scope="session")
def mub4():
    return construct_d4()


@pytest.fixture(scope="session")
def mub16():
    return construct_d16()


@pytest.fixture(scope="session")
def scheme4(mub4):
    return mub_to_scheme(mub4)


@pytest.fixture(scope="session")
def scheme16(mub16):
    return mub_to_scheme(mub16)


@pytest.fixture(scope="session")
def sub16(scheme16):
    """Subconstituent R_1(0) of the 288-point scheme."""
    return scheme16.subconstituent(0, 1)


@pytest.fixture(scope="session")
def lsd8(sub16):
    """The f = 8 linked system of (16, 6, 2) designs carried by R_1(0)."""
    system, _ = scheme_to_lsd(sub16)
    return system.complement() if 2 * system.k > system.v else system


@pytest.fixture(scope="session")
def lsd3(lsd8):
    return lsd8.subsystem([0, 1, 2])


@pytest.fixture(scope="session")
def scheme_lsd8(lsd8):
    return lsd_to_scheme(lsd8)


@pytest.fixture(scope="session")
def scheme_lsd3(lsd3):
    return lsd_to_scheme(lsd3)


@pytest.fixture(scope="session")
def mub16_f3(mub16):
    return sub_mub(mub16, [0, 1, 2])


def complete_graph_rel(n: int) -> np.ndarray:
    return 1 - np.eye(n, dtype=np.int64)


# ---------------------------------------------------------------------------
# one line per acceptance criterion at the end of the run

_CRITERIA: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _CRITERIA[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_CRITERIA):
        num = name.split("_")[2]
        label = " ".join(name.split("_")[3:])
        terminalreporter.write_line(f"criterion {int(num):2d} {_CRITERIA[name]}  {label}")
