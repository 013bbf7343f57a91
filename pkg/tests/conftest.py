import numpy as np
import pytest

from rwimaging.covariance import CovarianceModel
from rwimaging.spectral import WaveguideGeometry, build_mode_basis
from rwimaging.stochastic import compute_mode_statistics

BOUNDARY_ELL = 1 / np.sqrt(5)


@pytest.fixture(scope="session")
def basis():
    return build_mode_basis(WaveguideGeometry(20.0))


@pytest.fixture(scope="session")
def boundary_model():
    return CovarianceModel("boundary", "matern72", 0.013, BOUNDARY_ELL)


@pytest.fixture(scope="session")
def medium_model():
    return CovarianceModel("medium", "gaussian", 0.04, 1.0)


@pytest.fixture(scope="session")
def boundary_stats(basis, boundary_model):
    return compute_mode_statistics(basis, boundary_model)


@pytest.fixture(scope="session")
def medium_stats(basis, medium_model):
    return compute_mode_statistics(basis, medium_model)


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call" or "test_acceptance.py::test_criterion_" not in rep.nodeid:
                continue
            props = dict(rep.user_properties)
            rows.append((props.get("criterion", 0), outcome.upper(), props.get("detail", "")))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number, outcome, detail in sorted(rows):
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if outcome == 'PASSED' else 'FAIL'}  {detail}")
