import numpy as np
import pytest

from nmflow import sbm
from nmflow.spectral import OhmicFamily

# Ohmic-family settings of the three regime studies
SBM_CASES = {
    "ohmic": dict(s=1.0, T=0.01),
    "subohmic": dict(s=0.8, T=0.5),
    "superohmic": dict(s=3.0, T=0.5),
}


def sbm_params(s, T, alpha=0.02, omega_c=10.0, omega0=1.0):
    return sbm.SbmParams(omega0, OhmicFamily(alpha, s, omega_c), T)


@pytest.fixture(scope="session", params=sorted(SBM_CASES))
def sbm_case(request):
    """(name, params, integrals on [0, 50] with dt = 5e-3)."""
    p = sbm_params(**SBM_CASES[request.param])
    return request.param, p, sbm.sbm_integrals(p, sbm.uniform_grid(50.0, 5e-3))


@pytest.fixture(scope="session")
def ohmic_ints():
    p = sbm_params(**SBM_CASES["ohmic"])
    return sbm.sbm_integrals(p, sbm.uniform_grid(50.0, 5e-3))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one PASS/FAIL line per acceptance criterion
_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.failed:
        prev = _ACCEPTANCE.get(name, "PASS")
        _ACCEPTANCE[name] = "FAIL" if report.failed or prev == "FAIL" else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=_criterion_key):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")


def _criterion_key(name):
    digits = "".join(c for c in name.split("_")[1] if c.isdigit()) if "_" in name else ""
    return (int(digits) if digits else 99, name)
