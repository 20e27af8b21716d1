import sys
from functools import lru_cache
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from lambda_lab.finitefield import FpPoly, supersingular_lambdas  # noqa: E402
from lambda_lab.modpoly import compute_modpoly, r_polynomial  # noqa: E402

# acceptance criteria append (label, passed, detail) here
ACCEPTANCE_LOG: list[tuple[str, bool, str]] = []

# F_p computed anywhere in the session; the acceptance module fills it first
MODPOLY_CACHE: dict[int, object] = {}


def get_modpoly(p):
    if p not in MODPOLY_CACHE:
        MODPOLY_CACHE[p] = compute_modpoly(p)
    return MODPOLY_CACHE[p]


@lru_cache(maxsize=None)
def get_ss(p):
    return supersingular_lambdas(p)


def get_rbar(p):
    return FpPoly.from_int_poly(r_polynomial(get_modpoly(p)), p)


@pytest.fixture(scope="session")
def modpoly():
    return get_modpoly


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LOG:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}")
