import math
import sys

import pytest

from escape_lab.functions import FunctionSpec


@pytest.fixture(scope="session")
def qc():
    return FunctionSpec.quarter_cosh()


@pytest.fixture(scope="session")
def cp():
    return FunctionSpec.canonical_product(0.25)


@pytest.fixture(scope="session")
def cp3():
    return FunctionSpec.canonical_product(0.3)


@pytest.fixture(scope="session")
def ex():
    return FunctionSpec.scaled_exp(1.0)


@pytest.fixture(scope="session")
def fb():
    return FunctionSpec.fatou_baker()




def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        ok, detail = mod.RESULTS[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
