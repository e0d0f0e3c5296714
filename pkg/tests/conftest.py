"""Shared fixtures and the acceptance-criteria summary hook."""

import os
import time

import numpy as np
import pytest

import widthlab as wl
from widthlab.widths import variable_b_family

ACCEPTANCE_LINES = []


def record_criterion(num, ok, detail):
    """One pass/fail line per acceptance criterion, shown in the summary."""
    line = f"ACCEPTANCE {num:2d} {'PASS' if ok else 'FAIL'}: {detail}"
    ACCEPTANCE_LINES.append((num, line))
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def shear2():
    return wl.FlowField(wl.ReferenceMap(2))


@pytest.fixture(scope="session")
def family_h01(shear2):
    return wl.build_family(shear2, 0.1, 1, 1)


@pytest.fixture(scope="session")
def fixed_b_data(shear2):
    """Families and disjoint-support certificates for the h ladder,
    built single-threaded and timed."""
    saved = os.environ.pop("WIDTHLAB_THREADS", None)
    started = time.perf_counter()
    data = {}
    try:
        for h in (0.1, 0.05, 0.025):
            family = wl.build_family(shear2, h, 1, 1)
            grid = np.linspace(-0.5, 0.5, 200).reshape(-1, 1)
            cert = wl.certificate_disjoint(family, support_grid=grid)
            data[h] = (family, cert)
    finally:
        if saved is not None:
            os.environ["WIDTHLAB_THREADS"] = saved
    return {"data": data, "elapsed": time.perf_counter() - started}


@pytest.fixture(scope="session")
def variable_b_data():
    started = time.perf_counter()
    curves, info = variable_b_family(0.1, 3, 1, 1)
    return {"curves": curves, "info": info,
            "elapsed": time.perf_counter() - started}
