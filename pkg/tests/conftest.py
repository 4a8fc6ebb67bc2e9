"""Shared fixtures: the two reference certificates, built once per session.

The p = 6 certificate is the expensive one (20 Newton solves at 256 bits);
its build time is recorded so the acceptance test can assert the runtime
budget against the real construction cost, wherever in the session it ran.
"""

import time

import pytest

from lp_isoforge.solver import construct_pair


@pytest.fixture(scope="session")
def cert_p6_timed():
    t0 = time.monotonic()
    cert = construct_pair(6, 20, 256)
    return cert, time.monotonic() - t0


@pytest.fixture(scope="session")
def cert_p6(cert_p6_timed):
    return cert_p6_timed[0]


@pytest.fixture(scope="session")
def cert_p4():
    # j_max = 5 keeps every scale solvable; large j at p = 4 has no
    # solution in the mass domain (see test_solver for the regression)
    return construct_pair(4, 5, 256)
