import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from oracles import Membership  # noqa: E402
from vecopt.cones import componentwise_cone, cone_icecream_3d, cone_theta_2d  # noqa: E402


def cone_family(name):
    """(cone, independent membership oracle) for a family label."""
    kind, _, arg = name.partition(":")
    if kind == "orthant2":
        return componentwise_cone(2), Membership("componentwise")
    if kind == "orthant3":
        return componentwise_cone(3), Membership("componentwise")
    if kind == "theta":
        theta = float(arg)
        return cone_theta_2d(theta), Membership("theta2d", theta=theta)
    if kind == "ice":
        a, k = arg.split("/")
        return cone_icecream_3d(float(a), int(k)), Membership("icecream3d", alpha=float(a), facets=int(k))
    raise ValueError(name)


ALL_FAMILIES = [
    "orthant2", "orthant3",
    "theta:60", "theta:90", "theta:120", "theta:150",
    "ice:20/6", "ice:20/12", "ice:45/6", "ice:45/12",
]
FAMILIES_2D = ["orthant2", "theta:60", "theta:90", "theta:120", "theta:150"]


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(12345)


# Acceptance criteria record one line each; the lines are echoed at the end of the run.
ACCEPTANCE_LINES: dict = {}


def record_acceptance(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[key])
