import os
import sys

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def x6_curve():
    from curvlab.wp.mesh import HyperellipticCurve
    return HyperellipticCurve((-1, 0, 0, 0, 0, 0, 1))


@pytest.fixture(scope="session")
def wp_level2(x6_curve):
    """Full pipeline objects at refinement 2 (fast, reused by many tests)."""
    from curvlab.wp import (GreenOperator, build_mesh, quadratic_differential_basis,
                            solve_liouville, wolpert_curvature)
    mesh = build_mesh(x6_curve, 2)
    structure = solve_liouville(mesh)
    basis = quadratic_differential_basis(structure)
    green = GreenOperator(structure)
    curv = wolpert_curvature(basis, green=green)
    return {"mesh": mesh, "structure": structure, "basis": basis, "green": green, "curv": curv}


@pytest.fixture(scope="session")
def wp_run3():
    """Complete level-3 run of the pipeline, including the dense kernel checks."""
    from curvlab.wp import run_wp
    return run_wp(level=3, seed=0)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
