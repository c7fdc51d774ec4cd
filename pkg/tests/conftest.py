import numpy as np
import pytest

# One line per acceptance criterion, printed in the terminal summary so the
# verdicts are visible even when all tests pass.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def z2_12():
    """Z^2 window [0, 12]^2 (169 sites), shared by several pipelines."""
    from delonetop.geometry import gen_periodic

    return gen_periodic(np.eye(2), ([0.0, 0.0], [12.0, 12.0]))


@pytest.fixture(scope="session")
def chern_12(z2_12):
    """Represented chern_2band_2d (M=1) on the shared 12x12 window."""
    from delonetop.groupoid import builtin_model, represent

    f = builtin_model("chern_2band_2d", M=1.0)
    return f, represent(f, z2_12)
