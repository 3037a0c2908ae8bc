import numpy as np
import pytest

from wforge.states import tilde_rho_b
from wforge.witness import construct_from_edge, edge_iteration

# lines recorded by the acceptance suite, printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def half_state():
    return tilde_rho_b(0.5)


@pytest.fixture(scope="session")
def half_pipeline(half_state):
    """(W1, optimized W, trace) for the edge state tilde-rho_{1/2}."""
    W1 = construct_from_edge(half_state)
    W, trace = edge_iteration(W1)
    return W1, W, trace


@pytest.fixture(scope="session")
def figure_run(tmp_path_factory):
    """Grid-9 figure CSV produced through the command line, with its runtime."""
    import time

    from wforge.cli import main
    from wforge.figures import read_csv

    out = tmp_path_factory.mktemp("figures") / "fig.csv"
    t0 = time.perf_counter()
    code = main(["figures", "--which", "both", "--grid", "9", "--out", str(out)])
    elapsed = time.perf_counter() - t0
    return code, read_csv(out), elapsed
