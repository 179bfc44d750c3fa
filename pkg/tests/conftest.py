import numpy as np
import pytest
from hypothesis import HealthCheck, settings

# Chain-running property tests go through compiled kernels and FFTs whose
# first call is slow; wall-clock deadlines would only produce flaky reruns.
settings.register_profile(
    "suite",
    deadline=None,
    max_examples=50,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


@pytest.fixture(scope="session", autouse=True)
def compiled_kernels():
    """Touch every compiled entry point once so no timed section pays the
    JIT cost (the kernels are disk-cached after the first process)."""
    from trunc_gauss.bench import default_start, positive_orthant_case
    from trunc_gauss.model import Need, prepare
    from trunc_gauss.zigzag import (
        ZigzagConfig,
        ZigzagState,
        nuts_propose,
        refresh_momentum,
        zigzag_chain,
        zigzag_propose,
    )

    rng = np.random.default_rng(0)
    problem = positive_orthant_case(np.eye(2), np.zeros(2))
    x0 = default_start(problem)
    zigzag_chain(problem, x0, 4, rng, ZigzagConfig())
    zigzag_chain(problem, x0, 4, rng, ZigzagConfig(use_nuts=True))
    cfg = ZigzagConfig().resolved(problem.gaussian.lambda_min)
    state = ZigzagState.from_position(problem, x0, refresh_momentum(rng, 2))
    zigzag_propose(state, cfg, problem.constraints, rng)
    nuts_propose(state, cfg, problem.constraints, rng)


def pytest_terminal_summary(terminalreporter):
    """Echo the acceptance-criterion PASS/FAIL lines after the test table."""
    try:
        from test_acceptance import REPORT_LINES
    except ImportError:
        return
    if REPORT_LINES:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for line in REPORT_LINES:
            terminalreporter.write_line(line)
