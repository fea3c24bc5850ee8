import numpy as np
import pytest

from medkg.synthetic import SyntheticSpec, generate

# ~200-triple social graph shared by the slower tests
FIXTURE_SPEC = SyntheticSpec(
    n_users=30, n_tweets=20, mean_degree=4, likes_per_user=1.8, n_new_users=1, seed=0
)


@pytest.fixture(scope="session")
def social_graph():
    return generate(FIXTURE_SPEC)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, title, detail in sorted(RESULTS):
        terminalreporter.write_line(f"{verdict:<6} criterion {number}: {title}  {detail}")
