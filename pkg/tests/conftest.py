import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from risemf.config import ScenarioConfig

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def short_config():
    """Default desk scenario with a short horizon."""
    return ScenarioConfig().with_overrides({"run.horizon": 400, "run.warmup": 40})


ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """``log(k, ok, detail)`` records the verdict line for acceptance criterion ``k``."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def log(k, ok, detail):
        lines[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
        return ok
    return log


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])
