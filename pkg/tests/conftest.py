from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from linat import config

settings.register_profile(
    "repo",
    deadline=None,
    max_examples=60,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repo")

CORPUS = Path(__file__).parent / "corpus"

_criteria: dict[int, tuple[str, str]] = {}


@pytest.fixture
def corpus() -> Path:
    return CORPUS


@pytest.fixture(autouse=True)
def _default_caps():
    saved = config.get_caps()
    yield
    config.set_caps(saved)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    num, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _criteria[num] = ("PASS" if rep.passed else "FAIL", title)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_criteria):
        verdict, title = _criteria[num]
        terminalreporter.write_line(f"criterion {num}: {verdict}  {title}")
