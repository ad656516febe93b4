import numpy as np
import pytest

from adjviz.ranking import kendall_tau_fast

_RESULTS = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(name): exit criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _RESULTS.append((marker.args[0], report.outcome, report.duration))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome, duration in _RESULTS:
        verdict = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict}  {name}  ({duration:.2f} s)")


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    # compile (or load cached) kernels once so timings measure steady state
    kendall_tau_fast([1.0, 2.0, 2.0], [3.0, 1.0, 2.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20210610)


def write_score_file(path, trials, scores):
    with open(path, "w", encoding="utf-8") as fh:
        for t, s in zip(trials, scores):
            fh.write(f"{t}\t{float(s)!r}\n")
    return path


def write_pairs(path, mapping):
    with open(path, "w", encoding="utf-8") as fh:
        for k, v in mapping.items():
            fh.write(f"{k}\t{v}\n")
    return path
