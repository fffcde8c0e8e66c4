import functools

import numpy as np
import pytest

from safeadmit import load_bundled, precheck, run_scenario


@functools.lru_cache(maxsize=None)
def bundled(name):
    return load_bundled(name)


_RUNS = {}


def cached_run(name, **changes):
    """Run a bundled config with overrides once per session, keyed by their repr."""
    key = (name, repr(sorted(changes.items())))
    if key not in _RUNS:
        s = bundled(name)
        if changes:
            s = s.with_(**changes)
        _RUNS[key] = run_scenario(s, precheck(s))
    return _RUNS[key]


_RESULTS = {}


def record(criterion, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'}  {criterion}: {detail}"
    _RESULTS[criterion] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(_RESULTS, key=lambda k: int(k.split()[0][1:])):
            terminalreporter.write_line(_RESULTS[key])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def nominal_scenario():
    return bundled("two_link_paper.cfg")


@pytest.fixture(scope="session")
def comparison_scenario():
    return bundled("two_link_comparison.cfg")


@pytest.fixture(scope="session")
def single_link_scenario():
    return bundled("single_link_hw.cfg")
