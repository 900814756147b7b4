import os
from collections import OrderedDict

import pytest

from dsppack import presets

CRITERIA = OrderedDict([
    (1, "aggregate error metrics of all packing schemes (exhaustive, 65536 tuples)"),
    (2, "per-lane error metrics for INT4 and MR delta=-2"),
    (3, "packing densities of the presets"),
    (4, "overpacking worked example, bit-exact"),
    (5, "oracle equivalence: full correction and physical vs ideal"),
    (6, "floor bias: naive error in {-1, 0}, lane 0 exact"),
    (7, "accumulation bound for INT4, chains up to 8"),
    (8, "addition packing carry properties"),
    (9, "determinism and parallel merge"),
])

_outcomes: dict[int, list[tuple[str, str]]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


def pytest_runtest_logreport(report):
    crit = getattr(report, "criterion", None)
    if crit is None:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _outcomes.setdefault(crit, []).append((report.nodeid, report.outcome))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = marker.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n, title in CRITERIA.items():
        results = _outcomes.get(n)
        if not results:
            tr.write_line(f"criterion {n}: NOT RUN  {title}")
            continue
        failed = [nid.split("::")[-1] for nid, out in results if out != "passed"]
        verdict = "PASS" if not failed else "FAIL"
        line = f"criterion {n}: {verdict}  {title} ({len(results) - len(failed)}/{len(results)} checks)"
        tr.write_line(line)
        for nid in failed:
            tr.write_line(f"    failed: {nid}")


@pytest.fixture(scope="session")
def int4():
    return presets.preset("int4")


@pytest.fixture(scope="session")
def fig8():
    return presets.preset("fig8-overpack-delta-2")


@pytest.fixture(autouse=True, scope="session")
def _quiet_threads():
    # keep thread counts predictable on shared CI machines
    os.environ.setdefault("DSPPACK_THREADS", "4")
    yield
