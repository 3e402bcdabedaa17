import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

# criterion number -> {"desc", "tol", "outcomes": [(nodeid, outcome)]}
_ACCEPTANCE = {}


def pytest_addoption(parser):
    parser.addoption("--long", action="store_true", default=False,
                     help="also run the slow tier (n=8 counts, full scans, long censuses)")


def pytest_configure(config):
    config.addinivalue_line("markers", "long: slow test, runs only with --long")
    config.addinivalue_line("markers", "criterion(k, desc, tol): acceptance criterion k")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--long"):
        return
    skip = pytest.mark.skip(reason="slow tier; pass --long")
    for item in items:
        if "long" in item.keywords:
            item.add_marker(skip)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    k = mark.args[0]
    entry = _ACCEPTANCE.setdefault(k, {"desc": mark.kwargs.get("desc", ""),
                                       "tol": mark.kwargs.get("tol", "exact"),
                                       "outcomes": []})
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        entry["outcomes"].append((item.nodeid, rep.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        e = _ACCEPTANCE[k]
        results = [o for _, o in e["outcomes"]]
        ran = [o for o in results if o != "skipped"]
        if not ran:
            status = "SKIP"
        elif all(o == "passed" for o in ran):
            status = "PASS"
        else:
            status = "FAIL"
        extra = ""
        skipped = len(results) - len(ran)
        if skipped and ran:
            extra = f" ({skipped} long part(s) not run)"
        tr.write_line(f"criterion {k:2d}: {status}  [{e['tol']}] {e['desc']}{extra}")


@pytest.fixture(scope="session")
def scan73():
    """Phase-1 normals scan of the (7,3) topology, shared across modules."""
    from sttlp.normals import scan
    from sttlp.topology import catalog_topology
    return scan(catalog_topology("U_7_3"))
