import math

import pytest

from khmgof.families import parse_family

SPECS = ["normal", "logistic", "laplace:1", f"laplace:{math.sqrt(2.0)!r}", "t:3", "t:1"]

CRITERIA = {
    1: "identity H = K(., H) on the 50-point grid",
    2: "closed-form information matrix diagnostics",
    3: "fast transform vs direct double-integral oracle",
    4: "null distribution of W (KS distance and size)",
    5: "power table under the Laplace mixture",
    6: "bridge divergence ratio",
    7: "sup|BM| series vs Monte Carlo oracle",
    8: "scale-estimated statistic size",
    9: "property suite and Monte Carlo invariants",
}

_outcomes = {}
_measured = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(k): acceptance criterion this test decides")


@pytest.fixture(params=SPECS)
def family(request):
    return parse_family(request.param)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    for k in getattr(report, "criteria", ()):
        prev = _outcomes.get(k, True)
        _outcomes[k] = prev and report.outcome == "passed"
        for name, value in report.user_properties:
            if name == "measured":
                _measured.setdefault(k, []).append(str(value))


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criteria = tuple(m.args[0] for m in item.iter_markers("criterion"))


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for k in sorted(CRITERIA):
        if k not in _outcomes:
            continue
        status = "PASS" if _outcomes[k] else "FAIL"
        detail = "; ".join(_measured.get(k, ()))
        tr.write_line(f"criterion {k}: {status}  {CRITERIA[k]}" + (f"  [{detail}]" if detail else ""))
