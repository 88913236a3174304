import numpy as np
import pytest

from qencbench import _core, _pykernels

try:
    from qencbench import _ckernels
except ImportError:
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

_criteria = {}
_details = {}


@pytest.fixture(params=sorted(BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per kernel backend."""
    impl = BACKENDS[request.param]
    for name in ("phase_diagonal", "anneal", "smo"):
        monkeypatch.setattr(_core, name, getattr(impl, name))
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marks = list(item.iter_markers("criterion"))
    if not marks or (report.when != "call" and not report.failed):
        return
    for m in marks:
        n = int(m.args[0])
        _criteria[n] = _criteria.get(n, True) and report.passed
        seen = _details.setdefault(n, [])
        for key, value in item.user_properties:
            if key == "detail" and value not in seen:
                seen.append(value)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        line = f"criterion {n}: {'PASS' if _criteria[n] else 'FAIL'}"
        if _details.get(n):
            line += "  [" + "; ".join(_details[n]) + "]"
        terminalreporter.write_line(line)
