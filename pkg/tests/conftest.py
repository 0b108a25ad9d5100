import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


def random_small_dataset(seed, n_max=200, d_max=5, k_max=3):
    """Gaussian blobs with class-dependent shifts and a few duplicated values."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(20, n_max + 1))
    d = int(rng.integers(1, d_max + 1))
    k = int(rng.integers(2, k_max + 1))
    y = rng.integers(0, k, size=n)
    y[:k] = np.arange(k)  # every class present
    X = rng.standard_normal((n, d)) + rng.normal(0, 1.5, size=(k, d))[y]
    if seed % 3 == 0:
        X = np.round(X, 1)  # ties in feature values
    return X, y, k


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# -- acceptance reporting -----------------------------------------------------------
# Tests marked ``criterion(n)`` contribute to one PASS/FAIL line per criterion,
# printed at the end of the session. Details come from ``record_property("detail", ...)``.

_CRITERIA = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or rep.when not in ("setup", "call"):
        return
    if rep.when == "setup" and rep.passed:
        return
    entry = _CRITERIA.setdefault(mark.args[0], {"ok": True, "details": [], "title": mark.kwargs.get("title", "")})
    entry["ok"] &= rep.passed
    entry["details"] += [str(v) for k, v in item.user_properties if k == "detail"]
    if not rep.passed:
        msg = str(rep.longrepr.reprcrash.message) if hasattr(rep.longrepr, "reprcrash") else str(rep.longrepr)
        entry["details"].append(msg.splitlines()[0][:160])


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        e = _CRITERIA[n]
        status = "PASS" if e["ok"] else "FAIL"
        line = f"criterion {n:>2} {status}  {e['title']}"
        if e["details"]:
            line += "  | " + "; ".join(e["details"])
        terminalreporter.write_line(line)
