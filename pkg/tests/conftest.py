import pytest

CRITERIA = {
    1: "pdiv tuples, graph, usable terms and usable rules match the golden files",
    2: "exact lifting of rw from g(0) gives 0, 1/2, 1/2, 5/8",
    3: "direct AST criterion on rw, incompl and r2",
    4: "DP framework proves pdiv, r1p, r2p, qs and gives up on bogo, incompl",
    5: "classic DP framework proves div and gives up on a -> a",
    6: "probability removal agrees with the classic framework",
    7: "soundness property suites",
    8: "simulation converges to the fixpoint oracle",
    9: "linear reduction pair for triple needs s-coefficient 3",
    10: "loop: direct criterion fails on the loop rule, DP framework succeeds",
}

_outcomes: dict[int, list[bool]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion checked by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m is None:
        return
    if rep.when == "call":
        _outcomes.setdefault(m.args[0], []).append(rep.passed)
    elif rep.failed or rep.skipped:
        _outcomes.setdefault(m.args[0], []).append(False)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    tr = terminalreporter
    tr.write_sep("=", "acceptance criteria")
    for n, text in CRITERIA.items():
        results = _outcomes.get(n)
        if results is None:
            status = "NOT RUN"
        else:
            status = "PASS" if all(results) else "FAIL"
        tr.write_line(f"AC{n:<2} {status:<7} {text} ({len(results or [])} checks)")
