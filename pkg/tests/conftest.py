import pytest

# filled by tests/test_acceptance.py, reported at the end of the run
ACCEPTANCE_RESULTS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[n].line())
    passed = sum(r.passed for r in ACCEPTANCE_RESULTS.values())
    terminalreporter.write_line(f"{passed}/{len(ACCEPTANCE_RESULTS)} criteria pass")


@pytest.fixture(scope="session")
def acceptance_results():
    from ssmlevy.acceptance import run_suite

    results = run_suite(echo=None)
    ACCEPTANCE_RESULTS.update({r.number: r for r in results})
    return ACCEPTANCE_RESULTS
