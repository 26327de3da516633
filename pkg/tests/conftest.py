import pytest

from hfplus import homology


@pytest.fixture(autouse=True)
def _self_check(request):
    """Run every unit test with the expensive algebra checks enabled.

    The acceptance sweep opts out (module marker) so the full slope grid
    stays inside its time budget; its correctness is covered by the
    independent oracles instead.
    """
    if request.node.get_closest_marker("no_self_check"):
        yield
        return
    old = homology.SELF_CHECK
    homology.SELF_CHECK = True
    yield
    homology.SELF_CHECK = old


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "no_self_check: skip redundant internal verification")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from helpers import ACCEPTANCE_LABELS, ACCEPTANCE_RESULTS
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_LABELS):
        label = ACCEPTANCE_LABELS[num]
        if num not in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(f"  criterion {num:2d}: not run "
                                        f"-- {label}")
            continue
        passed, failures = ACCEPTANCE_RESULTS[num]
        mark = "PASS" if passed else "FAIL"
        line = f"  criterion {num:2d}: {mark} -- {label}"
        if failures:
            line += f"  [{failures[0]}]"
        terminalreporter.write_line(line)
