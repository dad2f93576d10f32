"""Collects acceptance-test outcomes and prints one line per criterion."""

from collections import OrderedDict

_CRITERIA = OrderedDict()


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            number, title = marker.args
            _CRITERIA.setdefault(number, {"title": title, "outcomes": {}})
            _CRITERIA[number]["outcomes"][item.nodeid] = None


def pytest_runtest_logreport(report):
    for entry in _CRITERIA.values():
        outcomes = entry["outcomes"]
        if report.nodeid not in outcomes:
            continue
        if report.when == "call" or report.failed or report.skipped:
            if outcomes[report.nodeid] in (None, "passed"):
                outcomes[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, entry in sorted(_CRITERIA.items()):
        results = list(entry["outcomes"].values())
        if all(r == "passed" for r in results):
            verdict = "PASS"
        elif any(r == "failed" for r in results):
            verdict = "FAIL"
        else:
            verdict = "NOT RUN"
        terminalreporter.write_line(
            f"ACCEPTANCE {number} ({entry['title']}): {verdict} "
            f"[{results.count('passed')}/{len(results)} checks]"
        )
