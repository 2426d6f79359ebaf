def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    from hyperconv.acceptance import format_line

    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        terminalreporter.write_line(format_line(results[number]))
    passed = sum(r.passed for r in results.values())
    terminalreporter.write_line(f"{passed}/{len(results)} criteria passed")
