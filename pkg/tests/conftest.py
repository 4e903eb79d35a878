from hypothesis import settings

settings.register_profile("sfwm", deadline=None, max_examples=40, derandomize=True, print_blob=True)
settings.load_profile("sfwm")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance report")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
