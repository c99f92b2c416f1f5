"""Shared pytest wiring: the acceptance checklist summary."""

import sys


def pytest_terminal_summary(terminalreporter):
    # find the already-imported acceptance module (its import name
    # depends on pytest's import mode) instead of importing a copy
    for name, mod in list(sys.modules.items()):
        if name.rpartition(".")[2] == "test_acceptance":
            lines = getattr(mod, "CHECKLIST", None)
            if lines:
                terminalreporter.section("acceptance checklist")
                for line in lines:
                    terminalreporter.write_line(line)
            return
