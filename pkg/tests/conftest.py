import sys
from pathlib import Path

# lets test modules import the search helpers that live next to them
sys.path.insert(0, str(Path(__file__).parent))

# criterion number -> (passed, detail), filled in by the acceptance suite
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num}: {'PASS' if passed else 'FAIL'} - {detail}")
