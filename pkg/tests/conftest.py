import json
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).resolve().parent
sys.path.insert(0, str(HERE))


@pytest.fixture(scope="session")
def frozen():
    """Oracle values computed once by scripts/freeze_oracles.py."""
    return json.loads((HERE / "data" / "oracle_values.json").read_text())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.REPORT:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(mod.REPORT):
        terminalreporter.write_line(mod.REPORT[k])
