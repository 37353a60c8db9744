"""Print one PASS/FAIL line per acceptance criterion (exit 1 if any fail).

    python3 scripts/acceptance_report.py
"""

import runpy
import sys
from pathlib import Path

TESTS = Path(__file__).resolve().parents[1] / "tests"

if __name__ == "__main__":
    sys.path.insert(0, str(TESTS))
    runpy.run_path(str(TESTS / "test_acceptance.py"), run_name="__main__")
