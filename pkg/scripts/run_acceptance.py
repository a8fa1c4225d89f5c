"""Run the acceptance suite and show one PASS/FAIL line per criterion."""

import sys
from pathlib import Path

import pytest

ROOT = Path(__file__).resolve().parent.parent

if __name__ == "__main__":
    sys.exit(pytest.main([str(ROOT / "tests" / "test_acceptance.py"), "-m", "acceptance", "-q", "-s",
                          *sys.argv[1:]]))
