#!/usr/bin/env python3
"""Regenerate the synthetic knee fixture bundled with the tests."""

import sys
from pathlib import Path

from bigeo.cli import main

OUT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "knee"

if __name__ == "__main__":
    sys.exit(main(["knee-fixture", "--out", str(OUT), "--per-grade", "6", "--vertices", "100", "--seed", "0"]))
