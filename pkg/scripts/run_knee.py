#!/usr/bin/env python3
"""Fit the knee geodesic for a manifest and print the per-grade joint distance.

Usage: python scripts/run_knee.py [manifest.json]
Defaults to the bundled synthetic fixture.
"""

import sys
from pathlib import Path

from bigeo.io import load_manifest
from bigeo.knee import knee_regression

DEFAULT = Path(__file__).resolve().parents[1] / "tests" / "fixtures" / "knee" / "manifest.json"


def main(argv):
    manifest = Path(argv[0]) if argv else DEFAULT
    records = load_manifest(manifest)
    rows, res = knee_regression(records)
    print(f"{len(records)} subjects, converged={res.converged} after {res.iterations} iterations")
    print("grade      t   |x| (mm)")
    for r in rows:
        print(f"{r.grade:5d}  {r.t:5.2f}   {r.translational_norm:8.3f}")


if __name__ == "__main__":
    main(sys.argv[1:])
