#!/usr/bin/env python3
"""Distribution of the untranslated Riemannian R^2 over many seeds.

Usage: python scripts/r2_seed_sweep.py [n_seeds]
"""

import sys

import numpy as np

from bigeo import experiments as ex
from bigeo import riemannian as rm
from bigeo.lie import BranchCutError

n = int(sys.argv[1]) if len(sys.argv) > 1 else 100
r2 = []
for seed in range(n):
    data, _ = ex.make_dataset(ex.SynthConfig(seed=seed, connection="LeviCivita"))
    try:
        r2.append(rm.r_squared(data, rm.fit_riemannian(data).params))
    except BranchCutError:
        r2.append(np.nan)
r2 = np.array(r2)
ok = r2[~np.isnan(r2)]
print(f"{n} seeds, {np.isnan(r2).sum()} aborted at the branch cut")
print(f"median {np.median(ok):.3f}, 10th pct {np.percentile(ok, 10):.3f}, fraction < 0.9: {np.mean(ok < 0.9):.3f}")
print("seeds 0-9:", " ".join(f"{v:.3f}" for v in r2[:10]))
