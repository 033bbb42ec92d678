"""Random recursive trees, grown directly and extracted from the walk.

The m lowest-displacement nodes of the Poisson-weighted tree, relabelled by
rank, form a random recursive tree: each new node attaches to a uniformly
random earlier one.  This script grows trees both ways, compares the height
laws, and checks the displacement of the m-th lowest node against its
harmonic-number mean and exponential upper tail.
"""

import math

import numpy as np
from scipy import stats as sps

from pdbrw import analytics, engine, fastbrw, trees
from pdbrw.rng import RngStream

SEED = 21

# height law comparison at m = 64
REPS = 2000
direct = np.array([trees.build_rrt(64, RngStream(SEED, r)).height
                   for r in range(REPS)])
extracted = np.array([trees.rrt_from_pwit(64, RngStream(SEED + 1, r)).height
                      for r in range(REPS)])
stat, p = sps.ks_2samp(direct, extracted)
print(f"heights at m=64: direct mean {direct.mean():.3f}, "
      f"extracted mean {extracted.mean():.3f}, KS p = {p:.3f}")

# displacement of the 50th lowest node
m = 50
target = analytics.har(m - 1)
disp = np.empty(500)
for r in range(500):
    disp[r] = engine.lowest_m(m, "pwit", RngStream(SEED + 2, r))[-1].displacement
se = disp.std(ddof=1) / math.sqrt(len(disp))
print(f"\nE S(w_{m}) = {disp.mean():.3f} +- {se:.3f}, "
      f"har({m - 1}) = {target:.3f}")
for x in (1.0, 2.0, 3.0):
    freq = float(np.mean(disp >= target + x))
    print(f"P(S >= har + {x:.0f}) = {freq:.4f} <= e^-{x:.0f} = "
          f"{math.exp(-x):.4f}")

# mean height against the e log m - (3/2) log log m centering
print("\nmean height vs centering:")
for m in (64, 256, 1024, 4096):
    keys = fastbrw.replicate_keys(SEED + 3, f"h/{m}", 1000)
    h = fastbrw.rrt_height_batch(m, keys)
    print(f"  m={m:5d}: mean {h.mean():7.3f}, centering "
          f"{trees.height_centering(m):7.3f}, residual "
          f"{h.mean() - trees.height_centering(m):+.3f}")
