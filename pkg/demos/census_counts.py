"""Counting generation-n nodes below a displacement budget.

The number of generation-n nodes whose total displacement stays below x has
mean x^n/n! under both child-displacement models, even though the two trees
look nothing alike locally.  This script checks that numerically and also
splits the count by path weight, comparing against the exact combinatorial
count of weight vectors times the probability weight.
"""

import math

from pdbrw import analytics, fastbrw
from pdbrw.analytics import LevelClass, count_tnk_exact

REPS = 20000
SEED = 42

for model in ("pwit", "pd"):
    print(f"--- {model} ---")
    for n, x in ((3, 1.5), (5, 2.0), (8, 3.0)):
        keys = fastbrw.replicate_keys(SEED, f"demo/{model}/{n}", REPS)
        levels, _ = fastbrw.census_batch(n, x, model, keys)
        mean = levels[:, n].mean()
        se = levels[:, n].std(ddof=1) / math.sqrt(REPS)
        target = analytics.expected_tn(n, x).linear()
        print(f"n={n} x={x}: mean count {mean:.4f} +- {se:.4f}, "
              f"expected x^n/n! = {target:.4f}")

# per-weight decomposition at n=3, x=1.5: the mean number of nodes in the
# weight class n+k is the integral of the class density f_nk up to x
print("--- weight decomposition, pwit, n=3, x=1.5 ---")
n, x = 3, 1.5
keys = fastbrw.replicate_keys(SEED, "demo/decomp", REPS)
_, khist = fastbrw.census_batch(n, x, "pwit", keys)
for k in range(5):
    count = count_tnk_exact(LevelClass(n, k))
    expected = analytics.f_nk_integral(LevelClass(n, k), x)
    observed = khist[:, k].mean()
    print(f"k={k}: {count:3d} vectors, expected {expected:.5f}, "
          f"observed {observed:.5f}")

total = sum(analytics.f_nk_integral(LevelClass(n, k), x)
            for k in range(60))
print(f"sum over k: {total:.6f} = x^n/n! = {x ** n / math.factorial(n):.6f}")
