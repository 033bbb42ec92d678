"""Heights of prime certificate trees.

The certificate tree of a prime p hangs the trees of the distinct prime
factors of p - 1 below p, bottoming out at 2.  Its height grows like
e log log p with a negative (3/2) log log log p correction; the trivial
bound H(p) <= log2(p) + 1 always holds.  This script surveys a window of
primes and tabulates the centered error.
"""

import math

from pdbrw.pratt import (build_pratt, height_bound, pratt_survey,
                         survey_summary)

tree = build_pratt(1000003)
print(f"p = 1000003: height {tree.height}, {tree.size} nodes, "
      f"children {[c.p for c in tree.children]}")

records = list(pratt_survey(10 ** 6, 10 ** 6 + 20000))
print(f"\nsurveyed {len(records)} primes in [1e6, 1e6 + 2e4]")
print(f"all within the log2 bound: "
      f"{all(r.height <= height_bound(r.p) for r in records)}")

summary = survey_summary(records)
q = summary["error_loglog_quantiles"]
print("centered error quantiles: "
      + ", ".join(f"{k}: {v:+.2f}" for k, v in q.items()))
print("exceedance of the loglog-centered error:")
for z, frac in summary["exceedance"].items():
    print(f"  P(E >= {z}) = {frac:.4f}")

heights = {}
for r in records:
    heights[r.height] = heights.get(r.height, 0) + 1
center = math.e * math.log(math.log(10 ** 6))
print(f"\nheight histogram (centering ~ {center:.2f}):")
for h in sorted(heights):
    print(f"  H = {h:2d}: {heights[h]:5d}")
