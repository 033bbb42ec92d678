"""Cycle-lemma structure of conditioned random walks.

Take a walk of n grouped-exponential increments conditioned on its endpoint.
Among its n rotations exactly one is "leading" (stays above the chord), so
by exchangeability the walk itself is leading with probability exactly 1/n.
Both facts are checked by direct simulation.
"""

from pdbrw import walks
from pdbrw.rng import RngStream

SEED = 3
REPS = 20000
params = walks.EventParams(0.0)

print("probability of the leading event (target 1/n):")
for n in (2, 5, 10, 20):
    k = (n + 1) // 2
    est = walks.estimate_event_prob(n, k, float(n + k), params,
                                    lambda f: f.leading, REPS,
                                    RngStream(SEED, n))
    z = (est.probability - 1 / n) / est.standard_error
    print(f"  n={n:2d}: {est.probability:.4f} "
          f"(wilson [{est.wilson_low:.4f},{est.wilson_high:.4f}], "
          f"z={z:+.2f})")

print("\nrotation uniqueness over", REPS, "walks (n=10, k=4):")
rng = RngStream(SEED, 999)
counts = {0: 0, 1: 0, 2: 0}
for _ in range(REPS):
    w = walks.sample_walk(10, 4, rng)
    leading = sum(walks.event_flags(r, params).leading
                  for r in walks.rotations(w))
    counts[min(leading, 2)] = counts.get(min(leading, 2), 0) + 1
print(f"  walks with exactly one leading rotation: {counts[1]}/{REPS}")
print(f"  walks with zero or several: {counts[0] + counts[2]}")

# the same machinery reports trailing and dip events; with a positive
# slack both tails of the chord condition open up
loose = walks.EventParams(0.8)
w = walks.sample_walk(10, 4, RngStream(SEED, 1234))
flags = walks.event_flags(w, loose)
print(f"\none walk with slack 0.8: leading={flags.leading} "
      f"trailing={flags.trailing}")
