"""Percolation of the no-communication property in the allocation probability.

Sweeping p across sqrt(ln(K)/n) shows the probability that a flexible
assignment needs zero communication jumping from ~0 to ~1, while the mean
number of uncovered functions collapses.
"""

from flexshuffle import no_shuffle_threshold, sweep, sweep_to_csv

M, N, K, D = 120, 120, 60, 2
TRIALS = 150
SEED = 7

pth = no_shuffle_threshold(N, K)
print(f"m={M} n={N} K={K} d={D}, threshold = sqrt(ln({K})/{N}) = {pth:.4f}")
print()

multipliers = [0.2, 0.5, 0.8, 1.0, 1.3, 1.8, 2.5, 3.5, 5.0]
p_values = [round(mult * pth, 4) for mult in multipliers]
points = sweep([(M, N, K, D)], p_values, trials=TRIALS, seed=SEED)

print(f"{'p':>8} {'p/pth':>6} {'no-shuffle':>11} {'mean uncovered':>15}")
for mult, pt in zip(multipliers, points):
    bar = "#" * round(40 * pt.no_shuffle_fraction)
    print(
        f"{pt.p:>8.4f} {mult:>6.1f} {pt.no_shuffle_fraction:>11.3f} "
        f"{pt.mean_uncovered:>15.2f}  {bar}"
    )

print()
print("CSV of the same sweep:")
print(sweep_to_csv(points))
