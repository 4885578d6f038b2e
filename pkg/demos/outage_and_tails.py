"""Outage probability and the lower tail of the uncovered count.

Part 1: below ln(m)/n some message is almost surely held by nobody and the
workload cannot finish at all; the Monte Carlo fraction tracks the exact
closed form 1 - (1 - (1-p)^n)^m.

Part 2: the minimum uncovered count Y moves by at most one when a single
node is added or removed, so its lower tail obeys
P(E[Y] - Y >= a) <= exp(-a^2/2n); the empirical tails sit far below it.
"""

import math

from flexshuffle import (
    expected_nowhere_covered,
    mc_outage,
    mc_uncovered,
    missing_message_prob,
    outage_threshold,
)

print("=" * 64)
print("PART 1: outage")
print("=" * 64)
for m, n in ((10, 20), (30, 40), (80, 60)):
    p_out = outage_threshold(m, n)
    print(f"m={m} n={n}: outage threshold ln(m)/n = {p_out:.4f}")
    for mult in (0.5, 1.0, 2.0, 4.0):
        p = min(1.0, mult * p_out)
        est = mc_outage(m, n, p, trials=4000, seed=100 + m)
        exact = missing_message_prob(m, n, p)
        print(
            f"  p = {p:.4f} ({mult}x): simulated {est.fraction:.4f} "
            f"[{est.lo:.4f}, {est.hi:.4f}]  exact {exact:.4f}"
        )
    print()

print("=" * 64)
print("PART 2: concentration of the uncovered count")
print("=" * 64)
M, N, K, D, P, TRIALS = 150, 100, 50, 1, 0.05, 4000
stats = mc_uncovered(M, N, K, D, P, trials=TRIALS, seed=17)
exact = expected_nowhere_covered(N, K, P)
print(f"n={N} K={K} d={D} p={P}, {TRIALS} trials")
print(f"  sample mean Y = {stats.mean.mean:.3f} +- {stats.mean.halfwidth:.3f}")
print(f"  exact E[#functions covered nowhere] = K(1-p^2)^n = {exact:.3f}")
print()
print(f"{'a':>5} {'P(mean - Y >= a)':>18} {'bound exp(-a^2/2n)':>20}")
for check in stats.tails:
    se = math.sqrt(check.empirical * (1 - check.empirical) / TRIALS)
    print(
        f"{check.deviation:>5.0f} {check.empirical:>14.4f} +-{3 * se:.4f} "
        f"{check.bound:>17.4f}"
    )
