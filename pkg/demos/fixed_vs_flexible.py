"""What does choosing the assignment after seeing the placement buy?

A fixed scheme designates nodes per function before the data lands; a
flexible scheme picks the assignment afterwards via maximum matching.  At
equal p the flexible no-communication probability dominates, and in the wide
middle band of p the fixed scheme still needs about 2K(1-p) raw broadcasts
while the flexible one needs none.

Also shown: the expected transmission count for the fixed scheme.  A
plausible-looking derivation gives K(2-2p+p^2), but it prices the
one-missing-input case at 1-(1-p)^2 instead of 2p(1-p); simulation sides
with 2K(1-p), the two differing by exactly K*p^2.
"""

from flexshuffle import (
    expected_fixed_uncoded,
    fixed_assignment_threshold,
    mc_fixed_uncoded,
    no_shuffle_threshold,
    sweep,
)

M, N, K, D = 80, 80, 40, 2
TRIALS = 200

print(f"m={M} n={N} K={K} d={D}, {TRIALS} trials per point")
print(f"flexible threshold sqrt(ln K / n)   = {no_shuffle_threshold(N, K):.4f}")
print(f"fixed threshold 1 - (ln K / K)^(1/C) = {fixed_assignment_threshold(K, 1):.4f} (C=1)")
print()

p_values = [0.1, 0.3, 0.5, 0.7, 0.85, 0.95, 0.99]
points = sweep([(M, N, K, D)], p_values, trials=TRIALS, seed=23, compare_fixed=True)

print(f"{'p':>6} {'flexible no-shuffle':>20} {'fixed no-shuffle':>18} {'fixed mean tx':>14}")
for pt in points:
    print(
        f"{pt.p:>6.2f} {pt.no_shuffle_fraction:>20.3f} "
        f"{pt.fixed_no_shuffle_fraction:>18.3f} {pt.fixed_mean_uncoded:>14.2f}"
    )

print()
print("expected fixed transmissions, K=100: simulation arbitrates the formulas")
print(f"{'p':>6} {'simulated':>12} {'2K(1-p)':>10} {'K(2-2p+p^2)':>12}")
for p in (0.25, 0.5, 0.75):
    est = mc_fixed_uncoded(100, p, trials=10_000, seed=31)
    expect = expected_fixed_uncoded(100, p)
    print(
        f"{p:>6.2f} {est.mean:>8.2f} +-{3 * est.se:.2f} "
        f"{expect.mean:>10.1f} {expect.miscounted_mean:>12.1f}"
    )
print()
print("the miscounted value overshoots by K*p^2; the clean count matches.")
