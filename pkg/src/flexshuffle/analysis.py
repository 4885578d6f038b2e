"""Closed-form thresholds and seeded Monte Carlo estimators.

All logarithms are natural.  Every estimator derives the RNG stream of
trial t from (master seed, t), so results do not depend on execution order
or on how many worker threads evaluate the trials.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from .coverage import build_coverage_graph, hopcroft_karp
from .instance import Instance, generate_functions, generate_placement
from .shuffle import greedy_raw_broadcasts, missing_messages

Z95 = 1.959963984540054  # two-sided 95% normal quantile


@dataclass(frozen=True)
class ProportionEstimate:
    fraction: float
    lo: float
    hi: float
    trials: int

    @property
    def halfwidth(self) -> float:
        return (self.hi - self.lo) / 2.0

    @property
    def se(self) -> float:
        return math.sqrt(self.fraction * (1.0 - self.fraction) / self.trials)


@dataclass(frozen=True)
class MeanEstimate:
    mean: float
    se: float
    trials: int

    @property
    def halfwidth(self) -> float:
        return Z95 * self.se


@dataclass(frozen=True)
class TailCheck:
    """Empirical lower-tail probability versus the bounded-difference bound."""

    deviation: float
    empirical: float
    bound: float


def wilson_interval(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _proportion(successes: int, trials: int) -> ProportionEstimate:
    lo, hi = wilson_interval(successes, trials)
    return ProportionEstimate(fraction=successes / trials, lo=lo, hi=hi, trials=trials)


def _mean(values) -> MeanEstimate:
    arr = np.asarray(values, dtype=float)
    se = float(arr.std(ddof=1) / math.sqrt(len(arr))) if len(arr) > 1 else 0.0
    return MeanEstimate(mean=float(arr.mean()), se=se, trials=len(arr))


# ---------------------------------------------------------------------------
# Closed forms


def no_shuffle_threshold(n: int, K: int) -> float:
    """Allocation probability sqrt(ln(K)/n) above which a flexible
    assignment almost surely needs no communication, clamped to <= 1."""
    if K < 2:
        raise ValueError(f"threshold needs K >= 2, got {K}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return min(1.0, math.sqrt(math.log(K) / n))


def outage_threshold(m: int, n: int) -> float:
    """Allocation probability ln(m)/n below which some message is almost
    surely held by nobody, clamped to <= 1."""
    if m < 2:
        raise ValueError(f"outage threshold needs m >= 2, got {m}")
    return min(1.0, math.log(m) / n)


def missing_message_prob(m: int, n: int, p: float) -> float:
    """Exact probability that at least one of m messages is held by no
    node: 1 - (1 - (1-p)^n)^m."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return 1.0 - (1.0 - (1.0 - p) ** n) ** m


def fixed_assignment_threshold(K: int, nodes_per_function: float) -> float:
    """Threshold 1 - (ln(K)/K)^(1/C) for pre-placed assignments averaging
    C nodes per function."""
    if K < 2:
        raise ValueError(f"threshold needs K >= 2, got {K}")
    if nodes_per_function < 1:
        raise ValueError("need at least one node per function")
    ratio = math.log(K) / K
    if ratio >= 1.0:
        raise ValueError(f"K={K} is outside the threshold's regime")
    return 1.0 - ratio ** (1.0 / nodes_per_function)


def expected_nowhere_covered(n: int, K: int, p: float) -> float:
    """Exact expected number of functions no single node can compute:
    K(1-p^2)^n."""
    return K * (1.0 - p * p) ** n


def no_shuffle_failure_bound(n: int, K: int, p: float) -> float:
    """Union bound K(1-p^2)^(n-K) on the probability that some function
    stays uncovered under the best flexible assignment (needs K <= n/2 for
    the regime it was derived in)."""
    return min(1.0, K * (1.0 - p * p) ** (n - K))


def azuma_bound(n: int, deviation: float) -> float:
    """exp(-a^2 / 2n): lower-tail bound for a 1-Lipschitz function of n
    independently exposed nodes."""
    if deviation <= 0:
        raise ValueError("deviation must be positive")
    return math.exp(-deviation * deviation / (2.0 * n))


@dataclass(frozen=True)
class FixedUncodedExpectation:
    """Expected uncoded transmissions when one pre-placed node serves each
    function.

    ``mean`` is the operational value 2K(1-p).  ``miscounted_mean`` is the
    often-quoted K(2-2p+p^2), which prices the one-missing case at
    1-(1-p)^2 instead of 2p(1-p); the two disagree by K*p^2.
    """

    mean: float
    miscounted_mean: float

    @property
    def discrepancy(self) -> float:
        return self.miscounted_mean - self.mean


def expected_fixed_uncoded(K: int, p: float) -> FixedUncodedExpectation:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"p must lie in [0, 1], got {p}")
    return FixedUncodedExpectation(
        mean=2.0 * K * (1.0 - p),
        miscounted_mean=K * (2.0 - 2.0 * p + p * p),
    )


# ---------------------------------------------------------------------------
# Monte Carlo estimators


def _trial_seeds(seed: int, t: int, count: int = 2):
    ss = np.random.SeedSequence((seed, t))
    return [int(s) for s in ss.generate_state(count, np.uint64)]


def _trial_instance(m, n, K, d, p, seed, t) -> Instance:
    pseed, fseed = _trial_seeds(seed, t)
    return Instance(
        placement=generate_placement(m, n, p, pseed),
        workload=generate_functions(m, K, d, fseed),
    )


def _map_trials(fn, trials: int, threads: int) -> list:
    if threads <= 1:
        return [fn(t) for t in range(trials)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(trials)))


def _uncovered(instance: Instance) -> int:
    graph = build_coverage_graph(instance)
    return instance.k - len(hopcroft_karp(graph.adjacency, graph.n_nodes))


def mc_no_shuffle(m, n, K, d, p, trials, seed, threads: int = 1) -> ProportionEstimate:
    """Fraction of random instances where a flexible assignment covers every
    function with zero communication."""

    def trial(t):
        return _uncovered(_trial_instance(m, n, K, d, p, seed, t)) == 0

    results = _map_trials(trial, trials, threads)
    return _proportion(sum(results), trials)


@dataclass(frozen=True)
class UncoveredStats:
    mean: MeanEstimate
    counts: tuple[int, ...]  # histogram of the uncovered count, index = value
    tails: tuple[TailCheck, ...]


def mc_uncovered(
    m, n, K, d, p, trials, seed,
    deviations=(5.0, 10.0, 15.0, 20.0),
    threads: int = 1,
) -> UncoveredStats:
    """Sample statistics of the minimum uncovered-function count.

    Tail checks report P(mean - Y >= a) against exp(-a^2/2n); the sample
    mean stands in for the expectation, so quote them with the Monte Carlo
    standard error.
    """

    def trial(t):
        return _uncovered(_trial_instance(m, n, K, d, p, seed, t))

    ys = np.asarray(_map_trials(trial, trials, threads), dtype=np.int64)
    counts = np.bincount(ys, minlength=K + 1)
    mean = _mean(ys)
    tails = tuple(
        TailCheck(
            deviation=float(a),
            empirical=float(np.mean(mean.mean - ys >= a)),
            bound=azuma_bound(n, float(a)),
        )
        for a in deviations
    )
    return UncoveredStats(mean=mean, counts=tuple(int(c) for c in counts), tails=tails)


def mc_outage(m, n, p, trials, seed, threads: int = 1) -> ProportionEstimate:
    """Fraction of random placements leaving at least one of the m messages
    held by no node; compare with missing_message_prob."""

    def trial(t):
        pseed = _trial_seeds(seed, t, 1)[0]
        placement = generate_placement(m, n, p, pseed)
        held = frozenset().union(*placement.side_info)
        return len(held) < m

    results = _map_trials(trial, trials, threads)
    return _proportion(sum(results), trials)


def mc_fixed_uncoded(K, p, trials, seed, threads: int = 1) -> MeanEstimate:
    """Mean uncoded transmissions when function k is served only by its own
    pre-placed node: per function, 2 minus the inputs that node holds."""

    def trial(t):
        pseed = _trial_seeds(seed, t, 1)[0]
        rng = np.random.default_rng(pseed)
        held = rng.random((K, 2)) < p
        return float((2 - held.sum(axis=1)).sum())

    return _mean(_map_trials(trial, trials, threads))


def fixed_assignment_nodes(K: int, n: int, nodes_per_function: int) -> tuple[tuple[int, ...], ...]:
    """Disjoint pre-placed node groups, function k -> nodes k*C .. k*C+C-1."""
    C = nodes_per_function
    if K * C > n:
        raise ValueError(f"need K*C={K * C} distinct nodes, have n={n}")
    return tuple(tuple(k * C + o for o in range(C)) for k in range(K))


def _fixed_covered(instance: Instance, groups) -> bool:
    side = instance.placement.side_info
    for (j1, j2), nodes in zip(instance.workload.functions, groups):
        if not any(j1 in side[i] and j2 in side[i] for i in nodes):
            return False
    return True


def mc_fixed_no_shuffle(
    m, n, K, d, p, trials, seed, nodes_per_function: int = 1, threads: int = 1
) -> ProportionEstimate:
    """Fraction of instances where every function is covered by one of its
    pre-placed nodes (chosen before the placement is revealed)."""
    groups = fixed_assignment_nodes(K, n, nodes_per_function)

    def trial(t):
        return _fixed_covered(_trial_instance(m, n, K, d, p, seed, t), groups)

    results = _map_trials(trial, trials, threads)
    return _proportion(sum(results), trials)


# ---------------------------------------------------------------------------
# Parameter sweeps


@dataclass(frozen=True)
class SweepPoint:
    m: int
    n: int
    K: int
    d: int
    p: float
    trials: int
    seed: int
    no_shuffle_fraction: float
    no_shuffle_halfwidth: float
    mean_uncovered: float
    mean_uncovered_halfwidth: float
    mean_tun_greedy: float
    mean_tun_greedy_halfwidth: float
    outage_fraction: float
    outage_halfwidth: float
    fixed_no_shuffle_fraction: float
    fixed_no_shuffle_halfwidth: float
    fixed_mean_uncoded: float
    fixed_mean_uncoded_halfwidth: float
    error: str


def sweep(
    configs,
    p_values,
    trials: int,
    seed: int,
    compare_fixed: bool = False,
    nodes_per_function: int = 1,
    threads: int = 1,
) -> list[SweepPoint]:
    """One SweepPoint per ((m, n, K, d), p) pair.

    Each point gets its own seed derived from (seed, config index, p index);
    a failing point is recorded in its ``error`` column and the sweep moves
    on.  The greedy broadcast mean is taken over non-outage trials only and
    is NaN if every trial outaged; fixed-assignment columns are NaN unless
    ``compare_fixed`` is set.
    """
    points = []
    for ci, (m, n, K, d) in enumerate(configs):
        for pi, p in enumerate(p_values):
            point_seed = int(
                np.random.SeedSequence((seed, ci, pi)).generate_state(1, np.uint64)[0]
            )
            try:
                points.append(
                    _sweep_point(
                        m, n, K, d, p, trials, point_seed,
                        compare_fixed, nodes_per_function, threads,
                    )
                )
            except Exception as exc:  # recorded, sweep continues
                points.append(
                    SweepPoint(
                        m=m, n=n, K=K, d=d, p=p, trials=trials, seed=point_seed,
                        no_shuffle_fraction=math.nan, no_shuffle_halfwidth=math.nan,
                        mean_uncovered=math.nan, mean_uncovered_halfwidth=math.nan,
                        mean_tun_greedy=math.nan, mean_tun_greedy_halfwidth=math.nan,
                        outage_fraction=math.nan, outage_halfwidth=math.nan,
                        fixed_no_shuffle_fraction=math.nan, fixed_no_shuffle_halfwidth=math.nan,
                        fixed_mean_uncoded=math.nan, fixed_mean_uncoded_halfwidth=math.nan,
                        error=f"{type(exc).__name__}: {exc}",
                    )
                )
    return points


def _sweep_point(
    m, n, K, d, p, trials, point_seed, compare_fixed, nodes_per_function, threads
) -> SweepPoint:
    groups = (
        fixed_assignment_nodes(K, n, nodes_per_function) if compare_fixed else None
    )

    def trial(t):
        inst = _trial_instance(m, n, K, d, p, point_seed, t)
        outage = bool(missing_messages(inst))
        y = _uncovered(inst)
        if outage:
            greedy = None
        elif y == 0:
            greedy = 0
        else:
            greedy = greedy_raw_broadcasts(inst).size
        covered_fixed = _fixed_covered(inst, groups) if groups else False
        return y, greedy, outage, covered_fixed

    rows = _map_trials(trial, trials, threads)
    ys = [r[0] for r in rows]
    greedy_sizes = [r[1] for r in rows if r[1] is not None]
    no_shuffle = _proportion(sum(1 for y in ys if y == 0), trials)
    outage = _proportion(sum(1 for r in rows if r[2]), trials)
    mean_y = _mean(ys)
    mean_greedy = _mean(greedy_sizes) if greedy_sizes else None
    if compare_fixed:
        fixed_cov = _proportion(sum(1 for r in rows if r[3]), trials)
        fixed_tx = mc_fixed_uncoded(K, p, trials, point_seed, threads=threads)
    return SweepPoint(
        m=m, n=n, K=K, d=d, p=p, trials=trials, seed=point_seed,
        no_shuffle_fraction=no_shuffle.fraction,
        no_shuffle_halfwidth=no_shuffle.halfwidth,
        mean_uncovered=mean_y.mean,
        mean_uncovered_halfwidth=mean_y.halfwidth,
        mean_tun_greedy=mean_greedy.mean if mean_greedy else math.nan,
        mean_tun_greedy_halfwidth=mean_greedy.halfwidth if mean_greedy else math.nan,
        outage_fraction=outage.fraction,
        outage_halfwidth=outage.halfwidth,
        fixed_no_shuffle_fraction=fixed_cov.fraction if compare_fixed else math.nan,
        fixed_no_shuffle_halfwidth=fixed_cov.halfwidth if compare_fixed else math.nan,
        fixed_mean_uncoded=fixed_tx.mean if compare_fixed else math.nan,
        fixed_mean_uncoded_halfwidth=fixed_tx.halfwidth if compare_fixed else math.nan,
        error="",
    )


CSV_SCHEMA_VERSION = 1


def _format_value(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def sweep_to_csv(points) -> str:
    """RFC-4180 CSV with a leading schema column; floats use 6 significant
    digits."""
    buf = io.StringIO()
    names = [f.name for f in fields(SweepPoint)]
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["schema"] + names)
    for pt in points:
        writer.writerow(
            [str(CSV_SCHEMA_VERSION)] + [_format_value(getattr(pt, name)) for name in names]
        )
    return buf.getvalue()
