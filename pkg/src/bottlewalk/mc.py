"""Monte Carlo estimation on top of the trajectory kernels.

The wrappers here add seeding discipline, optional threading, step-budget
guards and confidence intervals.  Trajectory i of an experiment always
consumes stream i of that experiment's sub-seed, so estimates are
reproducible across backends and thread counts.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import MissingMarkError, StepBudgetError
from .graphs import Region, RegionTaggedGraph, distances_from
from .streams import label_seed

DEFAULT_CAP_FACTOR = 100


@dataclass(frozen=True)
class RngConfig:
    """Seeding and execution policy for one batch of experiments."""

    seed: int = 2026
    threads: int = 1
    backend: str | None = None

    def substream(self, label: str) -> int:
        """Independent sub-seed for one named experiment."""
        return label_seed(self.seed, label)


def default_step_cap(g: RegionTaggedGraph, reference: float | None = None) -> int:
    """Step budget: a large multiple of a scale the walk should respect.

    ``reference`` is an expected hitting time when one is known; otherwise
    the cubic worst-case bound on hitting times stands in.
    """
    base = reference if reference is not None else float(g.n) ** 3
    return int(DEFAULT_CAP_FACTOR * max(1.0, math.ceil(base)))


def _chunks(n_traj: int, threads: int):
    threads = max(1, min(threads, n_traj)) if n_traj else 1
    size = (n_traj + threads - 1) // threads
    return [(lo, min(lo + size, n_traj)) for lo in range(0, n_traj, size)]


def _run_chunked(fn, n_traj: int, threads: int, n_outputs: int):
    """Run kernel ``fn(lo, count)`` over trajectory chunks, maybe threaded."""
    spans = _chunks(n_traj, threads)
    if len(spans) == 1:
        return fn(spans[0][0], spans[0][1] - spans[0][0])
    with ThreadPoolExecutor(max_workers=len(spans)) as pool:
        futs = [pool.submit(fn, lo, hi - lo) for lo, hi in spans]
        parts = [f.result() for f in futs]
    return tuple(np.concatenate([p[k] for p in parts]) for k in range(n_outputs))


def mean_interval(values: np.ndarray, z: float = 1.96) -> tuple[float, float, float]:
    """(mean, se, half-width) under the normal approximation."""
    n = values.size
    mean = float(values.mean()) if n else math.nan
    if n < 2:
        return mean, math.nan, math.nan
    se = float(values.std(ddof=1)) / math.sqrt(n)
    return mean, se, z * se


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1.0 + z * z / n
    center = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1.0 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


# ---------------------------------------------------------------------------
# result containers
# ---------------------------------------------------------------------------


@dataclass
class MomentEstimate:
    """Sample moments of a hitting time with a normal-approximation CI."""

    mean: float
    se: float
    ci_half: float
    variance: float
    second_moment: float
    n: int
    n_incomplete: int
    times: np.ndarray = field(repr=False)
    completed: np.ndarray = field(repr=False)
    cap: int = 0


@dataclass
class ProportionEstimate:
    p_hat: float
    ci: tuple[float, float]
    successes: int
    n: int
    n_undecided: int = 0


@dataclass
class TailEstimate:
    """P(hitting time >= threshold); exact mode has zero half width."""

    probability: float
    half_width: float
    n: int
    ci: tuple[float, float] = (0.0, 1.0)
    exact: bool = False


@dataclass
class CountStats:
    """Return-count sample (geometric-type statistics)."""

    mean: float
    se: float
    ci_half: float
    counts: np.ndarray = field(repr=False)
    completed: np.ndarray = field(repr=False)
    n: int = 0
    n_incomplete: int = 0


@dataclass
class ExcursionSample:
    """Lengths of one kind of conditioned excursion."""

    mean: float
    se: float
    ci_half: float
    lengths: np.ndarray = field(repr=False)
    attempts: np.ndarray = field(repr=False)
    accept_rate: float = 1.0
    n: int = 0
    n_incomplete: int = 0


@dataclass
class ReturnLawReport:
    """Core-return counts with the observed CDF at the gateway distance.

    The reference value 1/gateway_distance is printed next to the
    observed CDF; the two are reported side by side, never asserted
    against each other.
    """

    stats: CountStats
    gateway_distance: int
    cdf_at_distance: float
    reference_value: float

    def empirical_cdf(self, value: float) -> float:
        done = self.stats.counts[self.stats.completed]
        return float(np.mean(done <= value)) if done.size else math.nan


@dataclass
class ExcursionStats:
    """Every sampled ingredient of the post-origin drag bound.

    Duration-type samples (neck and core excursion lengths) are
    jump-chain lengths; their means are rescaled by 1/(1-laziness)
    inside the assembled bound so all terms live on the lazy walk's
    clock.
    """

    return_counts: np.ndarray = field(repr=False)
    neck_lengths: np.ndarray = field(repr=False)
    core_lengths: np.ndarray = field(repr=False)
    detour_counts: np.ndarray = field(repr=False)
    to_boundary_mean: float = math.nan
    commute_mean: float = math.nan
    boundary_hit_prob: float = math.nan
    return_mean: float = math.nan
    neck_mean: float = math.nan
    core_mean: float = math.nan
    detour_mean: float = math.nan
    laziness: float = 0.5
    assembled_bound: float = math.nan


@dataclass
class CouplingResult:
    """Meeting statistics of the paired walk."""

    meet: np.ndarray = field(repr=False)
    survival: np.ndarray = field(repr=False)
    survival_half: np.ndarray = field(repr=False)
    x_end: np.ndarray = field(repr=False)
    y_end: np.ndarray = field(repr=False)
    y_at_origin_hit: np.ndarray = field(repr=False)
    marginal_counts: np.ndarray | None = field(repr=False, default=None)
    horizon: int = 0
    met_fraction: float = 0.0
    far_fraction_at_origin_hit: float = math.nan

    def tail(self, t: int) -> TailEstimate:
        """P(meeting time > t) with a Wilson interval."""
        n = int(self.meet.size)
        succ = int(np.sum(self.meet > t))
        lo, hi = wilson_interval(succ, n)
        return TailEstimate(
            probability=succ / n if n else math.nan,
            half_width=(hi - lo) / 2.0,
            n=n,
            ci=(lo, hi),
        )


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _budget_check(what: str, n_incomplete: int, n: int, cap: int, allow: bool):
    if n_incomplete and not allow:
        raise StepBudgetError(
            f"{what}: {n_incomplete} of {n} trajectories exhausted the "
            f"step cap {cap}; raise the cap or pass allow_incomplete=True"
        )


def hitting_time_stats(
    g: RegionTaggedGraph,
    start: int,
    targets,
    laziness: float,
    rng: RngConfig,
    n_traj: int,
    cap: int | None = None,
    label: str = "hit",
    allow_incomplete: bool = False,
) -> MomentEstimate:
    """Mean/variance of the hitting time of ``targets`` from ``start``."""
    cap = cap if cap is not None else default_step_cap(g)
    seed = rng.substream(label)

    def part(lo, count):
        return kernels.run_hit(
            g, start, targets, laziness, seed, count, cap,
            stream_offset=lo, backend=rng.backend,
        )

    times, hit = _run_chunked(part, n_traj, rng.threads, 2)
    n_incomplete = int(np.sum(~hit))
    _budget_check("hitting_time_stats", n_incomplete, n_traj, cap, allow_incomplete)
    done = times[hit]
    mean, se, half = mean_interval(done.astype(np.float64))
    var = float(done.var(ddof=1)) if done.size > 1 else math.nan
    second = float(np.mean(done.astype(np.float64) ** 2)) if done.size else math.nan
    return MomentEstimate(
        mean=mean, se=se, ci_half=half, variance=var, second_moment=second,
        n=n_traj, n_incomplete=n_incomplete, times=times, completed=hit, cap=cap,
    )


def tail_probability(
    g: RegionTaggedGraph,
    start: int,
    targets,
    threshold: int,
    laziness: float,
    rng: RngConfig,
    n_traj: int,
    label: str = "tail",
    exact: bool = False,
) -> TailEstimate:
    """P(hitting time >= threshold), with a Wilson interval.

    Trajectories only need to run ``threshold`` steps, so the step budget
    never truncates this estimate.  ``exact=True`` switches to absorbing
    power iteration on the transition kernel (small graphs only) and
    returns a zero-width estimate.
    """
    if threshold <= 0:
        return TailEstimate(
            probability=1.0, half_width=0.0, n=n_traj, ci=(1.0, 1.0), exact=exact
        )
    if exact:
        from . import exact as _exact

        surv = _exact.hitting_survival(
            g, targets, start, horizon=threshold - 1, laziness=laziness
        )
        p = float(surv[-1])
        return TailEstimate(probability=p, half_width=0.0, n=0, ci=(p, p), exact=True)
    seed = rng.substream(label)

    def part(lo, count):
        return kernels.run_hit(
            g, start, targets, laziness, seed, count, threshold,
            stream_offset=lo, backend=rng.backend,
        )

    times, _hit = _run_chunked(part, n_traj, rng.threads, 2)
    successes = int(np.sum(times >= threshold))
    lo_w, hi_w = wilson_interval(successes, n_traj)
    return TailEstimate(
        probability=successes / n_traj if n_traj else math.nan,
        half_width=(hi_w - lo_w) / 2.0,
        n=n_traj,
        ci=(lo_w, hi_w),
    )


def race_probability(
    g: RegionTaggedGraph,
    start: int,
    first_set,
    second_set,
    laziness: float,
    rng: RngConfig,
    n_traj: int,
    cap: int | None = None,
    label: str = "race",
    allow_incomplete: bool = False,
) -> ProportionEstimate:
    """P(the walk reaches ``first_set`` before ``second_set``)."""
    cap = cap if cap is not None else default_step_cap(g)
    seed = rng.substream(label)

    def part(lo, count):
        return kernels.run_race(
            g, start, first_set, second_set, laziness, seed, count, cap,
            stream_offset=lo, backend=rng.backend,
        )

    times, which = _run_chunked(part, n_traj, rng.threads, 2)
    undecided = int(np.sum(which == 255))
    _budget_check("race_probability", undecided, n_traj, cap, allow_incomplete)
    decided = n_traj - undecided
    successes = int(np.sum(which == 1))
    return ProportionEstimate(
        p_hat=successes / decided if decided else math.nan,
        ci=wilson_interval(successes, decided),
        successes=successes,
        n=decided,
        n_undecided=undecided,
    )


def return_count_stats(
    g: RegionTaggedGraph,
    start: int,
    return_set,
    targets,
    laziness: float,
    rng: RngConfig,
    n_traj: int,
    cap: int | None = None,
    label: str = "returns",
    allow_incomplete: bool = False,
) -> CountStats:
    """Number of re-entries into ``return_set`` before absorption."""
    cap = cap if cap is not None else default_step_cap(g)
    seed = rng.substream(label)

    def part(lo, count):
        return kernels.run_return_counts(
            g, start, return_set, targets, laziness, seed, count, cap,
            stream_offset=lo, backend=rng.backend,
        )

    counts, completed = _run_chunked(part, n_traj, rng.threads, 2)
    n_incomplete = int(np.sum(~completed))
    _budget_check("return_count_stats", n_incomplete, n_traj, cap, allow_incomplete)
    done = counts[completed].astype(np.float64)
    mean, se, half = mean_interval(done)
    return CountStats(
        mean=mean, se=se, ci_half=half, counts=counts, completed=completed,
        n=n_traj, n_incomplete=n_incomplete,
    )


def excursion_stats(
    g: RegionTaggedGraph,
    base: int,
    allowed,
    rng: RngConfig,
    n_traj: int,
    cap: int | None = None,
    label: str = "excursion",
    allow_incomplete: bool = False,
) -> ExcursionSample:
    """Mean length of an excursion from ``base`` conditioned on ``allowed``.

    Excursions are a jump-chain notion, so they are always sampled with
    laziness zero.
    """
    cap = cap if cap is not None else default_step_cap(g)
    seed = rng.substream(label)

    def part(lo, count):
        return kernels.run_excursions(
            g, base, allowed, 0.0, seed, count, cap,
            stream_offset=lo, backend=rng.backend,
        )

    lengths, attempts = _run_chunked(part, n_traj, rng.threads, 2)
    ok = lengths >= 0
    n_incomplete = int(np.sum(~ok))
    _budget_check("excursion_stats", n_incomplete, n_traj, cap, allow_incomplete)
    done = lengths[ok].astype(np.float64)
    mean, se, half = mean_interval(done)
    total_attempts = int(attempts[ok].sum())
    return ExcursionSample(
        mean=mean, se=se, ci_half=half, lengths=lengths, attempts=attempts,
        accept_rate=(done.size / total_attempts) if total_attempts else math.nan,
        n=n_traj, n_incomplete=n_incomplete,
    )


def core_return_law(
    g: RegionTaggedGraph,
    rng: RngConfig,
    n_traj: int,
    laziness: float = 0.0,
    cap: int | None = None,
    label: str = "core-returns",
    allow_incomplete: bool = False,
) -> ReturnLawReport:
    """Law of the number of core re-entries before the gateway is passed.

    Counting starts at the walk's first origin visit; by the Markov
    property the law is the same however the walk arrived there, so
    sampling starts directly at the origin.  The count only sees arrival
    events, which makes it invariant under laziness; the default samples
    the jump chain.
    """
    if g.marks is None:
        raise MissingMarkError("core_return_law needs marked vertices")
    origin = g.marks.origin
    gateway = g.marks.gateway
    core = g.region_vertices(Region.CORE)
    stats = return_count_stats(
        g, origin, core, [gateway], laziness, rng, n_traj,
        cap=cap, label=label, allow_incomplete=allow_incomplete,
    )
    gate_dist = int(distances_from(g, origin)[gateway])
    done = stats.counts[stats.completed]
    cdf = float(np.mean(done <= gate_dist)) if done.size else math.nan
    return ReturnLawReport(
        stats=stats,
        gateway_distance=gate_dist,
        cdf_at_distance=cdf,
        reference_value=1.0 / gate_dist if gate_dist > 0 else math.nan,
    )


def _worst_boundary(g: RegionTaggedGraph) -> int:
    """Deterministic boundary representative: farthest from the origin."""
    dist = distances_from(g, g.marks.origin)
    verts = sorted(g.marks.boundary)
    return int(max(verts, key=lambda v: (dist[v], -v)))


def excursion_decomposition(
    g: RegionTaggedGraph,
    rng: RngConfig,
    n_traj: int,
    laziness: float = 0.5,
    cap: int | None = None,
    allow_incomplete: bool = False,
) -> ExcursionStats:
    """Estimate every ingredient of the post-origin drag bound.

    Samples, per trajectory batch: the core re-entry count before the
    gateway, the neck excursion length avoiding the gateway, the core
    excursion length avoiding the deep boundary, the geometric count of
    core excursions between neck entries, the origin-to-boundary and
    boundary-to-origin hitting times, and the probability of reaching
    the boundary before leaving the core.  The assembled bound combines
    them on the lazy walk's clock.
    """
    if g.marks is None:
        raise MissingMarkError("excursion_decomposition needs marked vertices")
    origin = g.marks.origin
    gateway = g.marks.gateway
    boundary = sorted(g.marks.boundary)
    core = g.region_vertices(Region.CORE)
    neck = g.region_vertices(Region.NECK)
    n = g.n

    law = core_return_law(
        g, rng, n_traj, laziness=0.0, cap=cap,
        label="decomp-returns", allow_incomplete=allow_incomplete,
    )
    ret_done = law.stats.counts[law.stats.completed].astype(np.int64)

    neck_allowed = np.array([v for v in neck if v != gateway], dtype=np.int64)
    if neck_allowed.size:
        neck_exc = excursion_stats(
            g, origin, neck_allowed, rng, n_traj, cap=cap,
            label="decomp-neck", allow_incomplete=allow_incomplete,
        )
        neck_done = neck_exc.lengths[neck_exc.lengths >= 0]
    else:
        # the gateway is adjacent to the origin: no neck excursion exists
        neck_done = np.zeros(n_traj, dtype=np.int64)

    bnd_set = set(boundary)
    core_allowed = np.array(
        [v for v in core if v not in bnd_set and v != origin], dtype=np.int64
    )
    if core_allowed.size:
        core_exc = excursion_stats(
            g, origin, core_allowed, rng, n_traj, cap=cap,
            label="decomp-core", allow_incomplete=allow_incomplete,
        )
        core_done = core_exc.lengths[core_exc.lengths >= 0]
    else:
        core_done = np.zeros(n_traj, dtype=np.int64)

    core_interior = np.array([v for v in core if v != origin], dtype=np.int64)
    det_stats = return_count_stats(
        g, origin, core_interior, neck, 0.0, rng, n_traj,
        cap=cap, label="decomp-detours", allow_incomplete=allow_incomplete,
    )
    det_done = det_stats.counts[det_stats.completed].astype(np.int64)

    out = hitting_time_stats(
        g, origin, boundary, laziness, rng, n_traj,
        cap=cap, label="decomp-out", allow_incomplete=allow_incomplete,
    )
    back = hitting_time_stats(
        g, _worst_boundary(g), [origin], laziness, rng, n_traj,
        cap=cap, label="decomp-back", allow_incomplete=allow_incomplete,
    )
    non_core = np.array([v for v in range(n) if g.region[v] != int(Region.CORE)],
                        dtype=np.int64)
    race = race_probability(
        g, origin, boundary, non_core, 0.0, rng, n_traj,
        cap=cap, label="decomp-race", allow_incomplete=allow_incomplete,
    )

    scale = 1.0 / (1.0 - laziness)
    ret_mean = float(ret_done.mean()) if ret_done.size else math.nan
    neck_mean = float(neck_done.mean()) if neck_done.size else math.nan
    core_mean = float(core_done.mean()) if core_done.size else math.nan
    det_mean = float(det_done.mean()) if det_done.size else math.nan
    to_boundary = out.mean
    commute = out.mean + back.mean
    assembled = (
        ret_mean * neck_mean * scale
        + ret_mean * det_mean * core_mean * scale
        + to_boundary
        + commute
    )
    return ExcursionStats(
        return_counts=ret_done,
        neck_lengths=np.asarray(neck_done, dtype=np.int64),
        core_lengths=np.asarray(core_done, dtype=np.int64),
        detour_counts=det_done,
        to_boundary_mean=to_boundary,
        commute_mean=commute,
        boundary_hit_prob=race.p_hat,
        return_mean=ret_mean,
        neck_mean=neck_mean,
        core_mean=core_mean,
        detour_mean=det_mean,
        laziness=laziness,
        assembled_bound=assembled,
    )


def coupling_experiment(
    g: RegionTaggedGraph,
    horizon: int,
    laziness: float,
    rng: RngConfig,
    n_traj: int,
    x_start: int | None = None,
    y_start: int | None = None,
    label: str = "coupling",
    tally: bool = False,
) -> CouplingResult:
    """Meeting-time survival of the paired walk up to a fixed horizon.

    The first chain starts at ``x_start`` (default: the marked far
    start); the shadow starts from the stationary law unless ``y_start``
    pins it.  ``tally=True`` also accumulates the shadow's mirrored-phase
    transition counts for the marginal audit.
    """
    if x_start is None:
        if g.marks is None:
            raise MissingMarkError("coupling default start needs marks")
        x_start = g.marks.far_start
    seed = rng.substream(label)
    tallies: list[np.ndarray] = []

    def part(lo, count):
        meet, x_end, y_end, y_at, counts = kernels.run_coupling(
            g, x_start, y_start, laziness, seed, count, horizon,
            stream_offset=lo, backend=rng.backend, tally=tally,
        )
        tallies.append(counts)
        return meet, x_end, y_end, y_at

    meet, x_end, y_end, y_at = _run_chunked(part, n_traj, rng.threads, 4)
    ts = np.arange(horizon + 1)
    if n_traj:
        survival = np.array([np.mean(meet > t) for t in ts])
        succ = np.array([int(np.sum(meet > t)) for t in ts])
        bounds = np.array([wilson_interval(s, n_traj) for s in succ])
        survival_half = (bounds[:, 1] - bounds[:, 0]) / 2.0
    else:
        survival = np.ones(horizon + 1)
        survival_half = np.ones(horizon + 1)
    counts = None
    if tally:
        counts = np.zeros((g.n, g.n), dtype=np.int64)
        for part_counts in tallies:
            counts += part_counts
    snap = y_at[y_at >= 0]
    far_frac = (
        float(np.mean(g.region[snap] == int(Region.FAR))) if snap.size else math.nan
    )
    return CouplingResult(
        meet=meet,
        survival=survival,
        survival_half=survival_half,
        x_end=x_end,
        y_end=y_end,
        y_at_origin_hit=y_at,
        marginal_counts=counts,
        horizon=horizon,
        met_fraction=float(np.mean(meet <= horizon)) if n_traj else 0.0,
        far_fraction_at_origin_hit=far_frac,
    )


def marginal_gap(counts: np.ndarray, P: np.ndarray) -> float:
    """Worst z-score of mirrored-phase shadow transitions against rows of P.

    For each visited from-state the observed cell counts are compared
    with the binomial prediction; the return value is the largest
    |observed - expected| / SE over cells, infinity when a transition
    with zero kernel probability was observed.
    """
    worst = 0.0
    n = counts.shape[0]
    for u in range(n):
        total = counts[u].sum()
        if total == 0:
            continue
        for v in range(n):
            obs = counts[u, v]
            p = P[u, v]
            if p <= 0.0:
                if obs > 0:
                    return math.inf
                continue
            if p >= 1.0:
                continue
            se = math.sqrt(total * p * (1.0 - p))
            z = abs(obs - total * p) / se
            worst = max(worst, z)
    return worst


def dump_samples_csv(path, values: np.ndarray, column: str) -> None:
    """Write one sample per line as (trajectory index, value)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"index,{column}\n")
        for i, v in enumerate(np.asarray(values).tolist()):
            fh.write(f"{i},{v}\n")


def dump_summary_json(path, summary: dict) -> None:
    """Write an estimate summary as deterministic JSON."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
