"""Regime checks for bottlenecked walks: conditions, bounds, verdicts.

The quantities in play, all computed for one tagged graph and one lazy
kernel:

* ``far_mean``/``far_var``: moments of the hitting time of the origin
  started at the far mark c,
* ``boundary_mean``/``boundary_var``: the same started at the worst
  boundary vertex (the core vertices furthest from the origin),
* ``travel_time = far_mean - gamma*sqrt(far_var)``: the fluctuation-
  adjusted travel time, which is also the direct lower bound for the
  mixing time,
* ``slow_flow_ratio``: the bottleneck ratio of the slow side, taken as
  the far region plus the neck plus the junction vertex itself, so that
  every escape route crosses into the core,
* ``leakage = travel_time * slow_flow_ratio``: how much restricted mass
  can escape the slow side over one travel-time window,
* ``contraction = leakage / (1 - slow_mass - epsilon)``: < 1 whenever
  epsilon is inside its admissible range.

The verdicts:

* ``direct``: the far hitting time dominates the boundary one (with the
  fluctuation terms), so t_mix tracks far_mean itself,
* ``contracted``: the reversed comparison holds after dividing by the
  contraction factor, so t_mix tracks far_mean / contraction,
* ``contracted-weak``: the weaker displayed gates (boundary spread plus
  the plain two-sided chain through delta*sigma_boundary) hold,
* ``none``: nothing above applies.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import exact
from .errors import (
    EpsilonRangeError,
    MissingInputError,
    PhiRangeError,
)
from .graphs import Marks, Region, RegionTaggedGraph, distances_from


@dataclass(frozen=True)
class AnalysisParams:
    """Tunables of a regime evaluation.

    ``epsilon`` may be None, meaning "half the admissible range",
    resolved once the leakage and the far mass are known.
    ``return_law_scale`` bounds the chance of an atypically low return
    count by its reciprocal; None uses the gateway's distance from the
    origin (exact for a single-line neck).  ``slack`` is the finite-size
    threshold standing in for "vanishes asymptotically": a ratio passes
    when it is at most ``slack``.
    """

    epsilon: float | None = None
    gamma: float = 1.0
    delta: float = 1.0
    return_law_scale: float | None = None
    s_exp: float = 1.0
    slack: float = 0.5

    def __post_init__(self):
        if self.epsilon is not None and not (0.0 < self.epsilon < 1.0):
            raise ValueError("epsilon must lie in (0, 1)")
        if self.gamma <= 0 or self.delta <= 0:
            raise ValueError("gamma and delta must be positive")
        if not (0.0 < self.slack <= 1.0):
            raise ValueError("slack must lie in (0, 1]")


@dataclass
class HittingSummary:
    """Exact hitting moments the checks consume, in lazy-step units."""

    far_mean: float
    far_var: float
    boundary_mean: float
    boundary_var: float
    origin_to_boundary_mean: float
    subtree_exit_means: dict[int, float] = field(default_factory=dict)
    laziness: float = 0.5


@dataclass
class ReturnSummary:
    """Return and excursion statistics around the bottleneck."""

    mean_returns: float
    gateway_distance: int
    below_gateway_prob: float | None = None
    neck_mean: float | None = None
    core_mean: float | None = None


@dataclass
class RegimeReport:
    """Everything a verdict rests on, with margins, thresholds, inputs."""

    # mass / conditions
    slow_mass: float  # stationary mass of far region, neck, and junction
    far_mass: float
    return_law_observed: float | None
    return_law_bound: float | None
    return_law_ok: bool | None
    core_to_edge_margin: float
    core_to_edge_ok: bool
    subtree_exit_margin: float | None
    subtree_exit_ok: bool
    # fluctuation and drag ratios (asymptotically-vanishing quantities)
    fluct_ratio: float
    fluct_ok: bool
    drag_ratio_direct: float | None
    drag_ok_direct: bool | None
    drag_ratio_contracted: float | None
    drag_ok_contracted: bool | None
    # the two hypothesis gaps
    direct_gap_margin: float
    direct_gap_holds: bool
    contracted_chain_left: float | None
    contracted_chain_right: float | None
    contracted_chain_holds: bool | None
    # leakage and contraction
    slow_flow_ratio: float
    travel_time: float
    leakage: float
    escape_probability: float | None
    epsilon: float | None
    contraction: float | None
    # weak-verdict gates
    boundary_spread_ratio: float
    boundary_spread_ok: bool
    weak_chain_left: float | None
    weak_chain_right: float | None
    weak_chain_holds: bool | None
    # sandwich
    lower_direct: float
    upper_direct: float
    lower_contracted: float | None
    upper_contracted: float | None
    t_mix_exact: int | None
    verdict: str
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# ingredient collection
# ---------------------------------------------------------------------------


def _require_marks(g: RegionTaggedGraph) -> Marks:
    if g.marks is None:
        raise MissingInputError("regime checks need a fully marked graph")
    return g.marks


def _slow_vertices(g: RegionTaggedGraph, marks: Marks) -> np.ndarray:
    """Far region, neck, and the junction vertex, as one index array."""
    far = g.region_vertices(Region.FAR)
    return np.concatenate(
        [far, g.region_vertices(Region.NECK), np.asarray([marks.origin], dtype=far.dtype)]
    )


def worst_boundary_vertex(g: RegionTaggedGraph, moments: exact.HittingMoments) -> int:
    """The boundary vertex with the largest mean hitting time of the origin."""
    marks = _require_marks(g)
    verts = sorted(marks.boundary)
    means = [moments.mean[v] for v in verts]
    return verts[int(np.argmax(means))]


def collect_hitting_summary(
    g: RegionTaggedGraph, laziness: float = 0.5, budget: int = exact.EXACT_VERTEX_BUDGET
) -> HittingSummary:
    """Exact moment ingredients for one graph and one laziness."""
    marks = _require_marks(g)
    to_origin = exact.hitting_moments(g, [marks.origin], laziness=laziness, budget=budget)
    worst = worst_boundary_vertex(g, to_origin)
    to_boundary = exact.hitting_moments(
        g, sorted(marks.boundary), laziness=laziness, budget=budget
    )
    subtree_exit = {}
    for sid, info in g.meta.get("subtrees", {}).items():
        if int(g.region[info["root"]]) != int(Region.FAR):
            continue
        to_attach = exact.hitting_moments(g, [info["attach"]], laziness=laziness, budget=budget)
        subtree_exit[sid] = float(max(to_attach.mean[v] for v in info["leaves"]))
    return HittingSummary(
        far_mean=float(to_origin.mean[marks.far_start]),
        far_var=float(to_origin.variance[marks.far_start]),
        boundary_mean=float(to_origin.mean[worst]),
        boundary_var=float(to_origin.variance[worst]),
        origin_to_boundary_mean=float(to_boundary.mean[marks.origin]),
        subtree_exit_means=subtree_exit,
        laziness=laziness,
    )


def collect_return_summary(
    g: RegionTaggedGraph,
    laziness: float = 0.5,
    rng=None,
    n_samples: int = 10_000,
    budget: int = exact.EXACT_VERTEX_BUDGET,
) -> ReturnSummary:
    """Return-count and excursion ingredients.

    The mean return count is exact (expected crossings into the core
    before the gateway vertex is reached).  The distribution tail used by
    the return-law check and the conditioned excursion means are sampled,
    so they need an RngConfig; without one they stay None.
    """
    marks = _require_marks(g)
    core = g.region_vertices(Region.CORE)
    mean_returns = exact.expected_crossings(
        g, marks.origin, core, [marks.gateway], laziness=laziness, budget=budget
    )
    z_dist = int(distances_from(g, marks.origin)[marks.gateway])
    below = neck = core_mean = None
    if rng is not None:
        from . import mc

        law = mc.core_return_law(g, rng, n_samples, laziness=0.0)
        below = law.cdf_at_distance
        scale = 1.0 / (1.0 - laziness)
        neck_allowed = [
            v for v in g.region_vertices(Region.NECK) if v != marks.gateway
        ]
        if neck_allowed:
            th = mc.excursion_stats(g, marks.origin, neck_allowed, rng, n_samples, label="neck")
            neck = th.mean * scale
        else:
            # gateway adjacent to the origin: no neck excursion can exist
            neck = 0.0
        interior = [
            v for v in core if v not in marks.boundary and v != marks.origin
        ]
        if interior:
            lam = mc.excursion_stats(g, marks.origin, interior, rng, n_samples, label="core")
            core_mean = lam.mean * scale
        else:
            # every non-origin core vertex is on the boundary
            core_mean = 0.0
    return ReturnSummary(
        mean_returns=float(mean_returns),
        gateway_distance=z_dist,
        below_gateway_prob=below,
        neck_mean=neck,
        core_mean=core_mean,
    )


# ---------------------------------------------------------------------------
# the individual checks
# ---------------------------------------------------------------------------


def contraction_factor(leakage: float, far_mass: float, epsilon: float) -> float:
    """leakage / (1 - far_mass - epsilon), guaranteed < 1 by the range checks."""
    if leakage >= 1.0:
        raise PhiRangeError(f"leakage={leakage} must be < 1")
    if epsilon >= 1.0 - far_mass - leakage:
        raise EpsilonRangeError(
            f"epsilon={epsilon} must be < 1 - far_mass - leakage = {1.0 - far_mass - leakage}"
        )
    return leakage / (1.0 - far_mass - epsilon)


@dataclass
class GapCheck:
    direct_margin: float
    direct_holds: bool
    chain_left: float
    chain_right: float
    chain_holds: bool


def check_gaps(hitting: HittingSummary, params: AnalysisParams, contraction: float) -> GapCheck:
    """The two hypothesis gaps, with signed margins (>= 0 means holds).

    Direct: far side dominates,
        far_mean + (gamma/2) sigma_far >= boundary_mean + delta sigma_boundary.
    Contracted chain: the reversed comparison, sandwiched after dividing
    the far side by the contraction factor:
        (far_mean + (gamma/2) sigma_far)/contraction
            >= boundary_mean + delta sigma_boundary
            >= far_mean + (gamma/2) sigma_far.
    """
    if not (0.0 < contraction <= 1.0):
        raise ValueError("contraction must lie in (0, 1]")
    far = hitting.far_mean + 0.5 * params.gamma * math.sqrt(hitting.far_var)
    bnd = hitting.boundary_mean + params.delta * math.sqrt(hitting.boundary_var)
    return GapCheck(
        direct_margin=far - bnd,
        direct_holds=far >= bnd,
        chain_left=far / contraction - bnd,
        chain_right=bnd - far,
        chain_holds=(far / contraction >= bnd) and (bnd >= far),
    )


def bound_sandwich(
    hitting: HittingSummary,
    params: AnalysisParams,
    mode: str,
    contraction: float | None = None,
) -> tuple[float, float]:
    """(lower, upper) bracket for the mixing time.

    ``direct`` mode returns far_mean -+ gamma*sigma_far; ``contracted``
    divides both ends by the contraction factor.  With contraction = 1
    the two modes coincide.
    """
    sigma = math.sqrt(hitting.far_var)
    lo = hitting.far_mean - params.gamma * sigma
    hi = hitting.far_mean + params.gamma * sigma
    if mode == "direct":
        return lo, hi
    if mode == "contracted":
        if contraction is None:
            raise MissingInputError("contracted mode needs the contraction factor")
        if contraction <= 0.0:
            raise PhiRangeError("contraction factor must be positive")
        return lo / contraction, hi / contraction
    raise ValueError(f"unknown sandwich mode {mode!r}")


def tail_bound_constant(gamma: float, delta: float) -> float:
    """Tail budget for P(origin not hit by the contracted threshold)."""
    return 16.0 / gamma**2 + 1.0 / delta**2 + 0.02


def contracted_threshold(
    hitting: HittingSummary, params: AnalysisParams, contraction: float
) -> float:
    """(far_mean + (gamma/2) sigma_far) / contraction."""
    if contraction <= 0.0:
        raise PhiRangeError("contraction factor must be positive")
    return (
        hitting.far_mean + 0.5 * params.gamma * math.sqrt(hitting.far_var)
    ) / contraction


# ---------------------------------------------------------------------------
# the full report
# ---------------------------------------------------------------------------


def evaluate_regime(
    g: RegionTaggedGraph,
    hitting: HittingSummary,
    returns: ReturnSummary | None,
    params: AnalysisParams,
    t_mix_exact: int | None = None,
    compute_escape: bool = True,
    budget: int = exact.EXACT_VERTEX_BUDGET,
) -> RegimeReport:
    """Assemble every check into one report and issue the verdict."""
    marks = _require_marks(g)
    if returns is None:
        raise MissingInputError("regime evaluation needs a ReturnSummary")

    s_verts = g.region_vertices(Region.FAR)
    # the slow side includes the junction vertex: every escape route then
    # crosses into the core, which is what makes the copy count a dial
    # for the leakage
    slow_verts = _slow_vertices(g, marks)
    slow_mass = exact.subset_mass(g, slow_verts)
    far_mass = exact.subset_mass(g, s_verts)
    slow_flow = exact.bottleneck_ratio(g, slow_verts, laziness=hitting.laziness)

    sigma_far = math.sqrt(hitting.far_var)
    sigma_bnd = math.sqrt(hitting.boundary_var)
    travel_time = hitting.far_mean - params.gamma * sigma_far
    leakage = travel_time * slow_flow

    # epsilon default: middle of the admissible range; a negative leakage
    # (fluctuation exceeding the mean) has no contracted regime at all
    epsilon = params.epsilon
    if epsilon is None:
        room = 1.0 - slow_mass - leakage
        epsilon = room / 2.0 if (leakage >= 0.0 and room > 0) else None

    contraction = None
    if (
        epsilon is not None
        and 0.0 <= leakage < 1.0
        and epsilon < 1.0 - slow_mass - leakage
    ):
        contraction = contraction_factor(leakage, slow_mass, epsilon)

    # return-law check (observed low-return probability vs its reciprocal scale)
    law_scale = (
        params.return_law_scale
        if params.return_law_scale is not None
        else float(returns.gateway_distance)
    )
    law_obs = returns.below_gateway_prob
    law_bound = 1.0 / law_scale if law_scale > 0 else None
    law_ok = (law_obs <= law_bound) if (law_obs is not None and law_bound is not None) else None

    # crossing-order checks
    core_margin = hitting.boundary_mean - hitting.origin_to_boundary_mean
    core_ok = hitting.origin_to_boundary_mean <= hitting.boundary_mean
    sub_margin = None
    sub_ok = True
    if hitting.subtree_exit_means:
        worst_exit = max(hitting.subtree_exit_means.values())
        sub_margin = hitting.boundary_mean - worst_exit
        sub_ok = worst_exit <= hitting.boundary_mean

    # vanishing ratios
    fluct_ratio = (params.gamma * sigma_far / hitting.far_mean) if hitting.far_mean > 0 else math.inf
    fluct_ok = fluct_ratio <= params.slack
    drag_num = None
    if returns.neck_mean is not None and returns.core_mean is not None:
        drag_num = hitting.boundary_mean + returns.mean_returns * (
            returns.neck_mean + returns.core_mean
        )
    denom = params.gamma * sigma_far
    drag_direct = (drag_num / denom) if (drag_num is not None and denom > 0) else None
    drag_contracted = None
    if drag_num is not None and denom > 0 and contraction is not None and contraction > 0:
        drag_contracted = drag_num / (denom / contraction)
    drag_ok_direct = (drag_direct <= params.slack) if drag_direct is not None else None
    drag_ok_contracted = (
        (drag_contracted <= params.slack) if drag_contracted is not None else None
    )

    # hypothesis gaps
    far_half = hitting.far_mean + 0.5 * params.gamma * sigma_far
    bnd_side = hitting.boundary_mean + params.delta * sigma_bnd
    direct_margin = far_half - bnd_side
    direct_holds = far_half >= bnd_side
    chain_left = chain_right = None
    chain_holds = None
    if contraction is not None and contraction > 0:
        gaps = check_gaps(hitting, params, contraction)
        chain_left, chain_right = gaps.chain_left, gaps.chain_right
        chain_holds = gaps.chain_holds

    # weak gates: boundary spread plus the plain delta-sigma chain
    spread_den = params.delta * sigma_bnd
    spread_ratio = hitting.boundary_mean / spread_den if spread_den > 0 else math.inf
    spread_ok = spread_ratio <= params.slack
    weak_left = weak_right = None
    weak_holds = None
    if contraction is not None and contraction > 0:
        weak_left = spread_den - hitting.far_mean
        weak_right = hitting.far_mean / contraction - spread_den
        weak_holds = (weak_left >= 0) and (weak_right >= 0)

    # probability the walk started from the restricted slow-side law has
    # not reached the origin within one travel-time window (reported only)
    escape_prob = None
    if compute_escape and g.n <= budget and travel_time > 0:
        mu = np.zeros(g.n)
        mu[slow_verts] = exact.transition_kernel(g, hitting.laziness, budget=budget).pi[
            slow_verts
        ]
        mu /= mu.sum()
        surv = exact.hitting_survival(
            g,
            [marks.origin],
            start=mu,
            horizon=int(math.floor(travel_time)),
            laziness=hitting.laziness,
            budget=budget,
        )
        escape_prob = float(surv[-1])

    lower_direct, upper_direct = bound_sandwich(hitting, params, "direct")
    lower_contracted = upper_contracted = None
    if contraction is not None and contraction > 0:
        lower_contracted, upper_contracted = bound_sandwich(
            hitting, params, "contracted", contraction=contraction
        )

    report = RegimeReport(
        slow_mass=slow_mass,
        far_mass=far_mass,
        return_law_observed=law_obs,
        return_law_bound=law_bound,
        return_law_ok=law_ok,
        core_to_edge_margin=core_margin,
        core_to_edge_ok=core_ok,
        subtree_exit_margin=sub_margin,
        subtree_exit_ok=sub_ok,
        fluct_ratio=fluct_ratio,
        fluct_ok=fluct_ok,
        drag_ratio_direct=drag_direct,
        drag_ok_direct=drag_ok_direct,
        drag_ratio_contracted=drag_contracted,
        drag_ok_contracted=drag_ok_contracted,
        direct_gap_margin=direct_margin,
        direct_gap_holds=direct_holds,
        contracted_chain_left=chain_left,
        contracted_chain_right=chain_right,
        contracted_chain_holds=chain_holds,
        slow_flow_ratio=slow_flow,
        travel_time=travel_time,
        leakage=leakage,
        escape_probability=escape_prob,
        epsilon=epsilon,
        contraction=contraction,
        boundary_spread_ratio=spread_ratio,
        boundary_spread_ok=spread_ok,
        weak_chain_left=weak_left,
        weak_chain_right=weak_right,
        weak_chain_holds=weak_holds,
        lower_direct=lower_direct,
        upper_direct=upper_direct,
        lower_contracted=lower_contracted,
        upper_contracted=upper_contracted,
        t_mix_exact=t_mix_exact,
        verdict="none",
        params={
            "epsilon": params.epsilon,
            "gamma": params.gamma,
            "delta": params.delta,
            "return_law_scale": law_scale,
            "s_exp": params.s_exp,
            "slack": params.slack,
            "laziness": hitting.laziness,
        },
    )
    report.verdict = theorem_verdict(report)
    return report


def theorem_verdict(report: RegimeReport) -> str:
    """Pick the strongest verdict whose gates all hold.

    The conditions gate uses the two crossing-order checks.  The slow-mass
    value and the return-law comparison are trend/report quantities, never
    gated: the observed low-return probability is printed next to its
    reference scale and the ``return_law_ok`` flag records the comparison
    for the report only.
    """
    cond = bool(report.core_to_edge_ok and report.subtree_exit_ok)
    if (
        cond
        and report.direct_gap_holds
        and report.fluct_ok
        and bool(report.drag_ok_direct)
    ):
        return "direct"
    if (
        cond
        and bool(report.contracted_chain_holds)
        and report.fluct_ok
        and bool(report.drag_ok_contracted)
        and report.leakage < 1.0
    ):
        return "contracted"
    if (
        report.leakage < 1.0
        and report.boundary_spread_ok
        and bool(report.weak_chain_holds)
        and report.contraction is not None
        and report.contraction < 1.0
    ):
        return "contracted-weak"
    return "none"


# ---------------------------------------------------------------------------
# cutoff diagnostics across a family
# ---------------------------------------------------------------------------


@dataclass
class CutoffDiagnostic:
    ks: list[int]
    epsilons: list[float]
    t_low: list[int]
    t_high: list[int]
    ratios: list[float]
    non_increasing: bool
    slow_masses: list[float]


def cutoff_diagnostic(
    graphs: list[RegionTaggedGraph],
    ks: list[int],
    laziness: float = 0.5,
    epsilon: float | None = None,
    gamma: float | None = None,
    budget: int = exact.EXACT_VERTEX_BUDGET,
) -> CutoffDiagnostic:
    """Ratios t_mix(eps) / t_mix(1 - eps) along a growing family.

    With ``epsilon`` None, each instance uses one tenth of its admissible
    range 1 - slow_mass - leakage, where the leakage discount follows the
    member's own scale: ``gamma`` None applies the default schedule
    k ** 0.25 per member, a float freezes it across the family.  The
    report carries the finite-size trend only; ratios are >= 1 by
    monotonicity of the mixing time in its argument.
    """
    def member(g: RegionTaggedGraph, k: int):
        slow = _slow_vertices(g, _require_marks(g))
        slow_mass = exact.subset_mass(g, slow)
        if epsilon is None:
            gam = float(k) ** 0.25 if gamma is None else gamma
            hitting = collect_hitting_summary(g, laziness=laziness, budget=budget)
            slow_flow = exact.bottleneck_ratio(g, slow, laziness=laziness)
            travel_time = hitting.far_mean - gam * math.sqrt(hitting.far_var)
            room = 1.0 - slow_mass - travel_time * slow_flow
            eps = 0.1 * room
            if room <= 0 or eps >= 0.5:
                raise EpsilonRangeError(
                    f"no admissible epsilon for a family member (room={room:.4g})"
                )
        else:
            eps = epsilon
        prof = exact.profile_to_target(g, eps, laziness=laziness, budget=budget)
        t1 = prof.mixing_time(eps)
        t2 = prof.mixing_time(1.0 - eps)
        ratio = t1 / t2 if t2 > 0 else math.inf
        return float(eps), int(t2), int(t1), ratio, slow_mass

    # members are independent; evaluate them concurrently, results in order
    if len(graphs) > 1:
        with ThreadPoolExecutor(max_workers=len(graphs)) as pool:
            rows = list(pool.map(member, graphs, ks))
    else:
        rows = [member(g, k) for g, k in zip(graphs, ks)]
    eps_list = [r[0] for r in rows]
    t_lo = [r[1] for r in rows]
    t_hi = [r[2] for r in rows]
    ratios = [r[3] for r in rows]
    masses = [r[4] for r in rows]
    non_inc = all(b <= a + 1e-12 for a, b in zip(ratios, ratios[1:]))
    return CutoffDiagnostic(
        ks=list(ks),
        epsilons=eps_list,
        t_low=t_lo,
        t_high=t_hi,
        ratios=ratios,
        non_increasing=non_inc,
        slow_masses=masses,
    )


def cutoff_to_csv(diag: CutoffDiagnostic, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "epsilon", "t_mix_eps", "t_mix_1m_eps", "ratio", "slow_mass"])
        for row in zip(
            diag.ks, diag.epsilons, diag.t_high, diag.t_low, diag.ratios, diag.slow_masses
        ):
            w.writerow([row[0], float(row[1]), int(row[2]), int(row[3]), float(row[4]), float(row[5])])
