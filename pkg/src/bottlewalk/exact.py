"""Exact linear-algebra engine for lazy simple random walks.

Everything here works on the explicit transition matrix, so it is gated by
a vertex budget: these routines are meant for graphs small enough that
dense per-start distributions and sparse LU solves are cheap.  Monte Carlo
estimation for larger graphs lives in :mod:`bottlewalk.mc`.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix, eye, identity
from scipy.sparse.linalg import splu

from .errors import (
    DimensionMismatchError,
    EmptySubsetError,
    EpsilonRangeError,
    ExactBudgetError,
    FullSubsetError,
    HorizonTooShortError,
    MissingInputError,
    PeriodicNoConvergenceWarning,
    PhiRangeError,
    SingularSystemError,
)
from .graphs import RegionTaggedGraph

EXACT_VERTEX_BUDGET = 20_000

# cap on entries of one dense chunk of start distributions (~160 MB float64)
_CHUNK_ENTRY_CAP = 20_000_000


@dataclass
class WalkKernel:
    """Transition matrix of the lazy walk together with its stationary law."""

    P: csr_matrix
    pi: np.ndarray
    laziness: float
    n: int


def transition_kernel(
    g: RegionTaggedGraph, laziness: float = 0.5, budget: int = EXACT_VERTEX_BUDGET
) -> WalkKernel:
    """P = a*I + (1-a)*D^{-1}A and pi proportional to degree.

    The stationary law does not depend on the laziness a.
    """
    if not (0.0 <= laziness < 1.0):
        raise ValueError("laziness must lie in [0, 1)")
    if g.n > budget:
        raise ExactBudgetError(f"{g.n} vertices exceed the exact-engine budget {budget}")
    deg = g.degrees.astype(np.float64)
    if np.any(deg == 0):
        raise ValueError("isolated vertex: the walk is undefined")
    data = np.repeat((1.0 - laziness) / deg, g.degrees)
    P = csr_matrix((data, g.indices, g.indptr), shape=(g.n, g.n))
    if laziness > 0.0:
        P = P + laziness * identity(g.n, format="csr")
    pi = deg / deg.sum()
    return WalkKernel(P=P.tocsr(), pi=pi, laziness=laziness, n=g.n)


def stationary_residual(kernel: WalkKernel) -> float:
    """max |pi P - pi|, a quick sanity check of the kernel."""
    return float(np.max(np.abs(kernel.pi @ kernel.P - kernel.pi)))


def tv_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Total variation distance, half the L1 distance."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape:
        raise DimensionMismatchError(f"shapes {p.shape} and {q.shape} differ")
    return 0.5 * float(np.sum(np.abs(p - q)))


# ---------------------------------------------------------------------------
# worst-start mixing profile
# ---------------------------------------------------------------------------


@dataclass
class MixingProfile:
    """d(t) = max over starts of the TV distance to stationarity.

    ``all_starts`` records whether every vertex was used; with an explicit
    start list the profile is only a lower envelope of the worst case.
    ``periodic_warning`` is set when a non-lazy profile showed no decay.
    """

    ts: np.ndarray
    d: np.ndarray
    worst_start: np.ndarray
    laziness: float
    starts: np.ndarray
    all_starts: bool = True
    periodic_warning: bool = False

    def mixing_time(self, epsilon: float) -> int:
        """Smallest recorded t with d(t) <= epsilon."""
        hit = np.flatnonzero(self.d <= epsilon)
        if hit.size == 0:
            raise HorizonTooShortError(
                f"d(t) stays above {epsilon} up to t={int(self.ts[-1])} "
                f"(d_end={self.d[-1]:.6g})",
                d_end=float(self.d[-1]),
            )
        return int(self.ts[hit[0]])


def mixing_profile(
    g: RegionTaggedGraph,
    horizon: int,
    laziness: float = 0.5,
    starts: np.ndarray | None = None,
    budget: int = EXACT_VERTEX_BUDGET,
) -> MixingProfile:
    """Evolve delta masses at every start and record the worst TV distance.

    Start distributions are processed in chunks of rows so the memory
    footprint stays bounded for graphs near the budget.  The budget only
    gates the all-starts sweep; an explicit start list is a lower
    envelope of the worst case and is allowed on any graph the kernel
    can hold.
    """
    all_starts = starts is None
    kernel_budget = budget if all_starts else max(budget, g.n)
    kernel = transition_kernel(g, laziness, budget=kernel_budget)
    if starts is None:
        starts = np.arange(g.n, dtype=np.int64)
    else:
        starts = np.asarray(starts, dtype=np.int64)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")

    PT = kernel.P.T.tocsr()
    pi = kernel.pi
    nt = horizon + 1
    d = np.zeros(nt)
    worst = np.zeros(nt, dtype=np.int64)

    chunk = max(1, _CHUNK_ENTRY_CAP // max(1, g.n))
    for lo in range(0, starts.size, chunk):
        sub = starts[lo : lo + chunk]
        # columns of D hold the evolving distributions of this chunk
        D = np.zeros((g.n, sub.size))
        D[sub, np.arange(sub.size)] = 1.0
        for t in range(nt):
            if t > 0:
                D = PT @ D
            dists = 0.5 * np.sum(np.abs(D - pi[:, None]), axis=0)
            j = int(np.argmax(dists))
            if dists[j] > d[t]:
                d[t] = dists[j]
                worst[t] = sub[j]
    periodic = bool(
        laziness == 0.0 and horizon >= 1 and d[0] > 0.0 and d[-1] >= d[0] - 1e-12
    )
    if periodic:
        warnings.warn(
            "TV distance did not decrease over the horizon at laziness 0; "
            "the walk may be periodic",
            PeriodicNoConvergenceWarning,
            stacklevel=2,
        )
    return MixingProfile(
        ts=np.arange(nt, dtype=np.int64),
        d=d,
        worst_start=worst,
        laziness=laziness,
        starts=starts,
        all_starts=all_starts,
        periodic_warning=periodic,
    )


def profile_to_target(
    g: RegionTaggedGraph,
    epsilon: float,
    laziness: float = 0.5,
    start_horizon: int = 8,
    horizon_cap: int = 1 << 20,
    starts: np.ndarray | None = None,
    budget: int = EXACT_VERTEX_BUDGET,
) -> MixingProfile:
    """Double the horizon until the profile dips below epsilon.

    Raises HorizonTooShortError (with the final distance attached) when the
    cap is reached, which happens for periodic non-lazy chains that never
    converge.
    """
    if not (0.0 < epsilon < 1.0):
        raise ValueError("epsilon must lie in (0, 1)")
    horizon = max(1, start_horizon)
    while True:
        prof = mixing_profile(g, horizon, laziness, starts=starts, budget=budget)
        if prof.d[-1] <= epsilon:
            return prof
        if horizon >= horizon_cap:
            raise HorizonTooShortError(
                f"d(t) stays above {epsilon} up to the horizon cap {horizon_cap} "
                f"(d_end={prof.d[-1]:.6g})",
                d_end=float(prof.d[-1]),
            )
        horizon = min(horizon_cap, 2 * horizon)


def mixing_time(
    g: RegionTaggedGraph,
    epsilon: float,
    laziness: float = 0.5,
    horizon_cap: int = 1 << 20,
    budget: int = EXACT_VERTEX_BUDGET,
) -> int:
    prof = profile_to_target(
        g, epsilon, laziness, horizon_cap=horizon_cap, budget=budget
    )
    return prof.mixing_time(epsilon)


# ---------------------------------------------------------------------------
# hitting times
# ---------------------------------------------------------------------------


@dataclass
class HittingMoments:
    """First and second moments of the hitting time of a target set.

    ``residual`` is the worst relative residual of the two linear solves.
    """

    mean: np.ndarray
    variance: np.ndarray
    second_moment: np.ndarray
    targets: np.ndarray
    laziness: float
    residual: float = 0.0


def _relative_residual(A, x: np.ndarray, rhs: np.ndarray) -> float:
    return float(np.max(np.abs(A @ x - rhs)) / max(1.0, np.max(np.abs(x))))


def hitting_moments(
    g: RegionTaggedGraph,
    targets,
    laziness: float = 0.0,
    budget: int = EXACT_VERTEX_BUDGET,
    residual_tol: float = 1e-10,
) -> HittingMoments:
    """Mean and variance of the hitting time of ``targets`` from every start.

    First-step analysis: with Q the kernel restricted to non-targets,
    (I - Q) h = 1 gives the mean and (I - Q) u = 1 + 2 Q h the second
    moment.  Both solves go through one sparse LU factorization; the worst
    relative residual is stored on the result, and exceeding
    ``residual_tol`` reports the system as effectively singular.
    """
    kernel = transition_kernel(g, laziness, budget=budget)
    targets = np.asarray(sorted(set(int(t) for t in np.atleast_1d(targets))), dtype=np.int64)
    if targets.size == 0:
        raise EmptySubsetError("target set is empty")
    mask = np.zeros(g.n, dtype=bool)
    mask[targets] = True
    free = np.flatnonzero(~mask)
    mean = np.zeros(g.n)
    second = np.zeros(g.n)
    residual = 0.0
    if free.size:
        Q = kernel.P[free][:, free].tocsc()
        A = (eye(free.size, format="csc") - Q).tocsc()
        try:
            lu = splu(A)
        except RuntimeError as exc:
            raise SingularSystemError(f"hitting-time system is singular: {exc}") from exc
        ones = np.ones(free.size)
        h = lu.solve(ones)
        res = _relative_residual(A, h, ones)
        if not np.isfinite(h).all() or res > residual_tol:
            raise SingularSystemError(
                f"hitting-time solve residual {res:.3g} exceeds {residual_tol:.3g} "
                "(target set unreachable from part of the graph?)"
            )
        rhs2 = ones + 2.0 * (Q @ h)
        u = lu.solve(rhs2)
        residual = max(res, _relative_residual(A, u, rhs2))
        mean[free] = h
        second[free] = u
    variance = second - mean**2
    # tiny negative values from roundoff are clamped
    variance[(variance < 0) & (variance > -1e-9 * np.maximum(second, 1.0))] = 0.0
    return HittingMoments(
        mean=mean,
        variance=variance,
        second_moment=second,
        targets=targets,
        laziness=laziness,
        residual=residual,
    )


def hitting_survival(
    g: RegionTaggedGraph,
    targets,
    start,
    horizon: int | None = None,
    tail_tol: float = 1e-13,
    laziness: float = 0.0,
    budget: int = EXACT_VERTEX_BUDGET,
) -> np.ndarray:
    """Exact survival function P(tau > t) for t = 0, 1, ... by power iteration.

    ``start`` is a vertex or a start distribution over all vertices.
    Iterates the sub-stochastic restriction of the kernel until the
    remaining mass drops below ``tail_tol`` (or the horizon, if given).
    """
    kernel = transition_kernel(g, laziness, budget=budget)
    targets = np.asarray(sorted(set(int(t) for t in np.atleast_1d(targets))), dtype=np.int64)
    if targets.size == 0:
        raise EmptySubsetError("target set is empty")
    mask = np.zeros(g.n, dtype=bool)
    mask[targets] = True
    free = np.flatnonzero(~mask)
    nu = np.zeros(free.size)
    if np.ndim(start) == 0:
        if mask[int(start)]:
            return np.zeros(1)
        pos = -np.ones(g.n, dtype=np.int64)
        pos[free] = np.arange(free.size)
        nu[pos[int(start)]] = 1.0
    else:
        dist = np.asarray(start, dtype=np.float64)
        if dist.shape != (g.n,):
            raise DimensionMismatchError("start distribution must cover every vertex")
        nu = dist[free].copy()
    QT = kernel.P[free][:, free].T.tocsr()
    surv = [float(nu.sum())]
    cap = horizon if horizon is not None else 10_000_000
    for _t in range(cap):
        nu = QT @ nu
        s = float(nu.sum())
        surv.append(s)
        if horizon is None and s < tail_tol:
            break
    return np.asarray(surv)


def expected_crossings(
    g: RegionTaggedGraph,
    start: int,
    into_set,
    absorbing,
    laziness: float = 0.0,
    budget: int = EXACT_VERTEX_BUDGET,
    residual_tol: float = 1e-10,
) -> float:
    """Expected entries into ``into_set`` from outside before absorption.

    Counts transitions x -> y with x outside the set and y inside it,
    accumulated until the walk first reaches ``absorbing``.  Computed from
    the expected visit counts of the absorbing chain, so the value does
    not depend on the laziness (holds create no crossings).
    """
    kernel = transition_kernel(g, laziness, budget=budget)
    absorbing = np.asarray(
        sorted(set(int(v) for v in np.atleast_1d(absorbing))), dtype=np.int64
    )
    if absorbing.size == 0:
        raise EmptySubsetError("absorbing set is empty")
    mask = np.zeros(g.n, dtype=bool)
    mask[absorbing] = True
    if mask[start]:
        return 0.0
    inside = np.zeros(g.n, dtype=bool)
    inside[np.asarray(np.atleast_1d(into_set), dtype=np.int64)] = True
    free = np.flatnonzero(~mask)
    pos = -np.ones(g.n, dtype=np.int64)
    pos[free] = np.arange(free.size)
    Q = kernel.P[free][:, free]
    A = (eye(free.size, format="csc") - Q.T).tocsc()
    rhs = np.zeros(free.size)
    rhs[pos[start]] = 1.0
    try:
        visits = splu(A).solve(rhs)
    except RuntimeError as exc:
        raise SingularSystemError(f"visit-count system is singular: {exc}") from exc
    res = _relative_residual(A, visits, rhs)
    if not np.isfinite(visits).all() or res > residual_tol:
        raise SingularSystemError(f"visit-count solve residual {res:.3g} too large")
    # sum the flow of visits across the boundary into the set
    total = 0.0
    P = kernel.P
    for x in free[~inside[free]]:
        row = P.indices[P.indptr[x] : P.indptr[x + 1]]
        vals = P.data[P.indptr[x] : P.indptr[x + 1]]
        sel = inside[row]
        if np.any(sel):
            total += visits[pos[x]] * float(vals[sel].sum())
    return float(total)


# ---------------------------------------------------------------------------
# bottleneck ratio and restricted evolution
# ---------------------------------------------------------------------------


def bottleneck_ratio(
    g: RegionTaggedGraph, subset, laziness: float = 0.0
) -> float:
    """Phi(S): stationary edge flow out of S over the mass of S."""
    if not (0.0 <= laziness < 1.0):
        raise ValueError("laziness must lie in [0, 1)")
    subset = np.asarray(sorted(set(int(v) for v in np.atleast_1d(subset))), dtype=np.int64)
    if subset.size == 0:
        raise EmptySubsetError("subset is empty")
    if subset.size >= g.n:
        raise FullSubsetError("subset covers every vertex")
    inside = np.zeros(g.n, dtype=bool)
    inside[subset] = True
    deg = g.degrees
    # for the simple walk each directed edge carries flow 1/(2|E|)
    cross = 0
    for v in subset:
        cross += int(np.sum(~inside[g.neighbors(v)]))
    degsum = int(deg[subset].sum())
    return (1.0 - laziness) * cross / degsum


def subset_mass(g: RegionTaggedGraph, subset) -> float:
    """pi(S) for the degree-proportional stationary law."""
    subset = np.asarray(sorted(set(int(v) for v in np.atleast_1d(subset))), dtype=np.int64)
    deg = g.degrees
    return float(deg[subset].sum()) / float(deg.sum())


@dataclass
class BottleneckReport:
    """Escape statistics of a vertex subset under the stationary law.

    ``restricted_law`` is the stationary law conditioned on the subset,
    stored as a full-length vector supported on the subset.  ``leakage``
    (travel time times flow ratio) and ``contraction`` (leakage divided by
    the remaining mass headroom) are filled only when the evaluation
    supplies a travel time and a target accuracy.
    """

    subset: np.ndarray
    mass: float
    restricted_law: np.ndarray
    flow_ratio: float
    laziness: float
    travel_time: float | None = None
    leakage: float | None = None
    contraction: float | None = None


def bottleneck_report(
    g: RegionTaggedGraph,
    subset,
    laziness: float = 0.0,
    travel_time: float | None = None,
    epsilon: float | None = None,
) -> BottleneckReport:
    """Assemble the escape report for ``subset``.

    With ``travel_time`` the leakage accumulated over that many steps is
    filled in; adding ``epsilon`` also fills the contraction factor, which
    must stay below 1 for the slow-mixing argument to apply.
    """
    flow_ratio = bottleneck_ratio(g, subset, laziness=laziness)
    subset = np.asarray(sorted(set(int(v) for v in np.atleast_1d(subset))), dtype=np.int64)
    mass = subset_mass(g, subset)
    deg = g.degrees.astype(np.float64)
    law = np.zeros(g.n)
    law[subset] = deg[subset]
    law /= law.sum()
    leakage = None
    contraction = None
    if travel_time is not None:
        if travel_time < 0:
            raise ValueError("travel_time must be nonnegative")
        leakage = float(travel_time) * flow_ratio
        if epsilon is not None:
            if leakage >= 1.0:
                raise PhiRangeError(f"accumulated leakage {leakage:.6g} is not below 1")
            if not 0.0 < epsilon < 1.0 - mass - leakage:
                raise EpsilonRangeError(
                    f"epsilon {epsilon:.6g} outside (0, {1.0 - mass - leakage:.6g})"
                )
            contraction = leakage / (1.0 - mass - epsilon)
    elif epsilon is not None:
        raise MissingInputError("epsilon was supplied without a travel time")
    return BottleneckReport(
        subset=subset,
        mass=mass,
        restricted_law=law,
        flow_ratio=flow_ratio,
        laziness=laziness,
        travel_time=None if travel_time is None else float(travel_time),
        leakage=leakage,
        contraction=contraction,
    )


@dataclass
class RestrictedEvolution:
    """TV drift of the restricted stationary law against its linear bound."""

    ts: np.ndarray
    drift: np.ndarray
    bound: np.ndarray
    phi: float
    violations: np.ndarray


def restricted_evolution_check(
    g: RegionTaggedGraph,
    subset,
    horizon: int,
    laziness: float = 0.5,
    budget: int = EXACT_VERTEX_BUDGET,
) -> RestrictedEvolution:
    """Evolve pi restricted to S and compare its TV drift with t*Phi(S).

    The drift ||mu_S P^t - mu_S||_TV is bounded by t * Phi(S) for the lazy
    walk; ``violations`` flags any t where the bound fails beyond roundoff.
    """
    kernel = transition_kernel(g, laziness, budget=budget)
    subset = np.asarray(sorted(set(int(v) for v in np.atleast_1d(subset))), dtype=np.int64)
    if subset.size == 0:
        raise EmptySubsetError("subset is empty")
    if subset.size >= g.n:
        raise FullSubsetError("subset covers every vertex")
    mu = np.zeros(g.n)
    mu[subset] = kernel.pi[subset]
    mu /= mu.sum()
    phi = bottleneck_ratio(g, subset, laziness=laziness)
    ts = np.arange(horizon + 1, dtype=np.int64)
    drift = np.zeros(horizon + 1)
    cur = mu.copy()
    for t in range(1, horizon + 1):
        cur = cur @ kernel.P
        drift[t] = tv_distance(cur, mu)
    bound = phi * ts
    violations = drift > bound + 1e-12
    return RestrictedEvolution(ts=ts, drift=drift, bound=bound, phi=phi, violations=violations)


# ---------------------------------------------------------------------------
# exports
# ---------------------------------------------------------------------------


def profile_to_csv(profile: MixingProfile, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "tv_distance", "worst_start"])
        for t, dval, s in zip(profile.ts, profile.d, profile.worst_start):
            w.writerow([int(t), float(dval), int(s)])


def moments_to_csv(moments: HittingMoments, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "mean", "variance"])
        for v in range(moments.mean.size):
            w.writerow([v, float(moments.mean[v]), float(moments.variance[v])])


def restricted_to_csv(check: RestrictedEvolution, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "drift", "bound", "violation"])
        for t, dr, b, viol in zip(check.ts, check.drift, check.bound, check.violations):
            w.writerow([int(t), float(dr), float(b), int(viol)])
