"""Backend dispatch for the trajectory kernels.

Every function takes the graph plus sampling parameters and forwards to
the selected backend (numba or numpy).  ``seed`` is the already-derived
experiment seed; ``stream_offset`` shifts which per-trajectory streams are
used, which lets callers split one logical batch across threads without
changing any trajectory.
"""

from __future__ import annotations

import numpy as np

from . import backend as _backend
from .errors import MissingMarkError
from .graphs import Region, RegionTaggedGraph, distances_from


def _impl(backend: str | None):
    resolved = _backend.resolve_backend(backend)
    if resolved == "numba":
        from . import _kernels_numba as mod
    else:
        from . import _kernels_numpy as mod
    return mod


def vertex_mask(n: int, vertices) -> np.ndarray:
    """uint8 membership mask over the vertex range."""
    mask = np.zeros(n, dtype=np.uint8)
    idx = np.asarray(np.atleast_1d(vertices), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= n:
            raise ValueError("vertex out of range")
        mask[idx] = 1
    return mask


def _common(g: RegionTaggedGraph, laziness: float, n_traj: int, cap: int):
    if not (0.0 <= laziness < 1.0):
        raise ValueError("laziness must lie in [0, 1)")
    if n_traj < 0:
        raise ValueError("n_traj must be >= 0")
    if cap < 1:
        raise ValueError("step cap must be >= 1")


def run_hit(
    g: RegionTaggedGraph,
    start: int,
    targets,
    laziness: float,
    seed: int,
    n_traj: int,
    cap: int,
    stream_offset: int = 0,
    backend: str | None = None,
):
    """Hitting times of a target set; (times, hit-flag) per trajectory."""
    _common(g, laziness, n_traj, cap)
    mod = _impl(backend)
    times, hit = mod.walk_hit(
        g.indptr,
        g.indices,
        np.int64(start),
        vertex_mask(g.n, targets),
        float(laziness),
        np.uint64(seed),
        int(n_traj),
        np.int64(cap),
        np.int64(stream_offset),
    )
    return times, hit.astype(bool)


def run_race(
    g: RegionTaggedGraph,
    start: int,
    first_set,
    second_set,
    laziness: float,
    seed: int,
    n_traj: int,
    cap: int,
    stream_offset: int = 0,
    backend: str | None = None,
):
    """Which of two sets the walk reaches first (1, 0, or 255 undecided)."""
    _common(g, laziness, n_traj, cap)
    mod = _impl(backend)
    return mod.walk_race(
        g.indptr,
        g.indices,
        np.int64(start),
        vertex_mask(g.n, first_set),
        vertex_mask(g.n, second_set),
        float(laziness),
        np.uint64(seed),
        int(n_traj),
        np.int64(cap),
        np.int64(stream_offset),
    )


def run_return_counts(
    g: RegionTaggedGraph,
    start: int,
    return_set,
    targets,
    laziness: float,
    seed: int,
    n_traj: int,
    cap: int,
    stream_offset: int = 0,
    backend: str | None = None,
):
    """Arrivals into ``return_set`` from outside before the target is hit."""
    _common(g, laziness, n_traj, cap)
    mod = _impl(backend)
    counts, completed = mod.walk_return_counts(
        g.indptr,
        g.indices,
        np.int64(start),
        vertex_mask(g.n, return_set),
        vertex_mask(g.n, targets),
        float(laziness),
        np.uint64(seed),
        int(n_traj),
        np.int64(cap),
        np.int64(stream_offset),
    )
    return counts, completed.astype(bool)


def run_excursions(
    g: RegionTaggedGraph,
    base: int,
    allowed,
    laziness: float,
    seed: int,
    n_traj: int,
    cap: int,
    stream_offset: int = 0,
    backend: str | None = None,
):
    """Lengths of excursions from ``base`` conditioned to stay in ``allowed``.

    Excursions that leave the allowed set are rejected and resampled from
    the same stream; ``attempts`` counts tries per accepted sample.  Length
    -1 marks a trajectory whose step budget ran out first.
    """
    _common(g, laziness, n_traj, cap)
    mod = _impl(backend)
    return mod.sample_excursions(
        g.indptr,
        g.indices,
        np.int64(base),
        vertex_mask(g.n, allowed),
        float(laziness),
        np.uint64(seed),
        int(n_traj),
        np.int64(cap),
        np.int64(stream_offset),
    )


def _direction_csr(indptr, indices, dist0, want: int):
    """Adjacency restricted to neighbors whose level moves by ``want``."""
    n = indptr.shape[0] - 1
    row_deg = np.diff(indptr)
    rows = np.repeat(np.arange(n, dtype=np.int64), row_deg)
    delta = dist0[indices] - dist0[rows]
    if want > 0:
        sel = delta > 0
    elif want < 0:
        sel = delta < 0
    else:
        sel = delta == 0
    cnt = np.bincount(rows[sel], minlength=n)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(cnt, out=ptr[1:])
    return ptr, indices[sel].astype(np.int64)


def run_coupling(
    g: RegionTaggedGraph,
    x_start: int,
    y_start: int | None,
    laziness: float,
    seed: int,
    n_traj: int,
    horizon: int,
    stream_offset: int = 0,
    backend: str | None = None,
    tally: bool = False,
):
    """Two-phase coupling of a worst-start walk with a shadow walk.

    The chains move independently until the first chain has visited the
    origin and both sit in the core region at the same distance from it;
    from there the shadow mirrors the level direction of every real move
    of the first chain (holding when it has no neighbor in that
    direction), which can only shrink the level gap.  ``y_start=None``
    starts the shadow from the stationary law, costing one extra draw per
    trajectory.  Both chains consume one draw per step throughout, so the
    first chain's marginal law is exactly the lazy walk from ``x_start``.

    Returns (meet_time, x_end, y_end, y_at_origin_hit, counts);
    meet_time is horizon+1 when the chains have not met, and
    y_at_origin_hit is the shadow's position when the first chain first
    visits the origin (-1 if that never happens).  With ``tally=True``,
    counts[u, v] accumulates the shadow's mirrored-phase transitions for
    a marginal audit; otherwise counts is a 1x1 placeholder.
    """
    _common(g, laziness, n_traj, horizon)
    if g.marks is None:
        raise MissingMarkError("coupling levels need a marked origin")
    if not 0 <= x_start < g.n:
        raise ValueError("x_start out of range")
    if y_start is not None and not 0 <= y_start < g.n:
        raise ValueError("y_start out of range")
    origin = g.marks.origin
    dist0 = distances_from(g, origin).astype(np.int64)
    t0mask = (g.region == int(Region.CORE)).astype(np.uint8)
    up_ptr, up_idx = _direction_csr(g.indptr, g.indices, dist0, 1)
    down_ptr, down_idx = _direction_csr(g.indptr, g.indices, dist0, -1)
    lat_ptr, lat_idx = _direction_csr(g.indptr, g.indices, dist0, 0)
    deg = g.degrees.astype(np.float64)
    pi_cum = np.cumsum(deg / deg.sum())
    shape = (g.n, g.n) if tally else (1, 1)
    counts = np.zeros(shape, dtype=np.int64)
    mod = _impl(backend)
    meet, x_end, y_end, y_at_hit = mod.run_coupling(
        g.indptr,
        g.indices,
        up_ptr,
        up_idx,
        down_ptr,
        down_idx,
        lat_ptr,
        lat_idx,
        dist0,
        t0mask,
        pi_cum,
        np.int64(x_start),
        np.int64(-1 if y_start is None else y_start),
        np.int64(origin),
        float(laziness),
        np.uint64(seed),
        int(n_traj),
        np.int64(horizon),
        np.int64(stream_offset),
        np.uint8(1 if tally else 0),
        counts,
    )
    return meet, x_end, y_end, y_at_hit, counts
