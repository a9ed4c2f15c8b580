"""Batched numpy trajectory kernels, the fallback backend.

Whole batches of walkers advance one step at a time.  Every trajectory
draws only from its own stream, so filtering finished walkers out of the
batch never shifts anyone else's randomness, and the output matches the
scalar numba backend bit for bit.
"""

from __future__ import annotations

import numpy as np

from . import streams


def _advance(indptr, indices, pos, states, active, alpha):
    """One lazy-walk step for the trajectories listed in ``active``."""
    sub = states[active]
    u = streams.draw_uniform(sub)
    states[active] = sub
    x = pos[active]
    lo = indptr[x]
    deg = (indptr[x + 1] - lo).astype(np.float64)
    v = (u - alpha) / (1.0 - alpha)
    j = (v * deg).astype(np.int64)
    j = np.minimum(j, indptr[x + 1] - lo - 1)
    moved = indices[lo + j]
    pos[active] = np.where(u < alpha, x, moved)


def walk_hit(indptr, indices, start, target, alpha, seed, n_traj, cap, offset):
    states = streams.stream_states(seed, offset, n_traj)
    pos = np.full(n_traj, start, dtype=np.int64)
    times = np.full(n_traj, cap, dtype=np.int64)
    hit = np.zeros(n_traj, dtype=np.uint8)
    if target[start]:
        times[:] = 0
        hit[:] = 1
        return times, hit
    active = np.arange(n_traj, dtype=np.int64)
    t = 0
    while active.size and t < cap:
        t += 1
        _advance(indptr, indices, pos, states, active, alpha)
        arrived = target[pos[active]] == 1
        done = active[arrived]
        times[done] = t
        hit[done] = 1
        active = active[~arrived]
    return times, hit


def walk_race(indptr, indices, start, a_set, b_set, alpha, seed, n_traj, cap, offset):
    states = streams.stream_states(seed, offset, n_traj)
    pos = np.full(n_traj, start, dtype=np.int64)
    times = np.full(n_traj, cap, dtype=np.int64)
    which = np.full(n_traj, 255, dtype=np.uint8)
    if a_set[start]:
        times[:] = 0
        which[:] = 1
        return times, which
    if b_set[start]:
        times[:] = 0
        which[:] = 0
        return times, which
    active = np.arange(n_traj, dtype=np.int64)
    t = 0
    while active.size and t < cap:
        t += 1
        _advance(indptr, indices, pos, states, active, alpha)
        cur = pos[active]
        in_a = a_set[cur] == 1
        in_b = (~in_a) & (b_set[cur] == 1)
        done = in_a | in_b
        times[active[done]] = t
        which[active[in_a]] = 1
        which[active[in_b]] = 0
        active = active[~done]
    return times, which


def walk_return_counts(
    indptr, indices, start, return_set, target, alpha, seed, n_traj, cap, offset
):
    states = streams.stream_states(seed, offset, n_traj)
    pos = np.full(n_traj, start, dtype=np.int64)
    counts = np.zeros(n_traj, dtype=np.int64)
    completed = np.zeros(n_traj, dtype=np.uint8)
    active = np.arange(n_traj, dtype=np.int64)
    t = 0
    while active.size and t < cap:
        t += 1
        prev = pos[active].copy()
        _advance(indptr, indices, pos, states, active, alpha)
        cur = pos[active]
        done = target[cur] == 1
        completed[active[done]] = 1
        # a return is an arrival into the return set from outside it
        arrived = (~done) & (return_set[cur] == 1) & (return_set[prev] == 0)
        counts[active[arrived]] += 1
        active = active[~done]
    return counts, completed


def sample_excursions(
    indptr, indices, base, allowed, alpha, seed, n_traj, cap, offset
):
    states = streams.stream_states(seed, offset, n_traj)
    pos = np.full(n_traj, base, dtype=np.int64)
    lengths = np.full(n_traj, -1, dtype=np.int64)
    cur_len = np.zeros(n_traj, dtype=np.int64)
    attempts = np.ones(n_traj, dtype=np.int64)
    steps = np.zeros(n_traj, dtype=np.int64)
    active = np.arange(n_traj, dtype=np.int64)
    while active.size:
        _advance(indptr, indices, pos, states, active, alpha)
        steps[active] += 1
        cur_len[active] += 1
        cur = pos[active]
        accepted = cur == base
        done = active[accepted]
        lengths[done] = cur_len[done]
        rejected = (~accepted) & (allowed[cur] == 0)
        reset = active[rejected]
        pos[reset] = base
        cur_len[reset] = 0
        attempts[reset] += 1
        remaining = active[~accepted]
        active = remaining[steps[remaining] < cap]
    return lengths, attempts


def _mirror_move(dir_ptr, dir_idx, y, u):
    """Uniform choice among the level-direction neighbors; hold if none."""
    lo = dir_ptr[y]
    deg = dir_ptr[y + 1] - lo
    j = (u * deg.astype(np.float64)).astype(np.int64)
    j = np.minimum(j, deg - 1)
    out = y.copy()
    has = deg > 0
    out[has] = dir_idx[lo[has] + j[has]]
    return out


def run_coupling(
    indptr,
    indices,
    up_ptr,
    up_idx,
    down_ptr,
    down_idx,
    lat_ptr,
    lat_idx,
    dist0,
    t0mask,
    pi_cum,
    x0,
    y0,
    origin,
    alpha,
    seed,
    n_traj,
    horizon,
    offset,
    tally,
    counts,
):
    n = indptr.shape[0] - 1
    states = streams.stream_states(seed, offset, n_traj)
    posx = np.full(n_traj, x0, dtype=np.int64)
    if y0 >= 0:
        posy = np.full(n_traj, y0, dtype=np.int64)
    else:
        u0 = streams.draw_uniform(states)
        posy = np.searchsorted(pi_cum, u0, side="right").astype(np.int64)
        posy = np.minimum(posy, n - 1)
    meet = np.full(n_traj, horizon + 1, dtype=np.int64)
    met = posx == posy
    meet[met] = 0
    hit0 = posx == origin
    y_at_hit = np.full(n_traj, -1, dtype=np.int64)
    y_at_hit[hit0] = posy[hit0]
    mirror = (
        (~met)
        & hit0
        & (dist0[posx] == dist0[posy])
        & (t0mask[posx] == 1)
        & (t0mask[posy] == 1)
    )
    everyone = np.arange(n_traj, dtype=np.int64)
    for t in range(1, horizon + 1):
        oldx = posx
        newx = posx.copy()
        _advance(indptr, indices, newx, states, everyone, alpha)
        uy = streams.draw_uniform(states)

        newy = posy.copy()
        # mirrored phase: copy the level direction of a real move of the
        # first chain; a hold of the first chain mirrors as a hold
        mir = mirror
        moved = mir & (newx != oldx)
        if np.any(moved):
            delta = dist0[newx[moved]] - dist0[oldx[moved]]
            ym = posy[moved]
            um = uy[moved]
            res = ym.copy()
            for d, ptr, idx in ((1, up_ptr, up_idx), (-1, down_ptr, down_idx), (0, lat_ptr, lat_idx)):
                sel = delta == d
                if np.any(sel):
                    res[sel] = _mirror_move(ptr, idx, ym[sel], um[sel])
            newy[moved] = res
        free = (~met) & (~mirror)
        if np.any(free):
            idx_free = everyone[free]
            yv = posy[idx_free]
            lo = indptr[yv]
            deg = (indptr[yv + 1] - lo).astype(np.float64)
            v = (uy[idx_free] - alpha) / (1.0 - alpha)
            j = (v * deg).astype(np.int64)
            j = np.minimum(j, indptr[yv + 1] - lo - 1)
            stepped = indices[lo + j]
            newy[idx_free] = np.where(uy[idx_free] < alpha, yv, stepped)
        newy[met] = newx[met]

        if tally:
            rows = posy[mir]
            cols = newy[mir]
            np.add.at(counts, (rows, cols), 1)

        posx, posy = newx, newy
        just_met = (~met) & (posx == posy)
        meet[just_met] = t
        met |= just_met
        newly_hit = (~hit0) & (posx == origin)
        y_at_hit[newly_hit] = posy[newly_hit]
        hit0 |= newly_hit
        mirror = (
            (~met)
            & hit0
            & (dist0[posx] == dist0[posy])
            & (t0mask[posx] == 1)
            & (t0mask[posy] == 1)
        )
    return meet, posx, posy, y_at_hit
