"""Scalar numba trajectory kernels, the default backend when numba imports.

The splitmix64 stream arithmetic below must stay identical to
:mod:`bottlewalk.streams`; the backend equivalence test compares outputs
bit for bit.  Kernels release the GIL so the Monte Carlo layer can chunk
trajectories across threads without changing any stream.
"""

from __future__ import annotations

import numpy as np
from numba import njit

U64 = np.uint64
GAMMA = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
STREAM_SALT = U64(0xD1B54A32D192ED03)
INV_2_53 = np.float64(2.0**-53)


@njit(cache=True, nogil=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * MIX1
    z = (z ^ (z >> U64(27))) * MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, nogil=True, inline="always")
def _state0(seed, idx):
    base = _mix64(seed ^ STREAM_SALT)
    return _mix64(base + U64(idx) * GAMMA)


@njit(cache=True, nogil=True, inline="always")
def _next_uniform(state):
    state = state + GAMMA
    u = np.float64(_mix64(state) >> U64(11)) * INV_2_53
    return state, u


@njit(cache=True, nogil=True, inline="always")
def _step(indptr, indices, x, u, alpha):
    if u < alpha:
        return x
    v = (u - alpha) / (1.0 - alpha)
    lo = indptr[x]
    deg = indptr[x + 1] - lo
    j = np.int64(v * np.float64(deg))
    if j >= deg:
        j = deg - 1
    return indices[lo + j]


@njit(cache=True, nogil=True)
def walk_hit(indptr, indices, start, target, alpha, seed, n_traj, cap, offset):
    times = np.full(n_traj, cap, dtype=np.int64)
    hit = np.zeros(n_traj, dtype=np.uint8)
    for i in range(n_traj):
        state = _state0(seed, offset + i)
        x = start
        t = np.int64(0)
        done = target[x] == 1
        while not done and t < cap:
            state, u = _next_uniform(state)
            x = _step(indptr, indices, x, u, alpha)
            t += 1
            done = target[x] == 1
        if done:
            times[i] = t
            hit[i] = 1
    return times, hit


@njit(cache=True, nogil=True)
def walk_race(indptr, indices, start, a_set, b_set, alpha, seed, n_traj, cap, offset):
    times = np.full(n_traj, cap, dtype=np.int64)
    which = np.full(n_traj, 255, dtype=np.uint8)
    for i in range(n_traj):
        state = _state0(seed, offset + i)
        x = start
        t = np.int64(0)
        w = np.uint8(255)
        if a_set[x] == 1:
            w = np.uint8(1)
        elif b_set[x] == 1:
            w = np.uint8(0)
        while w == 255 and t < cap:
            state, u = _next_uniform(state)
            x = _step(indptr, indices, x, u, alpha)
            t += 1
            if a_set[x] == 1:
                w = np.uint8(1)
            elif b_set[x] == 1:
                w = np.uint8(0)
        if w != 255:
            times[i] = t
            which[i] = w
    return times, which


@njit(cache=True, nogil=True)
def walk_return_counts(
    indptr, indices, start, return_set, target, alpha, seed, n_traj, cap, offset
):
    counts = np.zeros(n_traj, dtype=np.int64)
    completed = np.zeros(n_traj, dtype=np.uint8)
    for i in range(n_traj):
        state = _state0(seed, offset + i)
        x = start
        t = np.int64(0)
        while t < cap:
            prev = x
            state, u = _next_uniform(state)
            x = _step(indptr, indices, x, u, alpha)
            t += 1
            if target[x] == 1:
                completed[i] = 1
                break
            if return_set[x] == 1 and return_set[prev] == 0:
                counts[i] += 1
    return counts, completed


@njit(cache=True, nogil=True)
def sample_excursions(
    indptr, indices, base, allowed, alpha, seed, n_traj, cap, offset
):
    lengths = np.full(n_traj, -1, dtype=np.int64)
    attempts = np.ones(n_traj, dtype=np.int64)
    for i in range(n_traj):
        state = _state0(seed, offset + i)
        x = base
        cur_len = np.int64(0)
        steps = np.int64(0)
        while steps < cap:
            state, u = _next_uniform(state)
            x = _step(indptr, indices, x, u, alpha)
            steps += 1
            cur_len += 1
            if x == base:
                lengths[i] = cur_len
                break
            if allowed[x] == 0:
                x = base
                cur_len = 0
                attempts[i] += 1
    return lengths, attempts


@njit(cache=True, nogil=True, inline="always")
def _cum_index(cum, u):
    # count of entries <= u, matching numpy searchsorted side="right"
    lo = np.int64(0)
    hi = np.int64(cum.shape[0])
    while lo < hi:
        mid = (lo + hi) // 2
        if cum[mid] <= u:
            lo = mid + 1
        else:
            hi = mid
    return lo


@njit(cache=True, nogil=True)
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
    meet = np.full(n_traj, horizon + 1, dtype=np.int64)
    x_end = np.empty(n_traj, dtype=np.int64)
    y_end = np.empty(n_traj, dtype=np.int64)
    y_at_hit = np.full(n_traj, -1, dtype=np.int64)
    for i in range(n_traj):
        state = _state0(seed, offset + i)
        x = np.int64(x0)
        if y0 >= 0:
            y = np.int64(y0)
        else:
            state, u0 = _next_uniform(state)
            y = _cum_index(pi_cum, u0)
            if y > n - 1:
                y = np.int64(n - 1)
        mt = np.int64(horizon + 1)
        if x == y:
            mt = 0
        hit0 = x == origin
        if hit0:
            y_at_hit[i] = y
        mirror = (
            mt > horizon
            and hit0
            and dist0[x] == dist0[y]
            and t0mask[x] == 1
            and t0mask[y] == 1
        )
        for t in range(1, horizon + 1):
            state, ux = _next_uniform(state)
            state, uy = _next_uniform(state)
            oldx = x
            x = _step(indptr, indices, x, ux, alpha)
            if mt <= horizon:
                y = x
            elif mirror:
                fromy = y
                if x != oldx:
                    delta = dist0[x] - dist0[oldx]
                    if delta > 0:
                        lo = up_ptr[y]
                        d = up_ptr[y + 1] - lo
                    elif delta < 0:
                        lo = down_ptr[y]
                        d = down_ptr[y + 1] - lo
                    else:
                        lo = lat_ptr[y]
                        d = lat_ptr[y + 1] - lo
                    if d > 0:
                        j = np.int64(uy * np.float64(d))
                        if j >= d:
                            j = d - 1
                        if delta > 0:
                            y = up_idx[lo + j]
                        elif delta < 0:
                            y = down_idx[lo + j]
                        else:
                            y = lat_idx[lo + j]
                if tally == 1:
                    counts[fromy, y] += 1
                if x == y:
                    mt = t
            else:
                y = _step(indptr, indices, y, uy, alpha)
                if x == y:
                    mt = t
            if not hit0 and x == origin:
                hit0 = True
                y_at_hit[i] = y
            mirror = (
                mt > horizon
                and hit0
                and dist0[x] == dist0[y]
                and t0mask[x] == 1
                and t0mask[y] == 1
            )
        meet[i] = mt
        x_end[i] = x
        y_end[i] = y
    return meet, x_end, y_end, y_at_hit
