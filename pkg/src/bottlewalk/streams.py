"""Counter-based per-trajectory random streams.

Every sampled trajectory i gets its own splitmix64 stream derived from
(seed, i).  A stream is a single uint64 state; each draw adds a fixed odd
constant and applies the splitmix64 finalizer.  The same integer arithmetic
is implemented in the numba kernels, so the two backends consume identical
numbers, and the thread count cannot change any output: trajectory i always
sees draw sequence i regardless of which worker runs it.
"""

import hashlib

import numpy as np

U64 = np.uint64

GAMMA = U64(0x9E3779B97F4A7C15)
MIX1 = U64(0xBF58476D1CE4E5B9)
MIX2 = U64(0x94D049BB133111EB)
STREAM_SALT = U64(0xD1B54A32D192ED03)

_INV_2_53 = np.float64(2.0**-53)


def mix64(z):
    """splitmix64 finalizer; works on uint64 scalars and arrays."""
    # uint64 wrap-around is intended; silence numpy's scalar overflow warning
    with np.errstate(over="ignore"):
        z = U64(z) if np.isscalar(z) else z.astype(np.uint64, copy=True)
        z = (z ^ (z >> U64(30))) * MIX1
        z = (z ^ (z >> U64(27))) * MIX2
        return z ^ (z >> U64(31))


def stream_states(seed: int, start: int, count: int) -> np.ndarray:
    """Initial states for trajectories start, ..., start+count-1."""
    idx = np.arange(start, start + count, dtype=np.uint64)
    base = mix64(U64(seed & 0xFFFFFFFFFFFFFFFF) ^ STREAM_SALT)
    with np.errstate(over="ignore"):
        return mix64(base + idx * GAMMA)


def draw_uniform(states: np.ndarray) -> np.ndarray:
    """Advance every stream once, in place, and return uniforms in [0, 1)."""
    with np.errstate(over="ignore"):
        states += GAMMA
    z = mix64(states)
    return (z >> U64(11)).astype(np.float64) * _INV_2_53


def label_seed(seed: int, label: str) -> int:
    """Derive a sub-seed for an independent purpose (stable across runs)."""
    digest = hashlib.sha256(label.encode("utf-8")).digest()
    tag = int.from_bytes(digest[:8], "little")
    return int(mix64(U64(seed & 0xFFFFFFFFFFFFFFFF) ^ U64(tag)))
