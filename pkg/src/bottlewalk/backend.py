"""Backend selection for the sampling kernels.

The trajectory kernels exist twice: a numba ``@njit`` version and a pure
numpy version that advances whole batches of walkers per step.  Both consume
the same per-trajectory counter-based random streams, so for a fixed seed
they produce bit-identical output.  Selection order:

1. the ``BOTTLEWALK_BACKEND`` environment variable (``numba`` or ``numpy``),
2. ``numba`` whenever the import succeeds, else ``numpy``.
"""

import os

try:
    import numba  # noqa: F401

    NUMBA_AVAILABLE = True
except ImportError:
    NUMBA_AVAILABLE = False

_ENV_VAR = "BOTTLEWALK_BACKEND"
_VALID = ("numba", "numpy")


def default_backend() -> str:
    """Resolve the backend name from the environment."""
    choice = os.environ.get(_ENV_VAR, "").strip().lower()
    if choice:
        if choice not in _VALID:
            raise ValueError(
                f"{_ENV_VAR} must be one of {_VALID}, got {choice!r}"
            )
        if choice == "numba" and not NUMBA_AVAILABLE:
            raise ValueError(f"{_ENV_VAR}=numba but numba is not importable")
        return choice
    return "numba" if NUMBA_AVAILABLE else "numpy"


def resolve_backend(backend: str | None) -> str:
    """Normalize an explicit backend argument (None means 'use default')."""
    if backend is None:
        return default_backend()
    if backend not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {backend!r}")
    if backend == "numba" and not NUMBA_AVAILABLE:
        raise ValueError("numba backend requested but numba is not importable")
    return backend
