"""Kernel backend selection.

The hot geometry kernels (rotated IoU, NMS) are written once as plain
numpy/scalar code and compiled with numba when available. Set

    HOLODET_BACKEND=numpy   force the pure-numpy interpretation (no JIT)
    HOLODET_BACKEND=numba   require numba, fail if it cannot be imported
    HOLODET_BACKEND=auto    use numba when importable (default)

The flag is read once at import time, so it must be set before the first
``holodet`` import. ``benchmarks/bench_kernels.py`` compares both paths.
"""

import os

from .errors import ConfigError

BACKEND_ENV_VAR = "HOLODET_BACKEND"
WORKERS_ENV_VAR = "HOLODET_MAX_WORKERS"

_VALID = ("auto", "numba", "numpy")


def _resolve() -> str:
    requested = os.environ.get(BACKEND_ENV_VAR, "auto").strip().lower() or "auto"
    if requested not in _VALID:
        raise ConfigError(
            f"{BACKEND_ENV_VAR}={requested!r}: expected one of {', '.join(_VALID)}"
        )
    if requested == "numpy":
        return "numpy"
    try:
        import numba  # noqa: F401
    except ImportError:
        if requested == "numba":
            raise ConfigError(
                f"{BACKEND_ENV_VAR}=numba but numba is not importable"
            ) from None
        return "numpy"
    return "numba"


ACTIVE_BACKEND = _resolve()


def active_backend() -> str:
    """Name of the kernel backend selected at import time."""
    return ACTIVE_BACKEND


def maybe_jit(**jit_kwargs):
    """``numba.njit`` under the numba backend, identity decorator otherwise."""
    if ACTIVE_BACKEND == "numba":
        import numba

        return numba.njit(**jit_kwargs)

    def passthrough(func):
        return func

    return passthrough


def max_workers(default: int = 1) -> int:
    """Worker cap from the environment; used by stages that can fan out."""
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw is None or not raw.strip():
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV_VAR}={raw!r}: expected a positive integer") from None
    if value < 1:
        raise ConfigError(f"{WORKERS_ENV_VAR}={raw!r}: expected a positive integer")
    return value
