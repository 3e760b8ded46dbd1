"""Kernel backend selection.

Hot inner loops ship in two implementations: numba ``@njit`` and pure
numpy. The active one is picked from the ``PERTURBSHIELD_BACKEND``
environment variable at import time:

    PERTURBSHIELD_BACKEND=numba   force numba (error if not installed)
    PERTURBSHIELD_BACKEND=numpy   force the pure-numpy fallback
    unset / auto                  numba when importable, else numpy

Both paths produce bit-identical outputs; ``set_backend`` exists so the
benchmark and the cross-backend tests can flip at runtime.
"""

from __future__ import annotations

import os

_VALID = ("numba", "numpy")

try:
    import numba  # noqa: F401

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


def _from_env() -> str:
    raw = os.environ.get("PERTURBSHIELD_BACKEND", "auto").strip().lower()
    if raw in ("", "auto"):
        return "numba" if _HAVE_NUMBA else "numpy"
    if raw not in _VALID:
        raise ValueError(
            f"PERTURBSHIELD_BACKEND must be 'numba' or 'numpy', got {raw!r}"
        )
    if raw == "numba" and not _HAVE_NUMBA:
        raise ImportError("PERTURBSHIELD_BACKEND=numba but numba is not installed")
    return raw


_backend = _from_env()


def active_backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in _VALID:
        raise ValueError(f"backend must be one of {_VALID}, got {name!r}")
    if name == "numba" and not _HAVE_NUMBA:
        raise ImportError("numba backend requested but numba is not installed")
    _backend = name


def use_numba() -> bool:
    return _backend == "numba"
