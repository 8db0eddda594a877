"""Pick the simulation kernels: compiled when importable, numpy otherwise.

``EXPSHRINK_BACKEND=python`` forces the numpy kernels.
"""
from __future__ import annotations

import os
from types import ModuleType

from . import _pykernels

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("compiled", "python")


def available() -> tuple[str, ...]:
    return BACKENDS if _compiled is not None else ("python",)


def default_backend() -> str:
    forced = os.environ.get("EXPSHRINK_BACKEND", "").strip().lower()
    if forced == "python" or _compiled is None:
        return "python"
    return "compiled"


def get_kernels(name: str | None = None) -> ModuleType:
    name = default_backend() if name in (None, "auto") else name
    if name == "python":
        return _pykernels
    if name == "compiled":
        if _compiled is None:
            raise ImportError("compiled kernel is not built; reinstall with Cython available")
        return _compiled
    raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
