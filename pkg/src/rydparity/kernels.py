"""Backend selection for the RK4 kernels.

``RYDPARITY_BACKEND`` chooses the implementation: ``auto`` (default, compiled
if importable), ``cython`` (compiled or fail) or ``python``.
"""

from __future__ import annotations

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

BACKENDS = ("auto", "cython", "python")


def get_backend(name: str | None = None):
    name = (name or os.environ.get("RYDPARITY_BACKEND", "auto")).lower()
    if name not in BACKENDS:
        raise ValueError(f"unknown backend {name!r}; choose from {BACKENDS}")
    if name == "python":
        return _kernels_py
    if _compiled is None:
        if name == "cython":
            raise ImportError("compiled kernels are not built; run pip install -e .")
        return _kernels_py
    return _compiled


def backend_name(name: str | None = None) -> str:
    return "cython" if get_backend(name) is _compiled and _compiled is not None else "python"


def compiled_available() -> bool:
    return _compiled is not None
