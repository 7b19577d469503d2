"""Kernel backend selection.

The compiled extension (``semcost.kernels._native``) is preferred when it
built; the pure NumPy/Python twin is always available. Set
``SEMCOST_PURE_PYTHON=1`` to force the fallback (used by the benchmark and
parity tests).
"""
from __future__ import annotations

import os

from . import pure as _pure

try:
    from . import _native as _native  # type: ignore[attr-defined]
except ImportError:
    _native = None

_force_pure = os.environ.get("SEMCOST_PURE_PYTHON", "") not in ("", "0")

if _native is not None and not _force_pure:
    ACTIVE_BACKEND = "native"
    edt_squared = _native.edt_squared
    mha_search = _native.mha_search
else:
    ACTIVE_BACKEND = "python"
    edt_squared = _pure.edt_squared
    mha_search = _pure.mha_search


def available_backends() -> dict:
    """Importable kernel modules keyed by name."""
    out = {"python": _pure}
    if _native is not None:
        out["native"] = _native
    return out
