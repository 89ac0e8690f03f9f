"""Backend selection for the iterative capacity kernel.

Prefers the compiled extension when it was built; falls back to the numpy
implementation otherwise.  Set ``GAMECAP_PURE_PYTHON=1`` to force the
fallback (useful for benchmarking and debugging).  Both backends implement
the same ``gba_run`` contract and agree to floating-point roundoff.
"""

from __future__ import annotations

import os

from . import gba_py

if os.environ.get("GAMECAP_PURE_PYTHON"):
    _impl = gba_py
    BACKEND = "python"
else:
    try:
        from . import gba_cy as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = gba_py
        BACKEND = "python"

gba_run = _impl.gba_run

__all__ = ["gba_run", "BACKEND", "gba_py"]
