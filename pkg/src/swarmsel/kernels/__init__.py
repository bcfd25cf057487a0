"""Hot numeric kernels: compiled extension when available, numpy fallback otherwise.

The backend is picked once at import. Set SWARMSEL_NATIVE=0 before importing
to force the fallback even when the extension is built (used by the
benchmark and the parity tests). `BACKEND` names the active implementation.
"""

from __future__ import annotations

import os

from . import fallback as _fallback

_impl = _fallback
BACKEND = "fallback"

if os.environ.get("SWARMSEL_NATIVE", "1") != "0":
    try:
        from . import _native as _native_mod

        _impl = _native_mod
        BACKEND = "native"
    except ImportError:
        pass

lpq_responses = _impl.lpq_responses
knn_sqdist = _impl.knn_sqdist
pegasos_train = _impl.pegasos_train

__all__ = ["BACKEND", "lpq_responses", "knn_sqdist", "pegasos_train"]
