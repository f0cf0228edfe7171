"""Backend selection for the BEKK recursions.

The compiled extension is used when it imports; otherwise the pure-Python
module is loaded. Set ``SPILLNET_PURE_PYTHON=1`` to force the fallback.
"""
from __future__ import annotations

import os

from spillnet.bekk import _core_py

if os.environ.get("SPILLNET_PURE_PYTHON", "") not in ("", "0"):
    _impl = _core_py
    BACKEND = "python"
else:
    try:
        from spillnet.bekk import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _core_py
        BACKEND = "python"

loglik_score = _impl.loglik_score
filter_covariances = _impl.filter_covariances
simulate_path = _impl.simulate_path

__all__ = ["BACKEND", "loglik_score", "filter_covariances", "simulate_path"]
