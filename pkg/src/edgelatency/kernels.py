"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``EDGELATENCY_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pycore

BACKEND = "python"
if not os.environ.get("EDGELATENCY_PURE_PYTHON"):
    try:
        from . import _core as _impl

        BACKEND = "cython"
    except ImportError:  # pragma: no cover - depends on the build
        _impl = _pycore
else:
    _impl = _pycore

scan_accumulate = _impl.scan_accumulate
lower_bound_scan = _impl.lower_bound_scan
first_full_rank = _impl.first_full_rank
inactivation_decode = _impl.inactivation_decode
krawtchouk_ratio_q2 = _impl.krawtchouk_ratio_q2

__all__ = ["BACKEND", "scan_accumulate", "lower_bound_scan", "first_full_rank", "inactivation_decode",
           "krawtchouk_ratio_q2"]
