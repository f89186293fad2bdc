"""Kernel selection: compiled extension when importable, numpy fallback otherwise.

Set ``HEAVYTAIL_PURE=1`` to force the fallback.
"""

import os

from . import _fallback

BACKEND = "python"
_impl = _fallback

if os.environ.get("HEAVYTAIL_PURE", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

tau_scan = _impl.tau_scan
min_cover = _impl.min_cover
cond_bisect = _impl.cond_bisect
