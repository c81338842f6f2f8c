"""Kernel backend selection.

The compiled ``_kernels`` extension is used when it imports; otherwise the
numpy ``_fallback`` module takes over. Set ``AFFINEWALK_PURE=1`` to force the
fallback (the test-suite and the benchmark exercise both).
"""
import os

from . import _fallback

try:
    if os.environ.get("AFFINEWALK_PURE"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _impl
    BACKEND = "cython"
except ImportError:
    _impl = _fallback
    BACKEND = "python"


def available_backends():
    """Map backend name to module for every backend that imports."""
    out = {"python": _fallback}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["cython"] = _kernels
    return out


evolve_mod_curve = _impl.evolve_mod_curve
carry_dp_log = _impl.carry_dp_log
hhms_levels = _impl.hhms_levels
