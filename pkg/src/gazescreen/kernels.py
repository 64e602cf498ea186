"""Backend selection for the hot loops.

The compiled ``_speedups`` extension is used when it imports; otherwise, or
when ``GAZESCREEN_PURE=1`` is set, the pure-Python ``_fallback`` is used.
"""
import os

from . import _fallback

if os.environ.get("GAZESCREEN_PURE") == "1":
    _impl = _fallback
else:
    try:
        from . import _speedups as _impl
    except ImportError:
        _impl = _fallback

BACKEND = "compiled" if _impl is not _fallback else "python"

idt_windows = _impl.idt_windows
ivt_runs = _impl.ivt_runs
dwell_times = _impl.dwell_times
blur_separable = _impl.blur_separable


def backends():
    """Map of every importable backend name to its module."""
    found = {"python": _fallback}
    try:
        from . import _speedups
        found["compiled"] = _speedups
    except ImportError:
        pass
    return found
