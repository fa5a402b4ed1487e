"""Selector for the short-vector enumeration kernel.

Prefers the compiled extension ``_speedup`` and falls back to the exact
pure-Python twin ``_kernel_pure`` when the extension is unavailable.
Setting the environment variable ``LATSHAPE_PURE_PYTHON`` (to any
non-empty value) forces the fallback; the choice is made once at import
time.  Both implementations expose the same functions and must return
identical results.
"""

import os

from . import _kernel_pure

if os.environ.get("LATSHAPE_PURE_PYTHON"):
    _impl = _kernel_pure
else:
    try:
        from . import _speedup as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernel_pure

short_vectors = _impl.short_vectors
vectors_with_norm = _impl.vectors_with_norm


def implementation_name() -> str:
    """'compiled' when the extension is active, 'pure' otherwise."""
    return "pure" if _impl is _kernel_pure else "compiled"
