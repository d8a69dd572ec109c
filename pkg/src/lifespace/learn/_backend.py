"""Kernel backend selection, done once at import.

The compiled extension is preferred; the pure-Python twin is the fallback.
Set LIFESPACE_PURE_PYTHON=1 to force the fallback (used by the parity tests
and the benchmark).
"""

import os

if os.environ.get("LIFESPACE_PURE_PYTHON"):
    from . import _core_py as core
else:
    try:
        from . import _core as core  # type: ignore[attr-defined]
    except ImportError:
        from . import _core_py as core


def backend_name() -> str:
    """Either "compiled" or "python"."""
    return core.BACKEND_NAME
