"""Backend selection for the hot loops.

The compiled extension ``rfisim._kernels`` is used when it imports; otherwise
(or with ``RFISIM_PURE_PYTHON=1`` in the environment) the pure-Python twin is
used. Both expose the same three functions and return identical results.
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("RFISIM_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py
        BACKEND = "python"

segments_blocked = _impl.segments_blocked
prism_hits = _impl.prism_hits
activate_links = _impl.activate_links


def backends():
    """All importable backends by name, for benchmarks and cross-checks."""
    found = {"python": _kernels_py}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
