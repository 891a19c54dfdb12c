"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the
numpy fallback is used.  Set DSCFLOW_BACKEND=python or =compiled to
force a choice (forcing `compiled` raises if the extension is absent).
"""

import os

_requested = os.environ.get("DSCFLOW_BACKEND", "").strip().lower() or None
if _requested not in (None, "python", "compiled"):
    raise ValueError(f"DSCFLOW_BACKEND must be 'python' or 'compiled', got {_requested!r}")

if _requested == "python":
    from . import pyk as _impl
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        if _requested == "compiled":
            raise
        from . import pyk as _impl
        BACKEND = "python"

connect_scalar = _impl.connect_scalar
connect_velocity = _impl.connect_velocity
divergence = _impl.divergence
reflect = _impl.reflect
pressure_sweep = _impl.pressure_sweep
pressure_residual = _impl.pressure_residual
correct_velocity = _impl.correct_velocity

BMODE_FIXED = 0
BMODE_ZEROFLUX = 1


def backend_name():
    return BACKEND
