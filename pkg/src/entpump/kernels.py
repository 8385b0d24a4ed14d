"""Backend selection for the inner-loop kernels.

The compiled extension ``entpump._kernels`` is used when it imports; otherwise
the numpy fallback in ``entpump._kernels_py``. Set ``ENTPUMP_BACKEND=python``
to force the fallback (``=compiled`` makes a missing extension an error).
"""

from __future__ import annotations

import os

from . import _kernels_py

_requested = os.environ.get("ENTPUMP_BACKEND", "auto").lower()
if _requested not in ("auto", "python", "compiled"):
    raise ImportError(f"ENTPUMP_BACKEND must be auto, python or compiled, not {_requested!r}")

_compiled = None
if _requested != "python":
    try:
        from . import _kernels as _compiled
    except ImportError:
        if _requested == "compiled":
            raise

if _compiled is not None:
    BACKEND = "compiled"
    apply_gate = _compiled.apply_gate
    depolarize = _compiled.depolarize
    lindblad_rk4 = _compiled.lindblad_rk4
else:
    BACKEND = "python"
    apply_gate = _kernels_py.apply_gate
    depolarize = _kernels_py.depolarize
    lindblad_rk4 = _kernels_py.lindblad_rk4


def backends() -> dict:
    """Every importable backend by name, for cross-checks and benchmarks."""
    out = {"python": _kernels_py}
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        out["compiled"] = _kernels
    return out
