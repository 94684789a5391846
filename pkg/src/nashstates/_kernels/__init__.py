"""Backend selection for the quadric-solver kernels.

The compiled extension is preferred when importable; the pure-NumPy module is
a drop-in fallback with identical semantics.  Set ``NASHSTATES_PURE_PYTHON=1``
to force the fallback (used by the benchmark and the equivalence tests).
"""

import os

from . import _quadric_py

if os.environ.get("NASHSTATES_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = _quadric_py
else:
    try:
        from . import _quadric_cy as _impl
    except ImportError:
        _impl = _quadric_py

BACKEND = _impl.BACKEND_NAME
GN_CONVERGED = _impl.GN_CONVERGED
GN_NO_CONVERGENCE = _impl.GN_NO_CONVERGENCE
GN_RANK_COLLAPSE = _impl.GN_RANK_COLLAPSE

quadric_values = _impl.quadric_values
quadric_gradients = _impl.quadric_gradients
residual_vector = _impl.residual_vector
gauss_newton = _impl.gauss_newton


def available_backends():
    """Names of importable backends (the compiled one may be absent)."""
    names = ["python"]
    try:
        from . import _quadric_cy  # noqa: F401
        names.append("cython")
    except ImportError:
        pass
    return names
