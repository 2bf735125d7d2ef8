"""Backend selection for the finite-part kernel.

The compiled extension is used when importable.  Setting the environment
variable ``TDQO_PURE_PYTHON=1`` forces the pure-Python fallback.
"""

from __future__ import annotations

import os

from . import _fpkernel_py

SHAPE_EXP = _fpkernel_py.SHAPE_EXP
SHAPE_GAUSS = _fpkernel_py.SHAPE_GAUSS
STATUS_OK = _fpkernel_py.STATUS_OK
STATUS_NOT_CONVERGED = _fpkernel_py.STATUS_NOT_CONVERGED
STATUS_SINGULAR = _fpkernel_py.STATUS_SINGULAR

_compiled = None
if os.environ.get("TDQO_PURE_PYTHON") != "1":
    try:
        from . import _fpkernel as _compiled
    except ImportError:  # pragma: no cover - depends on the build
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"
BACKENDS = {"python": _fpkernel_py.chi_finite_part}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled.chi_finite_part


def chi_finite_part(code, params, t_eval, rtol=1e-10, atol=1e-13, nthreads=1, backend=None):
    """Dispatch to the selected backend; see ``_fpkernel_py.chi_finite_part``."""
    fn = BACKENDS[backend or BACKEND]
    return fn(code, params, t_eval, rtol=rtol, atol=atol, nthreads=nthreads)
