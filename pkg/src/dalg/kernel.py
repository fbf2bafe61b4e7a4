"""Select the compiled kernel when available, else the pure-Python one.

Set ``DALG_PURE_PYTHON=1`` to force the fallback.  ``BACKEND`` names the
implementation in use.
"""

import os

_impl = None
BACKEND = "python"
if os.environ.get("DALG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from dalg import _kernel as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = None
if _impl is None:
    from dalg import _kernel_py as _impl

mul_terms = _impl.mul_terms
normal_form = _impl.normal_form
divide_single = _impl.divide_single
