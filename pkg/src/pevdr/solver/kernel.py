"""Select the simplex pivot backend at import time.

``PEVDR_KERNEL=python`` forces the numpy fallback, ``PEVDR_KERNEL=ext``
requires the compiled extension; anything else prefers the extension when it
is importable.
"""

import os

from . import _kernel_py

_choice = os.environ.get("PEVDR_KERNEL", "auto").lower()

if _choice == "python":
    _backend = _kernel_py
    BACKEND = "python"
else:
    try:
        from . import _kernel_ext as _backend

        BACKEND = "cython"
    except ImportError:
        if _choice == "ext":
            raise
        _backend = _kernel_py
        BACKEND = "python"

run_simplex = _backend.run_simplex
pivot = _backend.pivot

BACKENDS = {"python": _kernel_py}
try:
    from . import _kernel_ext

    BACKENDS["cython"] = _kernel_ext
except ImportError:
    pass
