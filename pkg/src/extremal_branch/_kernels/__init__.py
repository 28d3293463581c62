"""Hot kernels with a compiled backend and a pure Python fallback.

The compiled module is used when it imports; setting
``EXTREMAL_BRANCH_KERNELS=python`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
if os.environ.get("EXTREMAL_BRANCH_KERNELS", "").lower() != "python":
    try:
        from . import _ckernels as _impl
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

tridiag_solve = _impl.tridiag_solve
tridiag_matvec = _impl.tridiag_matvec
sturm_count = _impl.sturm_count
bordered_solve = _impl.bordered_solve

__all__ = ["BACKEND", "tridiag_solve", "tridiag_matvec", "sturm_count",
           "bordered_solve"]
