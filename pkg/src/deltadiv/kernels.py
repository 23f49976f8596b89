"""Backend selection for the batch kernels.

The compiled extension is used when it was built; otherwise the numpy
implementation.  Set ``DELTADIV_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _pykernels

_impl = _pykernels
if not os.environ.get("DELTADIV_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]
    except ImportError:
        pass

BACKEND: str = _impl.NAME
batch_measures = _impl.batch_measures
batch_delta = _impl.batch_delta
format_rows = _impl.format_rows

CASE_AGREE = _pykernels.CASE_AGREE
CASE_BOTH_NONNEG = _pykernels.CASE_BOTH_NONNEG
CASE_MIXED = _pykernels.CASE_MIXED


def backends():
    """All importable backends by name (the numpy one is always present)."""
    found = {"numpy": _pykernels}
    try:
        from . import _ckernels

        found["cython"] = _ckernels
    except ImportError:
        pass
    return found
