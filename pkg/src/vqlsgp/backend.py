"""Selects the compiled kernel extension, falling back to pure numpy.

Set VQLSGP_PURE_PYTHON=1 to force the fallback (used by tests and the
backend benchmark).
"""
from __future__ import annotations

import os

from . import _pykernels

if os.environ.get("VQLSGP_PURE_PYTHON"):
    _impl = _pykernels
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _pykernels

OP_RY = _pykernels.OP_RY
OP_CZ = _pykernels.OP_CZ
OP_UY = _pykernels.OP_UY
COST_LOCAL = _pykernels.COST_LOCAL
COST_GLOBAL = _pykernels.COST_GLOBAL

COMPILED = bool(_impl.COMPILED)
NAME = "compiled" if COMPILED else "pure-python"

ansatz_state = _impl.ansatz_state
cost_components = _impl.cost_components
cost_and_grad = _impl.cost_and_grad


def implementations():
    """Both kernel implementations that are importable, keyed by name."""
    impls = {"pure-python": _pykernels}
    try:
        from . import _kernels

        impls["compiled"] = _kernels
    except ImportError:
        pass
    return impls
