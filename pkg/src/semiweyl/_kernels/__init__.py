"""Hot numerical kernels with a compiled core and a numpy fallback.

The compiled module is optional: builds without a C toolchain fall back
to the pure-numpy implementation transparently.  Set SEMIWEYL_PURE_PYTHON=1
to force the fallback (used by the equivalence tests and the benchmark).
"""

import os

from . import _core_py

if os.environ.get("SEMIWEYL_PURE_PYTHON") == "1":
    _impl = _core_py
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

aae_integrals = _impl.aae_integrals
tridiag_accumulate = _impl.tridiag_accumulate

FAMILY_JET = 0
FAMILY_CUTOFF = 1


def backend_name():
    return "compiled" if _impl is not _core_py else "numpy"


def backends():
    """All importable implementations, for equivalence checks and timing."""
    out = {"numpy": _core_py}
    try:
        from . import _core
        out["compiled"] = _core
    except ImportError:
        pass
    return out
