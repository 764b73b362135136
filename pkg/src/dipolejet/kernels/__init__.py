"""Hot kernels for the dipole integrator.

The compiled ``_ckernels`` extension is used when it was built; otherwise
the pure-Python ``_pykernels`` module is selected at import.  Setting the
environment variable ``DIPOLEJET_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if not os.environ.get("DIPOLEJET_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    else:
        _impl = _ckernels
        BACKEND = "cython"
else:
    _ckernels = None

make_pack = _impl.make_pack
grad = _impl.grad
rhs = _impl.rhs
step = _impl.step
advance = _impl.advance


def available_backends():
    """Mapping of backend name to module for every importable backend."""
    out = {"python": _pykernels}
    if _ckernels is not None:
        out["cython"] = _ckernels
    else:
        try:
            from . import _ckernels as ck
        except ImportError:
            pass
        else:
            out["cython"] = ck
    return out
