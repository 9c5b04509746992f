"""Backend selection for the hot grid kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``RHIZOME_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy fallback is used.
"""

import os

from . import _pykernels
from ._pykernels import BOUNDARY, OBSTACLE, UNCLAIMED

__all__ = ["BACKEND", "BOUNDARY", "OBSTACLE", "UNCLAIMED", "diffuse",
           "front_propagate", "get_backend"]

_force_python = os.environ.get("RHIZOME_PURE_PYTHON", "") not in ("", "0")

_compiled = None
if not _force_python:
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

_impl = _compiled if _compiled is not None else _pykernels
BACKEND = "cython" if _compiled is not None else "python"


def get_backend(name=None):
    """Return the kernel module for ``name`` ("cython" or "python").

    ``None`` returns the active backend.  Asking for "cython" when the
    extension is not built raises ImportError.
    """
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is not None:
            return _compiled
        from . import _ckernels
        return _ckernels
    raise ValueError(f"unknown backend {name!r}")


def diffuse(c, passable, D, decay):
    return _impl.diffuse(c, passable, D, decay)


def front_propagate(passable, seed_xy, seed_labels, max_step=-1):
    return _impl.front_propagate(passable, seed_xy, seed_labels, max_step)
