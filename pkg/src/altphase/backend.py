"""Kernel backend selection.

The compiled extension ``altphase._kernels`` is used when it imported
cleanly, the numpy twin ``altphase._kernels_py`` otherwise.  Set the
environment variable ``ALTPHASE_BACKEND`` to ``pure`` or ``compiled`` to
force a choice before import; ``set_backend``/``temporary_backend`` switch
at runtime (used by the ``bench`` CLI command to compare the two).
"""

import os
from contextlib import contextmanager

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

_IMPLS = {"pure": _kernels_py}
if _compiled is not None:
    _IMPLS["compiled"] = _compiled


def available_backends():
    """Names of the importable kernel implementations."""
    return sorted(_IMPLS)


def _resolve(name):
    if name not in _IMPLS:
        raise ValueError(
            f"unknown or unavailable backend {name!r}; available: {available_backends()}"
        )
    return _IMPLS[name]


_env = os.environ.get("ALTPHASE_BACKEND", "").strip().lower()
if _env:
    _active = _resolve(_env)
else:
    _active = _compiled if _compiled is not None else _kernels_py


def active_backend():
    return "compiled" if _active is _compiled else "pure"


def set_backend(name):
    global _active
    _active = _resolve(name)


@contextmanager
def temporary_backend(name):
    previous = active_backend()
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def apply_phases(z, y):
    return _active.apply_phases(z, y)


def cgnr_dense(rows, cols, b, x0, tol, max_iters):
    return _active.cgnr_dense(rows, cols, b, x0, tol, max_iters)
