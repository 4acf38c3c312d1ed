"""Kernel selection: compiled extension when importable, pure Python otherwise."""

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

DEFAULT = "cython" if _ckernels is not None else "python"
_active = DEFAULT


def kernels(name=None):
    if name is None:
        name = _active
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}") from None


def active():
    return _active


def set_backend(name):
    """Select the kernel backend process-wide; returns the previous choice."""
    global _active
    kernels(name)
    prev, _active = _active, name
    return prev
