"""Kernel backend selection.

The compiled core (`_fastcore`, Cython) is preferred when it imported
cleanly; otherwise the pure-numpy fallback (`_ref`) is used. Both expose
the same functions with the same semantics. Selection can be forced with
the environment variable ``MDKIT_KERNELS=compiled|python``.
"""

import os

from . import _ref

try:
    from . import _fastcore
except ImportError:
    _fastcore = None

_forced = os.environ.get("MDKIT_KERNELS", "").strip().lower()
if _forced == "python":
    _impl = _ref
elif _forced == "compiled":
    if _fastcore is None:
        raise ImportError(
            "MDKIT_KERNELS=compiled but the compiled core is unavailable; "
            "reinstall with a C compiler present")
    _impl = _fastcore
else:
    _impl = _fastcore if _fastcore is not None else _ref


def backend_name() -> str:
    return "compiled" if _impl is _fastcore and _fastcore is not None else "python"


def get_backend(name: str):
    """Return a specific backend module ('compiled' or 'python'), or None."""
    if name == "python":
        return _ref
    if name == "compiled":
        return _fastcore
    raise ValueError(f"unknown backend {name!r}")


def available_backends():
    names = ["python"]
    if _fastcore is not None:
        names.insert(0, "compiled")
    return names


closest_point_brute = _impl.closest_point_brute
bvh_closest_point = _impl.bvh_closest_point
ray_crossings = _impl.ray_crossings
trilinear_sample = _impl.trilinear_sample
pairwise_min_dist = _impl.pairwise_min_dist
