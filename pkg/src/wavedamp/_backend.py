"""Kernel backend selection.

The compiled Cython kernel is preferred when its extension module imports;
otherwise (or when ``WAVEDAMP_PURE_PY`` is set in the environment) the
pure-NumPy reference kernel is used. Both expose the same ``integrate``
contract and agree to roundoff.
"""

from __future__ import annotations

import os

if os.environ.get("WAVEDAMP_PURE_PY"):
    from . import _kernels_py as kernels
else:
    try:
        from . import _kernels_cy as kernels  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as kernels

KIND_LINEAR = 0
KIND_POWER = 1

integrate = kernels.integrate


def kernel_backend() -> str:
    """Name of the active time-stepping backend: 'compiled' or 'python'."""
    return kernels.BACKEND_NAME
