"""Backend selection for the Taylor kernels.

Prefers the compiled Cython extension; falls back to the numpy kernels.
Set CONFFLAT_JET_BACKEND=python or =cython to force a choice.
"""
import os

_choice = os.environ.get("CONFFLAT_JET_BACKEND", "auto")

if _choice == "python":
    from . import _taylor_py as kernels
elif _choice == "cython":
    from . import _taylor_cy as kernels  # type: ignore[no-redef]
else:
    try:
        from . import _taylor_cy as kernels  # type: ignore[no-redef]
    except ImportError:
        from . import _taylor_py as kernels  # type: ignore[no-redef]

mul = kernels.mul
compose = kernels.compose
BACKEND = kernels.BACKEND
