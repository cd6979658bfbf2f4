"""Kernel backend selection, decided once at import time.

LATSPELL_BACKEND=python forces the numpy fallback, =cython requires the
compiled module (ImportError if absent), anything else / unset tries the
compiled module first and falls back silently.
"""

import os

from . import _kernels_py

_choice = os.environ.get("LATSPELL_BACKEND", "auto").strip().lower()

if _choice == "python":
    kernels = _kernels_py
elif _choice == "cython":
    from . import _kernels as kernels  # type: ignore[no-redef]
elif _choice in ("", "auto"):
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]
    except ImportError:
        kernels = _kernels_py
else:
    raise RuntimeError(
        f"LATSPELL_BACKEND={_choice!r} not understood (use auto, python or cython)"
    )

BACKEND = kernels.NAME
