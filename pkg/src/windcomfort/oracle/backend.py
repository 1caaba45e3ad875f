"""Kernel selection: compiled extension when present, NumPy fallback otherwise.

Both backends implement the same module contract (``init_state``, ``run``,
``macroscopics``, ``BACKEND``) and produce bit-identical fields, so the choice
only affects speed. ``WINDCOMFORT_LBM_BACKEND=python|compiled`` overrides.
"""

from __future__ import annotations

import os

from windcomfort.oracle import _lbm_ref


def _load():
    choice = os.environ.get("WINDCOMFORT_LBM_BACKEND", "auto")
    if choice == "python":
        return _lbm_ref
    try:
        from windcomfort.oracle import _lbm  # compiled extension
        return _lbm
    except ImportError:
        if choice == "compiled":
            raise
        return _lbm_ref


kernel = _load()


def backend_name() -> str:
    return kernel.BACKEND
