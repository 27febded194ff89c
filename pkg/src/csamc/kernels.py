"""Backend selection for the hot path-recursion kernels.

The compiled extension is preferred when importable; the numpy fallback is
numerically equivalent (same inputs, same operation order). Force a choice
with CSAMC_BACKEND=python or CSAMC_BACKEND=cython.
"""

from __future__ import annotations

import os

_choice = os.environ.get("CSAMC_BACKEND", "auto").lower()
if _choice not in ("auto", "cython", "python"):
    raise RuntimeError(f"CSAMC_BACKEND must be auto, cython or python, got {_choice!r}")

if _choice == "python":
    from . import _speed_py as _impl

    BACKEND = "python"
else:
    try:
        from . import _speed as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise RuntimeError(
                "CSAMC_BACKEND=cython but the csamc._speed extension is not built"
            ) from None
        from . import _speed_py as _impl  # type: ignore[no-redef]

        BACKEND = "python"

asset_sweep = _impl.asset_sweep
futures_account_sweep = _impl.futures_account_sweep

__all__ = ["BACKEND", "asset_sweep", "futures_account_sweep"]
