"""Kernel selection: compiled extension if available, numpy fallback otherwise.

The hot loops (all-option quality estimation in the simulators and the
per-sample online-update sweep) exist twice: `_ckernels` is a Cython
extension, `pykernels` is a vectorized numpy implementation with identical
semantics. Selection happens once at import; set ADASPACE_PURE_PYTHON=1
before importing to force the fallback.
"""

from __future__ import annotations

import os

FORCE_PURE_ENV = "ADASPACE_PURE_PYTHON"


def _select():
    if os.environ.get(FORCE_PURE_ENV) == "1":
        from adaspace._kernels import pykernels

        return pykernels, "python"
    try:
        from adaspace._kernels import _ckernels  # type: ignore[attr-defined]

        return _ckernels, "cython"
    except ImportError:
        from adaspace._kernels import pykernels

        return pykernels, "python"


impl, impl_name = _select()
