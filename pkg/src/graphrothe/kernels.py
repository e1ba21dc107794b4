"""Hot-kernel dispatch: compiled extension when available, else pure Python.

Set ``GRAPHROTHE_PURE_PYTHON=1`` to force the fallback (used by the
kernel-equivalence tests and the benchmark). Both implementations perform
identical floating-point operations in identical order, so every result
is bit-identical regardless of which one is active.
"""

import os

from . import _kernels_py

if os.environ.get("GRAPHROTHE_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
        COMPILED = True
    except ImportError:
        _impl = _kernels_py
        COMPILED = False

seq_sum = _impl.seq_sum
seq_dot = _impl.seq_dot
psor_sweep = _impl.psor_sweep
