"""Kernel selection: compiled extension when available, pure Python otherwise.

Set ``PASSNET_LAB_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the equivalence tests). Both implementations are
bit-identical, so everything downstream is deterministic regardless of
which one is active.
"""

from __future__ import annotations

import os

if os.environ.get("PASSNET_LAB_PURE_PYTHON"):
    from . import _kernels_py as _impl

    KERNEL_IMPLEMENTATION = "python (forced)"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        KERNEL_IMPLEMENTATION = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        KERNEL_IMPLEMENTATION = "python (compiled module unavailable)"

best_split_gini = _impl.best_split_gini
best_split_sse = _impl.best_split_sse
kmeans_assign = _impl.kmeans_assign

__all__ = [
    "KERNEL_IMPLEMENTATION",
    "best_split_gini",
    "best_split_sse",
    "kmeans_assign",
]
