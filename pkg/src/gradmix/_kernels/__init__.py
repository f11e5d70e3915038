"""Backend selection for the clustering kernels.

The compiled extension is preferred when it was built; otherwise the NumPy
fallback is used. Set ``GRADMIX_PURE_PYTHON=1`` to force the fallback (used
by the benchmark and for debugging).
"""

import os

if os.environ.get("GRADMIX_PURE_PYTHON"):
    from gradmix._kernels import fallback as _impl

    BACKEND = "python"
else:
    try:
        from gradmix._kernels import _core as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from gradmix._kernels import fallback as _impl

        BACKEND = "python"

assign_points = _impl.assign_points
cluster_mean_distances = _impl.cluster_mean_distances

__all__ = ["BACKEND", "assign_points", "cluster_mean_distances"]
