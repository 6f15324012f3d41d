"""Kernel backend selection.

The compiled extension is preferred when importable; otherwise the pure
NumPy kernels are used.  TRACKPOST_BACKEND overrides the choice:

  auto    (default) compiled if available, else pure Python
  python  force the pure NumPy kernels
  cython  require the compiled extension, fail loudly if missing

Both backends are bit identical, so the override only matters for
performance and for testing the equivalence itself.
"""

import os

_requested = os.environ.get("TRACKPOST_BACKEND", "auto").strip().lower() or "auto"
if _requested not in ("auto", "python", "cython"):
    raise ImportError(
        f"TRACKPOST_BACKEND must be auto, python, or cython, got {_requested!r}"
    )

if _requested == "python":
    from . import _kernels_py as _impl
    BACKEND_NAME = "python"
else:
    try:
        from . import _ckernels as _impl
        BACKEND_NAME = "cython"
    except ImportError:
        if _requested == "cython":
            raise
        from . import _kernels_py as _impl
        BACKEND_NAME = "python"

sequential_sum = _impl.sequential_sum
ratio_deltas = _impl.ratio_deltas
iou_xywh = _impl.iou_xywh
overlap_values = _impl.overlap_values
success_rates = _impl.success_rates
fill_linear = _impl.fill_linear
hold_span = _impl.hold_span
mask_extremes = _impl.mask_extremes
rle_decode = _impl.rle_decode
rle_encode = _impl.rle_encode


def backend_name() -> str:
    """Name of the kernel backend in use: 'cython' or 'python'."""
    return BACKEND_NAME
