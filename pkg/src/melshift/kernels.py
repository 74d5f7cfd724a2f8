"""Backend selection for the hot kernels.

The compiled Cython extension is used when it has been built; otherwise the
numpy fallback is imported. Setting ``MELSHIFT_PURE_PYTHON=1`` forces the
fallback.
"""
import os

NEAREST = 0
LINEAR = 1
INTERPOLATION_MODES = {"nearest": NEAREST, "linear": LINEAR}

if os.environ.get("MELSHIFT_PURE_PYTHON", "") not in ("", "0"):
    from melshift import _fallback as _impl
    BACKEND = "python"
else:
    try:
        from melshift import _kernels as _impl
        BACKEND = "cython"
    except ImportError:
        from melshift import _fallback as _impl
        BACKEND = "python"

shift_frames = _impl.shift_frames
yin_difference = _impl.yin_difference
cmnd = _impl.cmnd
pick_lags = _impl.pick_lags

__all__ = [
    "BACKEND", "INTERPOLATION_MODES", "LINEAR", "NEAREST",
    "cmnd", "pick_lags", "shift_frames", "yin_difference",
]
