"""Pick the amplitude kernel at import time.

The compiled extension is used when it imports; ``XYOTTO_PURE=1`` forces the
pure-Python path.
"""
import os

from . import _amplitudes_py

integrate_block_py = _amplitudes_py.integrate_block

try:
    if os.environ.get("XYOTTO_PURE"):
        raise ImportError("pure-Python backend requested")
    from ._amplitudes import integrate_block as integrate_block_ext
except ImportError:
    integrate_block_ext = None

if integrate_block_ext is not None:
    BACKEND = "cython"
    integrate_block = integrate_block_ext
else:
    BACKEND = "python"
    integrate_block = integrate_block_py
