"""Seeded random streams with per-index substreams.

The compiled ``_core`` extension is used when importable; otherwise the
pure-Python ``_core_py`` module is loaded. Set ``DPANOVA_PURE_PYTHON=1`` to
force the fallback. Both produce identical streams for identical keys.
"""
import os
import struct

from . import _core_py

if os.environ.get("DPANOVA_PURE_PYTHON"):
    _backend = _core_py
else:
    try:
        from . import _core as _backend
    except ImportError:
        _backend = _core_py

BACKEND = "compiled" if _backend is not _core_py else "python"

Stream = _backend.Stream
null_f_draws = _backend.null_f_draws
null_f_draw = _backend.null_f_draw
laplace_inverse_cdf = _backend.laplace_inverse_cdf

MASK64 = _core_py.MASK64
mix64 = _core_py.mix64


def _as_u64(part):
    if isinstance(part, bool):
        return int(part)
    if isinstance(part, int):
        return part % (1 << 64)
    if isinstance(part, float):
        return struct.unpack("<Q", struct.pack("<d", part))[0]
    raise TypeError(f"cannot derive a stream key from {type(part).__name__}")


def stream_key(seed, *parts):
    """Fold a seed and a path of ints/floats into a 64-bit stream key.

    Floats are keyed by their IEEE-754 bit pattern, so ``1`` and ``1.0``
    give different keys; callers normalise types before keying.
    """
    h = mix64(_as_u64(int(seed)))
    for part in parts:
        h = mix64(h ^ _as_u64(part))
    return h


def substream(key, index):
    """Independent stream number ``index`` under ``key``."""
    return Stream.substream(key, index)
