"""Backend selection for the bit-level kernels.

The compiled extension ``_ckernels`` is used when it imports; otherwise the
numpy implementations in ``_pykernels`` are used. Setting the environment
variable ``BELLSAMPLING_PURE=1`` forces the fallback.
"""

from __future__ import annotations

import os

import numpy as np

from . import _pykernels

if os.environ.get("BELLSAMPLING_PURE"):
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _ckernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
        BACKEND = "python"

gf2_rref = _impl.gf2_rref
gf2_reduce = _impl.gf2_reduce
and_parity = _impl.and_parity
frame_linear = _impl.frame_linear
xor_bits = _impl.xor_bits
xor_rows_masked = _impl.xor_rows_masked


def words_for(nbits: int) -> int:
    return max(1, (nbits + 63) // 64)


def pack_columns(bits: np.ndarray) -> np.ndarray:
    """Pack a (m, c) 0/1 array into (m, W) uint64 rows, column 0 = MSB of word 0."""
    bits = np.asarray(bits, dtype=np.uint8)
    m, c = bits.shape
    nw = words_for(c)
    padded = np.zeros((m, nw * 64), dtype=np.uint8)
    padded[:, :c] = bits
    packed = np.packbits(padded, axis=1, bitorder="big")
    return packed.view(">u8").astype(np.uint64).reshape(m, nw)


def unpack_columns(words: np.ndarray, ncols: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    m = words.shape[0]
    as_bytes = words.astype(">u8").view(np.uint8).reshape(m, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="big")[:, :ncols]


def pack_shots(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, shots) 0/1 array so shot s sits at word s//64, bit s%64."""
    bits = np.asarray(bits, dtype=np.uint8)
    rows, shots = bits.shape
    nw = words_for(shots)
    padded = np.zeros((rows, nw * 64), dtype=np.uint8)
    padded[:, :shots] = bits
    packed = np.packbits(padded, axis=1, bitorder="little")
    return packed.view("<u8").astype(np.uint64).reshape(rows, nw)


def unpack_shots(words: np.ndarray, shots: int) -> np.ndarray:
    words = np.ascontiguousarray(words, dtype=np.uint64)
    rows = words.shape[0]
    as_bytes = words.astype("<u8").view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :shots]
