"""Pure numpy implementations of the bit-level kernels.

Mirrors ``_ckernels.pyx`` function by function; ``bellsampling.kernels``
picks one of the two at import time.

Two packing conventions are used:

* GF(2) row vectors: column ``c`` lives in word ``c // 64`` at bit
  ``63 - c % 64`` (so comparing rows word by word is lexicographic order).
* Pauli frames: shot ``s`` lives in word ``s // 64`` at bit ``s % 64``.
"""

from __future__ import annotations

import numpy as np

_ONE = np.uint64(1)


def _col_mask(col: int) -> tuple[int, np.uint64]:
    return col >> 6, np.uint64(1 << (63 - (col & 63)))


def gf2_rref(rows: np.ndarray, ncols: int) -> tuple[np.ndarray, np.ndarray]:
    """Reduced row echelon form over GF(2); returns (nonzero rows, pivot columns)."""
    work = np.array(rows, dtype=np.uint64, copy=True)
    if work.ndim != 2:
        raise ValueError("rows must be a 2-D uint64 array")
    m = work.shape[0]
    pivots = []
    r = 0
    for col in range(ncols):
        if r == m:
            break
        w, bit = _col_mask(col)
        hits = np.flatnonzero(work[r:, w] & bit)
        if hits.size == 0:
            continue
        p = r + hits[0]
        if p != r:
            work[[r, p]] = work[[p, r]]
        others = np.flatnonzero(work[:, w] & bit)
        others = others[others != r]
        if others.size:
            work[others] ^= work[r]
        pivots.append(col)
        r += 1
    return work[:r].copy(), np.asarray(pivots, dtype=np.int64)


def gf2_reduce(vecs: np.ndarray, basis: np.ndarray, pivots: np.ndarray) -> np.ndarray:
    """Reduce each row of ``vecs`` modulo an RREF basis; zero rows are members."""
    out = np.array(vecs, dtype=np.uint64, copy=True)
    for i, col in enumerate(pivots):
        w, bit = _col_mask(int(col))
        hit = (out[:, w] & bit) != 0
        if hit.any():
            out[hit] ^= basis[i]
    return out


def and_parity(a: np.ndarray, b: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Per-row parity of popcount(a & b & mask)."""
    counts = np.bitwise_count(a & b & mask[None, :]).sum(axis=1)
    return (counts & 1).astype(np.uint8)


def frame_linear(x: np.ndarray, z: np.ndarray, qubits: np.ndarray, matrix: np.ndarray) -> None:
    """Apply a GF(2) symplectic map to the frame rows of ``qubits`` in place.

    The local vector is ``(x_q0, .., x_qk-1, z_q0, .., z_qk-1)``; output bit
    ``j`` is the XOR of input bits ``i`` with ``matrix[j, i] == 1``.
    """
    k = len(qubits)
    src = [x[q].copy() for q in qubits] + [z[q].copy() for q in qubits]
    for j in range(2 * k):
        acc = np.zeros_like(src[0])
        for i in range(2 * k):
            if matrix[j, i]:
                acc ^= src[i]
        if j < k:
            x[qubits[j]] = acc
        else:
            z[qubits[j - k]] = acc


def xor_bits(rows: np.ndarray, row: int, positions: np.ndarray) -> None:
    """Flip shot bits ``positions`` of ``rows[row]`` in place."""
    if len(positions) == 0:
        return
    pos = np.asarray(positions, dtype=np.int64)
    bits = np.left_shift(_ONE, (pos & 63).astype(np.uint64))
    np.bitwise_xor.at(rows[row], pos >> 6, bits)


def xor_rows_masked(dst: np.ndarray, src: np.ndarray, select: np.ndarray) -> None:
    """``dst[j] ^= src[i]`` for every (i, j) with ``select[i, j]``; packed shot words."""
    for i in range(select.shape[0]):
        for j in np.flatnonzero(select[i]):
            dst[j] ^= src[i]
