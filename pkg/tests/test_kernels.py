import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bellsampling import _pykernels, kernels

try:
    from bellsampling import _ckernels
except ImportError:  # pragma: no cover
    _ckernels = None

needs_c = pytest.mark.skipif(_ckernels is None, reason="compiled kernels not built")

words = st.integers(0, 2**64 - 1)


def word_arrays(rows, cols):
    return arrays(np.uint64, (rows, cols), elements=words)


@pytest.mark.parametrize("shape", [(1, 1), (5, 63), (7, 64), (3, 130)])
def test_pack_columns_roundtrip(shape, rng):
    bits = rng.integers(0, 2, size=shape).astype(np.uint8)
    assert np.array_equal(kernels.unpack_columns(kernels.pack_columns(bits), shape[1]), bits)


@pytest.mark.parametrize("shape", [(2, 1), (4, 64), (3, 1000)])
def test_pack_shots_roundtrip(shape, rng):
    bits = rng.integers(0, 2, size=shape).astype(np.uint8)
    assert np.array_equal(kernels.unpack_shots(kernels.pack_shots(bits), shape[1]), bits)


def test_pack_columns_msb_first():
    bits = np.zeros((1, 70), dtype=np.uint8)
    bits[0, 0] = 1
    bits[0, 64] = 1
    w = kernels.pack_columns(bits)
    assert w[0, 0] == np.uint64(1 << 63) and w[0, 1] == np.uint64(1 << 63)


def test_rref_known_matrix():
    bits = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
    rows, piv = _pykernels.gf2_rref(kernels.pack_columns(bits), 3)
    assert list(piv) == [0, 1]
    assert np.array_equal(kernels.unpack_columns(rows, 3), [[1, 0, 1], [0, 1, 1]])


@needs_c
@settings(max_examples=40, deadline=None)
@given(word_arrays(12, 2), st.integers(1, 128))
def test_rref_backends_agree(rows, ncols):
    mask = kernels.pack_columns(np.ones((1, ncols), dtype=np.uint8))[0]
    rows = rows & mask
    r1, p1 = _pykernels.gf2_rref(rows.copy(), ncols)
    r2, p2 = _ckernels.gf2_rref(rows.copy(), ncols)
    assert np.array_equal(r1, r2) and np.array_equal(p1, p2)


@needs_c
@settings(max_examples=40, deadline=None)
@given(word_arrays(10, 2), word_arrays(20, 2))
def test_reduce_backends_agree(basis_rows, vecs):
    basis, piv = _pykernels.gf2_rref(basis_rows, 128)
    assert np.array_equal(_pykernels.gf2_reduce(vecs, basis, piv), _ckernels.gf2_reduce(vecs, basis, piv))


@needs_c
@settings(max_examples=40, deadline=None)
@given(word_arrays(9, 3), word_arrays(9, 3), arrays(np.uint64, 3, elements=words))
def test_and_parity_backends_agree(a, b, mask):
    want = np.array([bin(int(v)).count("1") for v in (a & b & mask).ravel()]).reshape(a.shape).sum(axis=1) & 1
    assert np.array_equal(_pykernels.and_parity(a, b, mask), want)
    assert np.array_equal(_ckernels.and_parity(a, b, mask), want)


@needs_c
@pytest.mark.parametrize("k", [1, 2])
def test_frame_linear_backends_agree(k, rng):
    x = rng.integers(0, 2**63, size=(5, 4), dtype=np.uint64)
    z = rng.integers(0, 2**63, size=(5, 4), dtype=np.uint64)
    qubits = rng.choice(5, size=k, replace=False).astype(np.int64)
    matrix = rng.integers(0, 2, size=(2 * k, 2 * k)).astype(np.uint8)
    x1, z1, x2, z2 = x.copy(), z.copy(), x.copy(), z.copy()
    _pykernels.frame_linear(x1, z1, qubits, matrix)
    _ckernels.frame_linear(x2, z2, qubits, matrix)
    assert np.array_equal(x1, x2) and np.array_equal(z1, z2)


@needs_c
def test_xor_kernels_backends_agree(rng):
    rows = rng.integers(0, 2**63, size=(4, 8), dtype=np.uint64)
    pos = rng.choice(512, size=40, replace=False).astype(np.int64)
    a, b = rows.copy(), rows.copy()
    _pykernels.xor_bits(a, 2, pos)
    _ckernels.xor_bits(b, 2, pos)
    assert np.array_equal(a, b)
    flipped = kernels.unpack_shots(a ^ rows, 512)
    assert set(np.flatnonzero(flipped[2])) == set(pos.tolist()) and not flipped[[0, 1, 3]].any()

    src = rng.integers(0, 2**63, size=(6, 8), dtype=np.uint64)
    sel = rng.integers(0, 2, size=(6, 4)).astype(bool)
    a, b = rows.copy(), rows.copy()
    _pykernels.xor_rows_masked(a, src, sel)
    _ckernels.xor_rows_masked(b, src, sel)
    assert np.array_equal(a, b)


def test_backend_name():
    assert kernels.BACKEND in ("cython", "python")
