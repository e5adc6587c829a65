"""GF(2) and binary-symplectic linear algebra on Pauli labels.

A Pauli label on ``n`` qubits is a ``2n``-bit vector ``r = (z | x)``: qubit
``i`` carries ``(r_i, r_{n+i}) = (z_i, x_i)`` and ``(0,0)=I, (0,1)=X,
(1,0)=Z, (1,1)=Y``. As a Python integer the label is ``(z << n) | x`` with
qubit 0 in the most significant position of each half, so that the integer
reads left to right in the same order as the outcome string ``r_1 .. r_2n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels

_PAULI_CHARS = "IXZY"  # index = 2*z + x


@dataclass(frozen=True, order=True)
class PauliVec:
    n: int
    z: int
    x: int

    def __post_init__(self):
        lim = 1 << self.n
        if not (0 <= self.z < lim and 0 <= self.x < lim):
            raise ValueError(f"bits out of range for n={self.n}")

    @classmethod
    def from_int(cls, n: int, v: int) -> "PauliVec":
        return cls(n, v >> n, v & ((1 << n) - 1))

    @classmethod
    def from_bits(cls, bits: Sequence[int]) -> "PauliVec":
        """From a length-2n sequence in ``(r_1 .. r_n, r_{n+1} .. r_2n)`` order."""
        if len(bits) % 2:
            raise ValueError("bit string must have even length")
        n = len(bits) // 2
        v = 0
        for b in bits:
            v = (v << 1) | (int(b) & 1)
        return cls.from_int(n, v)

    @classmethod
    def parse(cls, text: str) -> "PauliVec":
        """Accept ``"XIZY"`` style strings or raw ``0/1`` strings of length 2n."""
        text = text.strip()
        if text and set(text) <= {"0", "1"}:
            return cls.from_bits([int(c) for c in text])
        n = len(text)
        z = x = 0
        for ch in text.upper():
            idx = _PAULI_CHARS.find(ch)
            if idx < 0:
                raise ValueError(f"invalid Pauli character {ch!r}")
            z = (z << 1) | (idx >> 1)
            x = (x << 1) | (idx & 1)
        return cls(n, z, x)

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliVec":
        chars = ["I"] * n
        chars[qubit] = kind
        return cls.parse("".join(chars))

    @classmethod
    def identity(cls, n: int) -> "PauliVec":
        return cls(n, 0, 0)

    @property
    def value(self) -> int:
        return (self.z << self.n) | self.x

    def bits(self) -> np.ndarray:
        out = np.zeros(2 * self.n, dtype=np.uint8)
        v = self.value
        for j in range(2 * self.n):
            out[j] = (v >> (2 * self.n - 1 - j)) & 1
        return out

    def label(self, qubit: int) -> str:
        s = self.n - 1 - qubit
        return _PAULI_CHARS[2 * ((self.z >> s) & 1) + ((self.x >> s) & 1)]

    def __str__(self) -> str:
        return "".join(self.label(q) for q in range(self.n))

    def __xor__(self, other: "PauliVec") -> "PauliVec":
        _check_n(self, other)
        return PauliVec(self.n, self.z ^ other.z, self.x ^ other.x)

    def weight(self) -> int:
        return (self.z | self.x).bit_count()

    def restrict(self, qubits: Iterable[int]) -> "PauliVec":
        qubits = list(qubits)
        return PauliVec.parse("".join(self.label(q) for q in qubits)) if qubits else PauliVec(0, 0, 0)


def _check_n(a: PauliVec, b: PauliVec) -> None:
    if a.n != b.n:
        raise ValueError(f"qubit count mismatch: {a.n} vs {b.n}")


def symplectic_product(a: PauliVec, b: PauliVec) -> int:
    """1 iff the Paulis labelled by ``a`` and ``b`` anticommute."""
    _check_n(a, b)
    return ((a.z & b.x) ^ (a.x & b.z)).bit_count() & 1


def y_parity(r: PauliVec) -> int:
    """Parity of the number of Y (singlet) positions."""
    return (r.z & r.x).bit_count() & 1


# ---------------------------------------------------------------------------
# integer <-> packed-word conversion


def _ints_to_words(values: Sequence[int], width: int) -> np.ndarray:
    nw = kernels.words_for(width)
    shift = 64 * nw - width
    out = np.zeros((len(values), nw), dtype=np.uint64)
    mask = (1 << 64) - 1
    for i, v in enumerate(values):
        p = v << shift
        for w in range(nw):
            out[i, w] = (p >> (64 * (nw - 1 - w))) & mask
    return out


def _words_to_ints(words: np.ndarray, width: int) -> list[int]:
    nw = words.shape[1]
    shift = 64 * nw - width
    out = []
    for row in words:
        v = 0
        for w in range(nw):
            v = (v << 64) | int(row[w])
        out.append(v >> shift)
    return out


def rref_ints(values: Sequence[int], width: int) -> tuple[list[int], list[int]]:
    """RREF of integer row vectors; returns (basis rows, pivot columns)."""
    if not values:
        return [], []
    rows, piv = kernels.gf2_rref(_ints_to_words(values, width), width)
    return _words_to_ints(rows, width), [int(p) for p in piv]


def nullspace_ints(rows: Sequence[int], width: int) -> list[int]:
    """Basis of {v : <row, v> = 0 for all rows} over GF(2), as integers."""
    basis, piv = rref_ints(list(rows), width)
    pivset = set(piv)
    out = []
    for free in range(width):
        if free in pivset:
            continue
        v = 1 << (width - 1 - free)
        for row, p in zip(basis, piv):
            if (row >> (width - 1 - free)) & 1:
                v |= 1 << (width - 1 - p)
        out.append(v)
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class F2Subspace:
    """A subspace of F_2^{2n} held as a canonical RREF basis."""

    n: int
    basis: tuple[int, ...]
    pivots: tuple[int, ...]

    @classmethod
    def from_ints(cls, n: int, values: Iterable[int]) -> "F2Subspace":
        basis, piv = rref_ints([int(v) for v in values if v], 2 * n)
        return cls(n, tuple(basis), tuple(piv))

    @classmethod
    def zero(cls, n: int) -> "F2Subspace":
        return cls(n, (), ())

    @property
    def dim(self) -> int:
        return len(self.basis)

    def vectors(self) -> list[PauliVec]:
        return [PauliVec.from_int(self.n, v) for v in self.basis]

    def words(self) -> np.ndarray:
        return _ints_to_words(self.basis, 2 * self.n)

    def reduce_int(self, v: int) -> int:
        w = 2 * self.n
        for row, p in zip(self.basis, self.pivots):
            if (v >> (w - 1 - p)) & 1:
                v ^= row
        return v

    def __contains__(self, v: PauliVec) -> bool:
        return membership(v, self)

    def contains_bits(self, bits: np.ndarray) -> np.ndarray:
        """Vectorised membership for an (m, 2n) 0/1 array."""
        words = kernels.pack_columns(bits)
        if not self.basis:
            return ~words.any(axis=1)
        res = kernels.gf2_reduce(words, self.words(), np.asarray(self.pivots, dtype=np.int64))
        return ~res.any(axis=1)

    def elements(self) -> list[int]:
        out = [0]
        for b in self.basis:
            out += [e ^ b for e in out]
        return out

    def is_isotropic(self) -> bool:
        vs = self.vectors()
        return all(symplectic_product(a, b) == 0 for i, a in enumerate(vs) for b in vs[i + 1 :])

    def __le__(self, other: "F2Subspace") -> bool:
        return all(other.reduce_int(v) == 0 for v in self.basis)


@dataclass(frozen=True)
class AffineCoset:
    subspace: F2Subspace
    offset: PauliVec

    def __contains__(self, v: PauliVec) -> bool:
        return (v ^ self.offset) in self.subspace

    def contains_bits(self, bits: np.ndarray) -> np.ndarray:
        return self.subspace.contains_bits(np.asarray(bits, dtype=np.uint8) ^ self.offset.bits()[None, :])

    @property
    def dim(self) -> int:
        return self.subspace.dim


def span(vectors: Sequence[PauliVec], n: int | None = None) -> F2Subspace:
    """GF(2) span of the given labels."""
    if n is None:
        if not vectors:
            raise ValueError("span of an empty list needs an explicit n")
        n = vectors[0].n
    for v in vectors:
        if v.n != n:
            raise ValueError("all vectors must share the same n")
    return F2Subspace.from_ints(n, (v.value for v in vectors))


def span_bits(bits: np.ndarray, n: int) -> F2Subspace:
    """Span of the rows of an (m, 2n) 0/1 array, eliminated in the compiled kernel."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape[0] == 0:
        return F2Subspace.zero(n)
    rows, piv = kernels.gf2_rref(kernels.pack_columns(bits), 2 * n)
    return F2Subspace(n, tuple(_words_to_ints(rows, 2 * n)), tuple(int(p) for p in piv))


def membership(v: PauliVec, S: F2Subspace) -> bool:
    if v.n != S.n:
        raise ValueError(f"qubit count mismatch: {v.n} vs {S.n}")
    return S.reduce_int(v.value) == 0


def _omega_int(n: int, a: int, b: int) -> int:
    mask = (1 << n) - 1
    return (((a >> n) & (b & mask)) ^ ((a & mask) & (b >> n))).bit_count() & 1


def radical(H: F2Subspace) -> F2Subspace:
    """{c in H : omega(c, h) = 0 for all h in H}, via the kernel of the Gram matrix."""
    d = H.dim
    if d == 0:
        return H
    gram_rows = []
    for i in range(d):
        row = 0
        for j in range(d):
            row = (row << 1) | _omega_int(H.n, H.basis[i], H.basis[j])
        gram_rows.append(row)
    out = []
    for coeffs in nullspace_ints(gram_rows, d):
        v = 0
        for j in range(d):
            if (coeffs >> (d - 1 - j)) & 1:
                v ^= H.basis[j]
        out.append(v)
    return F2Subspace.from_ints(H.n, out)


def symplectic_complement(H: F2Subspace) -> F2Subspace:
    """{v : omega(v, h) = 0 for all h in H}."""
    n = H.n
    mask = (1 << n) - 1
    # omega(v, h) = <v, swap(h)> with swap exchanging the z and x halves
    swapped = [((h & mask) << n) | (h >> n) for h in H.basis]
    return F2Subspace.from_ints(n, nullspace_ints(swapped, 2 * n))


def coset_extract(samples: Sequence[PauliVec] | np.ndarray, n: int | None = None) -> AffineCoset:
    """Smallest affine coset containing all samples: span of differences plus offset."""
    if isinstance(samples, np.ndarray):
        bits = np.asarray(samples, dtype=np.uint8)
        if bits.shape[0] == 0:
            raise ValueError("coset_extract needs at least one sample")
        n = bits.shape[1] // 2
        first = bits[0]
        sub = span_bits(bits ^ first[None, :], n)
        off = PauliVec.from_int(n, sub.reduce_int(PauliVec.from_bits(first).value))
        return AffineCoset(sub, off)
    samples = list(samples)
    if not samples:
        raise ValueError("coset_extract needs at least one sample")
    first = samples[0]
    sub = span([s ^ first for s in samples], first.n)
    return AffineCoset(sub, PauliVec.from_int(first.n, sub.reduce_int(first.value)))


def bits_to_ints(bits: np.ndarray) -> list[int]:
    bits = np.asarray(bits, dtype=np.uint8)
    return _words_to_ints(kernels.pack_columns(bits), bits.shape[1])
