"""Gate unitaries and Clifford conjugation tables.

Multi-qubit matrices use big-endian ordering: the first listed qubit is the
most significant tensor factor.
"""

from __future__ import annotations

import functools
from collections import deque

import numpy as np

SQ2 = np.sqrt(0.5)

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI_MATRICES = {"I": _I, "X": _X, "Y": _Y, "Z": _Z}
# label index 2*z + x  ->  I, X, Z, Y
_BY_ZX = [_I, _X, _Z, _Y]

FIXED = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * SQ2,
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "X": _X,
    "Y": _Y,
    "Z": _Z,
    "SQRTX": 0.5 * np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]], dtype=complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]).astype(complex),
    "TDG": np.diag([1, np.exp(-1j * np.pi / 4)]).astype(complex),
    "CNOT": np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex),
    "CZ": np.diag([1, 1, 1, -1]).astype(complex),
    "ISWAP": np.array([[1, 0, 0, 0], [0, 0, 1j, 0], [0, 1j, 0, 0], [0, 0, 0, 1]], dtype=complex),
}
ARITY = {k: (1 if v.shape[0] == 2 else 2) for k, v in FIXED.items()}
NON_CLIFFORD_KINDS = {"T", "TDG"}


def pauli_string_matrix(axis: str) -> np.ndarray:
    out = np.ones((1, 1), dtype=complex)
    for ch in axis:
        out = np.kron(out, PAULI_MATRICES[ch])
    return out


def pauli_rotation(axis: str, theta: float) -> np.ndarray:
    """exp(-i theta P / 2) for the Pauli string ``axis``."""
    P = pauli_string_matrix(axis)
    return np.cos(theta / 2) * np.eye(P.shape[0]) - 1j * np.sin(theta / 2) * P


def label_matrix(k: int, label: int) -> np.ndarray:
    """Matrix of a k-qubit Pauli label in (z|x) integer layout."""
    z, x = label >> k, label & ((1 << k) - 1)
    out = np.ones((1, 1), dtype=complex)
    for q in range(k):
        s = k - 1 - q
        out = np.kron(out, _BY_ZX[2 * ((z >> s) & 1) + ((x >> s) & 1)])
    return out


@functools.lru_cache(maxsize=None)
def _label_stack(k: int) -> np.ndarray:
    return np.stack([label_matrix(k, a) for a in range(4**k)])


class NotCliffordError(ValueError):
    pass


def conjugation_table(U: np.ndarray, atol: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """For each local Pauli label P return (label of U P U^dag, sign bit).

    Raises ``NotCliffordError`` if some image is not a signed Pauli.
    """
    d = U.shape[0]
    k = d.bit_length() - 1
    stack = _label_stack(k)
    images = np.einsum("ij,ajk,lk->ail", U, stack, U.conj())
    # overlaps[a, b] = tr(Q_b^dag  U P_a U^dag) / d
    overlaps = np.einsum("bij,aij->ab", stack.conj(), images) / d
    labels = np.argmax(np.abs(overlaps), axis=1)
    vals = overlaps[np.arange(4**k), labels]
    if not np.allclose(np.abs(vals), 1.0, atol=atol) or not np.allclose(vals.imag, 0.0, atol=atol):
        raise NotCliffordError("gate does not map Paulis to Paulis")
    signs = (vals.real < 0).astype(np.uint8)
    return labels.astype(np.int64), signs


def symplectic_matrix(table: np.ndarray, k: int) -> np.ndarray:
    """GF(2) matrix on (x_0..x_{k-1}, z_0..z_{k-1}) derived from a conjugation table.

    Column i is the image of the i-th basis vector (X_0.., then Z_0..).
    """
    mat = np.zeros((2 * k, 2 * k), dtype=np.uint8)
    for q in range(k):
        for col, label in ((q, 1 << (k - 1 - q)), (k + q, 1 << (2 * k - 1 - q))):
            img = int(table[label])
            z, x = img >> k, img & ((1 << k) - 1)
            for j in range(k):
                mat[j, col] = (x >> (k - 1 - j)) & 1
                mat[k + j, col] = (z >> (k - 1 - j)) & 1
    return mat


# ---------------------------------------------------------------------------
# two-qubit Clifford group, enumerated once in a fixed BFS order


def _enumerate_group(gens: list[np.ndarray]) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    """BFS closure of the generators, keyed exactly by conjugation tables.

    Returns the unitaries and, for each, the generator indices applied in order.
    """
    k = gens[0].shape[0].bit_length() - 1
    full = [conjugation_table(g) for g in gens]
    basis = [1 << j for j in range(2 * k)]

    def compose(g_idx: int, key: tuple) -> tuple:
        labels, signs = full[g_idx]
        return tuple((int(labels[lab]), sgn ^ int(signs[lab])) for lab, sgn in key)

    start_key = tuple((b, 0) for b in basis)
    seen = {start_key}
    mats = [np.eye(2**k, dtype=complex)]
    words: list[tuple[int, ...]] = [()]
    queue = deque([(start_key, 0)])
    while queue:
        key, idx = queue.popleft()
        for gi, g in enumerate(gens):
            nk = compose(gi, key)
            if nk not in seen:
                seen.add(nk)
                mats.append(g @ mats[idx])
                words.append(words[idx] + (gi,))
                queue.append((nk, len(mats) - 1))
    return np.stack(mats), words


@functools.lru_cache(maxsize=1)
def two_qubit_cliffords() -> np.ndarray:
    """All 11520 two-qubit Cliffords modulo global phase, as (11520, 4, 4) unitaries."""
    return _enumerate_group(
        [
            np.kron(FIXED["H"], _I),
            np.kron(_I, FIXED["H"]),
            np.kron(FIXED["S"], _I),
            np.kron(_I, FIXED["S"]),
            FIXED["CNOT"],
        ]
    )[0]


@functools.lru_cache(maxsize=1)
def _single_qubit_group() -> tuple[np.ndarray, list[tuple[int, ...]]]:
    return _enumerate_group([FIXED["H"], FIXED["S"]])


def single_qubit_cliffords() -> np.ndarray:
    """The 24 single-qubit Cliffords modulo global phase."""
    return _single_qubit_group()[0]


def single_qubit_clifford_words() -> tuple[tuple[str, ...], ...]:
    """H/S gate words (applied left to right) for each single-qubit Clifford index."""
    return tuple(tuple("HS"[g] for g in w) for w in _single_qubit_group()[1])
