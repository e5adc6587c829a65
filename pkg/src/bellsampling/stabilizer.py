"""Stabilizer tableaus, Pauli-frame trajectories, and Clifford Bell sampling.

Tableau rows are Hermitian Pauli strings ``(-1)^r X^x Z^z`` with ``x = z = 1``
read as a literal Y on that qubit, as in the CHP formalism. Rows ``0..n-1``
are destabilizers and rows ``n..2n-1`` stabilizers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import _pykernels, kernels
from .circuit import Circuit, Gate, UnsupportedGateError, clifford_table
from .noise import NoiseSpec, PauliChannel
from .samples import BellSampleSet
from .symplectic import F2Subspace, PauliVec, span_bits


def _g(x1, z1, x2, z2) -> np.ndarray:
    """Power of i picked up by the product (x1,z1)(x2,z2) of Pauli rows, elementwise."""
    x1 = x1.astype(np.int8)
    z1 = z1.astype(np.int8)
    x2 = x2.astype(np.int8)
    z2 = z2.astype(np.int8)
    return np.where(
        x1 & z1,
        z2 - x2,
        np.where(x1 & (1 - z1), z2 * (2 * x2 - 1), np.where((1 - x1) & z1, x2 * (1 - 2 * z2), 0)),
    )


class Tableau:
    """CHP tableau with destabilizers."""

    def __init__(self, x: np.ndarray, z: np.ndarray, r: np.ndarray):
        self.x = np.asarray(x, dtype=np.uint8)
        self.z = np.asarray(z, dtype=np.uint8)
        self.r = np.asarray(r, dtype=np.uint8)
        self.n = self.x.shape[1]

    @classmethod
    def zero_state(cls, n: int) -> "Tableau":
        x = np.zeros((2 * n, n), dtype=np.uint8)
        z = np.zeros((2 * n, n), dtype=np.uint8)
        x[np.arange(n), np.arange(n)] = 1
        z[n + np.arange(n), np.arange(n)] = 1
        return cls(x, z, np.zeros(2 * n, dtype=np.uint8))

    def copy(self) -> "Tableau":
        return Tableau(self.x.copy(), self.z.copy(), self.r.copy())

    # -- gates ---------------------------------------------------------------

    def apply_table(self, qubits, labels: np.ndarray, signs: np.ndarray) -> None:
        q = np.asarray(qubits, dtype=np.int64)
        k = len(q)
        w = 1 << np.arange(k - 1, -1, -1)
        lab = (self.z[:, q].astype(np.int64) @ w << k) | (self.x[:, q].astype(np.int64) @ w)
        img = labels[lab]
        self.r ^= signs[lab]
        for j in range(k):
            s = k - 1 - j
            self.x[:, q[j]] = (img >> s) & 1
            self.z[:, q[j]] = (img >> (k + s)) & 1

    def apply_gate(self, g: Gate) -> None:
        tab = clifford_table(g)
        if tab is None:
            raise UnsupportedGateError(f"{g.kind} is not a Clifford gate")
        self.apply_table(g.qubits, tab[0], tab[1])

    def apply_circuit(self, C: Circuit, offset: int = 0) -> None:
        for g in C.gates:
            self.apply_gate(g.shifted(offset) if offset else g)

    # -- row algebra -----------------------------------------------------------

    def _rowsum(self, h: np.ndarray, i: int) -> None:
        """Rows h <- row i times row h (h an index array, i a single row)."""
        if len(h) == 0:
            return
        gsum = _g(self.x[i][None, :], self.z[i][None, :], self.x[h], self.z[h]).sum(axis=1)
        tot = (2 * self.r[h].astype(np.int64) + 2 * int(self.r[i]) + gsum) % 4
        self.r[h] = (tot == 2).astype(np.uint8)
        self.x[h] ^= self.x[i]
        self.z[h] ^= self.z[i]

    def _product(self, rows) -> tuple[np.ndarray, np.ndarray, int]:
        """Product of tableau rows (which must commute); returns (x, z, sign bit)."""
        x = np.zeros(self.n, dtype=np.uint8)
        z = np.zeros(self.n, dtype=np.uint8)
        ph = 0
        for i in rows:
            ph += 2 * int(self.r[i]) + int(_g(self.x[i], self.z[i], x, z).sum())
            x ^= self.x[i]
            z ^= self.z[i]
        ph %= 4
        if ph % 2:
            raise ValueError("rows do not commute")
        return x, z, ph // 2

    # -- measurement -----------------------------------------------------------

    def measure(self, a: int, rng: np.random.Generator | None = None, forced: int | None = None) -> tuple[int, bool]:
        """Z measurement of qubit a; random outcomes use ``forced`` if given, else ``rng``."""
        n = self.n
        hits = np.flatnonzero(self.x[n:, a]) + n
        if hits.size:
            p = int(hits[0])
            others = np.flatnonzero(self.x[:, a])
            others = others[others != p]
            self._rowsum(others, p)
            self.x[p - n] = self.x[p]
            self.z[p - n] = self.z[p]
            self.r[p - n] = self.r[p]
            self.x[p] = 0
            self.z[p] = 0
            self.z[p, a] = 1
            if forced is not None:
                out = int(forced)
            else:
                out = int((rng or np.random.default_rng()).integers(2))
            self.r[p] = out
            return out, True
        rows = np.flatnonzero(self.x[:n, a]) + n
        _, _, s = self._product(rows)
        return s, False

    # -- queries ---------------------------------------------------------------

    def stabilizer_bits(self) -> np.ndarray:
        """(n, 2n) unsigned stabilizer generators in (z | x) column order."""
        n = self.n
        return np.concatenate([self.z[n:], self.x[n:]], axis=1)

    def destabilizer_bits(self) -> np.ndarray:
        n = self.n
        return np.concatenate([self.z[:n], self.x[:n]], axis=1)

    def stabilizers(self) -> list[tuple[PauliVec, int]]:
        return [(PauliVec.from_bits(b), int(s)) for b, s in zip(self.stabilizer_bits(), self.r[self.n :])]

    def subspace(self) -> F2Subspace:
        return span_bits(self.stabilizer_bits(), self.n)

    def expectation(self, P: PauliVec) -> int:
        """<psi|P|psi> in {-1, 0, +1} for the Hermitian Pauli string P."""
        n = self.n
        if P.n != n:
            raise ValueError("qubit count mismatch")
        b = P.bits()
        pz, px = b[:n], b[n:]
        anti = ((self.z[n:] & px) ^ (self.x[n:] & pz)).sum(axis=1) & 1
        if anti.any():
            return 0
        coeffs = ((self.z[:n] & px) ^ (self.x[:n] & pz)).sum(axis=1) & 1
        x, z, s = self._product(np.flatnonzero(coeffs) + n)
        if not (np.array_equal(x, px) and np.array_equal(z, pz)):
            raise AssertionError("stabilizer decomposition failed")
        return -1 if s else 1

    def is_valid(self) -> bool:
        n = self.n
        X = np.concatenate([self.x, self.z], axis=1).astype(np.int64)
        Om = np.block([[np.zeros((n, n), int), np.eye(n, dtype=int)], [np.eye(n, dtype=int), np.zeros((n, n), int)]])
        gram = (X @ Om @ X.T) % 2
        want = np.block([[np.zeros((n, n), int), np.eye(n, dtype=int)], [np.eye(n, dtype=int), np.zeros((n, n), int)]])
        return bool(np.array_equal(gram, want))


def simulate_tableau(C: Circuit) -> Tableau:
    C.require_clifford()
    t = Tableau.zero_state(C.n)
    t.apply_circuit(C)
    return t


def stabilizer_products(t: Tableau, select: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Signed products of stabilizer-generator subsets, vectorised over rows of ``select``.

    Returns ((M, 2n) labels in (z | x) order, (M,) sign bits).
    """
    n = t.n
    sel = np.asarray(select, dtype=bool)
    M = sel.shape[0]
    x = np.zeros((M, n), dtype=np.uint8)
    z = np.zeros((M, n), dtype=np.uint8)
    ph = np.zeros(M, dtype=np.int64)
    for j in range(n):
        rows = np.flatnonzero(sel[:, j])
        if rows.size == 0:
            continue
        i = n + j
        ph[rows] += 2 * int(t.r[i]) + _g(t.x[i][None, :], t.z[i][None, :], x[rows], z[rows]).sum(axis=1)
        x[rows] ^= t.x[i]
        z[rows] ^= t.z[i]
    return np.concatenate([z, x], axis=1), ((ph % 4) // 2).astype(np.uint8)


# ---------------------------------------------------------------------------
# Pauli frames


class FrameSimulator:
    """Pauli frames for many shots, packed 64 shots per word."""

    def __init__(self, nq: int, shots: int, rng: np.random.Generator):
        self.nq = nq
        self.shots = shots
        self.rng = rng
        W = kernels.words_for(shots)
        self.x = np.zeros((nq, W), dtype=np.uint64)
        self.z = np.zeros((nq, W), dtype=np.uint64)
        self._tail = np.uint64((1 << (shots % 64)) - 1) if shots % 64 else np.uint64(0xFFFFFFFFFFFFFFFF)

    def _random_words(self, rows: int) -> np.ndarray:
        nw = self.x.shape[1]
        w = np.frombuffer(self.rng.bytes(8 * rows * nw), dtype=np.uint64).reshape(rows, nw).copy()
        w[:, -1] &= self._tail
        return w

    def z_gauge(self) -> None:
        """Random Z on every qubit; the Z_i stabilize |0>, so this only randomizes the gauge."""
        self.z ^= self._random_words(self.nq)

    def apply(self, g: Gate, offset: int = 0) -> None:
        tab = clifford_table(g)
        if tab is None:
            raise UnsupportedGateError(f"{g.kind} is not a Clifford gate")
        q = np.asarray(g.qubits, dtype=np.int64) + offset
        if len(q) <= 2:
            kernels.frame_linear(self.x, self.z, q, tab[2])
        else:
            _pykernels.frame_linear(self.x, self.z, q, tab[2])

    def inject(self, qubit: int, ch: PauliChannel) -> None:
        k = int(self.rng.binomial(self.shots, ch.error_prob))
        if k == 0:
            return
        pos = self.rng.choice(self.shots, size=k, replace=False)
        w = np.asarray(ch.p[1:]) / ch.error_prob
        kind = self.rng.choice(3, size=k, p=w)  # 0: X, 1: Y, 2: Z
        xs = pos[kind <= 1]
        zs = pos[kind >= 1]
        kernels.xor_bits(self.x, qubit, xs.astype(np.int64))
        kernels.xor_bits(self.z, qubit, zs.astype(np.int64))

    def run(self, C: Circuit, noise: NoiseSpec | None, offset: int = 0) -> None:
        for g in C.gates:
            self.apply(g, offset)
            ch = noise.after_gate(g) if noise is not None else None
            if ch is not None:
                for q in g.qubits:
                    self.inject(q + offset, ch)

    def x_bits(self) -> np.ndarray:
        """(shots, nq) X components of the frames."""
        return kernels.unpack_shots(self.x, self.shots).T

    def z_bits(self) -> np.ndarray:
        return kernels.unpack_shots(self.z, self.shots).T


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def bell_measurement_gates(n: int) -> list[Gate]:
    return [Gate("CNOT", (i, n + i)) for i in range(n)]


def _bell_reference(C: Circuit) -> np.ndarray:
    n = C.n
    t = Tableau.zero_state(2 * n)
    t.apply_circuit(C)
    t.apply_circuit(C, offset=n)
    for g in bell_measurement_gates(n):
        t.apply_gate(g)
    for i in range(n):
        t.apply_gate(Gate("H", (i,)))
    return np.array([t.measure(q, forced=0)[0] for q in range(2 * n)], dtype=np.uint8)


def bell_sample_clifford(C: Circuit, noise: NoiseSpec | None, M: int, seed=None) -> BellSampleSet:
    """Two copies of C|0^n> (independent noise per copy), transversal Bell measurement."""
    C.require_clifford()
    if M < 1:
        raise ValueError("need M >= 1")
    n = C.n
    rng = _rng(seed)
    ref = _bell_reference(C)
    fs = FrameSimulator(2 * n, M, rng)
    fs.z_gauge()
    fs.run(C, noise, 0)
    fs.run(C, noise, n)
    for g in bell_measurement_gates(n):
        fs.apply(g)
    ch = noise.readout() if noise is not None else None
    if ch is not None:
        for q in range(2 * n):
            fs.inject(q, ch)
    for i in range(n):
        fs.apply(Gate("H", (i,)))
    return BellSampleSet(n, fs.x_bits() ^ ref[None, :])


def sample_computational(C: Circuit, noise: NoiseSpec | None, M: int, seed=None) -> np.ndarray:
    """(M, n) computational-basis outcomes of a single noisy copy."""
    C.require_clifford()
    rng = _rng(seed)
    tt = simulate_tableau(C)
    ref = np.array([tt.measure(q, forced=0)[0] for q in range(C.n)], dtype=np.uint8)
    fs = FrameSimulator(C.n, M, rng)
    fs.z_gauge()
    fs.run(C, noise)
    ch = noise.readout() if noise is not None else None
    if ch is not None:
        for q in range(C.n):
            fs.inject(q, ch)
    return fs.x_bits() ^ ref[None, :]


def clifford_ideal(C: Circuit):
    """Ideal computational distribution of C|0^n>: uniform on an affine subspace.

    Offset is the forced-zero reference outcome; directions are the X parts of the stabilizers.
    """
    from .estimators import AffineIdeal

    C.require_clifford()
    t = simulate_tableau(C)
    dirs = t.stabilizer_bits()[:, C.n:]
    tt = t.copy()
    ref = np.array([tt.measure(q, forced=0)[0] for q in range(C.n)], dtype=np.uint8)
    return AffineIdeal(ref, dirs)


def conjugation_pauli(C: Circuit) -> PauliVec:
    """Z-type k with conj(|C>) = sigma_k |C> up to phase, from one reference Bell sample."""
    C.require_clifford()
    n = C.n
    ref = _bell_reference(C)
    stab = simulate_tableau(C).stabilizer_bits()
    # eliminate with x columns first so the canonical coset representative is Z-type
    perm = np.r_[n : 2 * n, 0:n]
    sub = span_bits(stab[:, perm], n)
    red = sub.reduce_int(PauliVec.from_bits(ref[perm]).value)
    bits = PauliVec.from_int(n, red).bits()
    out = np.empty(2 * n, dtype=np.uint8)
    out[perm] = bits
    v = PauliVec.from_bits(out)
    if v.x:
        raise AssertionError("coset has no Z-type representative")
    return v


def exact_subsystem_renyi2(C: Circuit | Tableau, A) -> int:
    """|A| minus the number of independent stabilizers supported inside A, in bits."""
    t = C if isinstance(C, Tableau) else simulate_tableau(C)
    n = t.n
    A = sorted(set(int(a) for a in A))
    if any(a < 0 or a >= n for a in A):
        raise ValueError("subsystem index out of range")
    Ac = [q for q in range(n) if q not in set(A)]
    if not Ac:
        return 0
    G = t.stabilizer_bits()
    cols = Ac + [n + q for q in Ac]
    rank = span_bits(G[:, cols], len(Ac)).dim
    # dim of the subgroup supported on A is n - rank(G restricted to A^c)
    return len(A) - (n - rank)


# ---------------------------------------------------------------------------
# single-copy Pauli measurements and DFE


class PauliSource(Protocol):
    n: int

    def measure_paulis(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One +-1 outcome per row of ``labels`` ((M, 2n), (z | x) order), fresh copy each."""
        ...


class FrameSource:
    """Noisy copies of a Clifford state, simulated with Pauli frames."""

    def __init__(self, C: Circuit, noise: NoiseSpec | None = None, measurement_noise: bool = False):
        C.require_clifford()
        self.n = C.n
        self.C = C
        self.noise = noise
        self.measurement_noise = measurement_noise
        self.tableau = simulate_tableau(C)

    def measure_paulis(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        n = self.n
        labels = np.asarray(labels, dtype=np.uint8)
        M = labels.shape[0]
        t = self.tableau
        qz, qx = labels[:, :n], labels[:, n:]
        # commutation with the ideal stabilizers decides deterministic vs random outcomes
        anti = ((qz @ t.x[n:].T.astype(np.int64)) + (qx @ t.z[n:].T.astype(np.int64))) & 1
        det = ~anti.any(axis=1)
        coeffs = (((qz @ t.x[:n].T.astype(np.int64)) + (qx @ t.z[:n].T.astype(np.int64))) & 1).astype(bool)
        _, sign = stabilizer_products(t, coeffs)
        fs = FrameSimulator(n, M, rng)
        fs.run(self.C, self.noise)
        if self.measurement_noise and self.noise is not None and self.noise.readout() is not None:
            for q in range(n):
                fs.inject(q, self.noise.readout())
        ex, ez = fs.x_bits(), fs.z_bits()
        flip = ((qz & ex) ^ (qx & ez)).sum(axis=1) & 1
        out = np.where(sign ^ flip, -1, 1).astype(np.int8)
        rand = rng.integers(0, 2, size=M) * 2 - 1
        return np.where(det, out, rand).astype(np.int8)


@dataclass(frozen=True)
class DFEResult:
    value: float
    std_error: float
    M: int


def dfe_estimate(target: Tableau, source: PauliSource, M: int, seed=None) -> DFEResult:
    """Average of sign(s) * outcome(s) over uniformly random stabilizer-group elements s."""
    if M < 1:
        raise ValueError("need M >= 1")
    rng = _rng(seed)
    sel = rng.integers(0, 2, size=(M, target.n)).astype(bool)
    labels, sign = stabilizer_products(target, sel)
    outcomes = source.measure_paulis(labels, rng).astype(np.int64)
    vals = np.where(sign, -outcomes, outcomes)
    mean = float(vals.mean())
    se = float(vals.std(ddof=1) / np.sqrt(M)) if M > 1 else 1.0
    return DFEResult(mean, se, M)
