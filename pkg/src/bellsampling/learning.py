"""Stabilizer-nullity estimation and learning of Clifford+T states from Bell samples."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from . import statevector as sv
from .circuit import Circuit, Gate, parse, serialize
from .samples import BellSampleSet
from .stabilizer import Tableau
from .symplectic import F2Subspace, PauliVec, radical, span_bits


class AmbiguousOutcomeError(RuntimeError):
    """The majority computational outcome is not a strict majority."""


@dataclass(frozen=True)
class MagicEstimate:
    t_hat: int
    G_prime: F2Subspace
    nullity_radical: int
    flags: tuple[str, ...] = ()


def bell_differences(samples: BellSampleSet, mode: str = "pairs") -> np.ndarray:
    """Differences b^{2i} + b^{2i+1} of disjoint consecutive pairs, or all b^j + b^0 with mode="all"."""
    b = samples.bits
    if mode == "pairs":
        h = (b.shape[0] // 2) * 2
        return b[0:h:2] ^ b[1:h:2]
    if mode == "all":
        return b[1:] ^ b[0][None, :]
    raise ValueError(f"unknown difference mode {mode!r}")


def magic_estimate(samples: BellSampleSet, mode: str = "pairs") -> MagicEstimate:
    """t_hat = dim(span of Bell differences) - n, a lower bound on the T count."""
    if samples.M < 2:
        raise ValueError("need at least two samples")
    n = samples.n
    Gp = span_bits(bell_differences(samples, mode), n)
    flags: tuple[str, ...] = ()
    t_hat = Gp.dim - n
    if t_hat < 0:
        t_hat, flags = 0, ("undersampled",)
    null = n - radical(Gp).dim
    if null != t_hat:
        flags += ("nullity_differs",)
    return MagicEstimate(t_hat, Gp, null, flags)


# ---------------------------------------------------------------------------
# Clifford synthesis


class _PauliRows:
    """Signed Pauli rows evolved by conjugation, reusing the tableau gate update."""

    def __init__(self, rows: list[PauliVec], signs: list[int] | None = None):
        n = rows[0].n
        b = np.array([r.bits() for r in rows], dtype=np.uint8)
        self.t = Tableau(b[:, n:].copy(), b[:, :n].copy(), np.array(signs or [0] * len(rows), dtype=np.uint8))
        self.n = n
        self.gates: list[Gate] = []

    def apply(self, g: Gate) -> None:
        self.t.apply_gate(g)
        self.gates.append(g)

    def row(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return self.t.x[i], self.t.z[i]


def clifford_from_isotropic(generators: list[PauliVec], signs: list[int] | None = None) -> Circuit:
    """Clifford circuit U with U sigma_i U^dag = +-Z_i for each generator i (wire i)."""
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    k = len(generators)
    sub = F2Subspace.from_ints(n, [g.value for g in generators])
    if sub.dim != k:
        raise ValueError("generators are linearly dependent")
    if not sub.is_isotropic():
        raise ValueError("generators do not commute")
    R = _PauliRows(list(generators), signs)
    for i in range(k):
        x, z = R.row(i)
        # bring every non-identity factor on wires >= i to X
        for q in range(i, n):
            if x[q] and z[q]:
                R.apply(Gate("SDG", (q,)))
            elif z[q] and not x[q]:
                R.apply(Gate("H", (q,)))
        x, z = R.row(i)
        support = [q for q in range(i, n) if x[q]]
        if not support:
            raise AssertionError("generator reduced to identity on the free wires")
        p = support[0]
        for q in support[1:]:
            R.apply(Gate("CNOT", (p, q)))
        R.apply(Gate("H", (p,)))
        if p != i:
            R.apply(Gate("CNOT", (p, i)))
            R.apply(Gate("CNOT", (i, p)))
            R.apply(Gate("CNOT", (p, i)))
        # clear Z factors left on the already fixed wires j < i
        x, z = R.row(i)
        for j in range(i):
            if z[j]:
                R.apply(Gate("CNOT", (j, i)))
    C = Circuit(n, R.gates)
    x, z = R.t.x, R.t.z
    want_z = np.zeros((k, n), dtype=np.uint8)
    want_z[np.arange(k), np.arange(k)] = 1
    if x.any() or not np.array_equal(z, want_z):
        raise AssertionError("synthesized Clifford fails the conjugation check")
    return C


# ---------------------------------------------------------------------------
# tomography


_BASIS_ROT = {"Z": (), "X": ("H",), "Y": ("SDG", "H")}


def pure_state_tomography(counts: dict[str, np.ndarray], t: int) -> np.ndarray:
    """Linear-inversion estimate from Pauli-basis outcome bits, projected to its top eigenvector.

    ``counts`` maps a basis string over XYZ (length t) to an (m, t) array of outcome bits.
    """
    if t == 0:
        return np.ones(1, dtype=complex)
    rho = np.zeros((2**t, 2**t), dtype=complex)
    for letters in itertools.product("IXYZ", repeat=t):
        active = [j for j, c in enumerate(letters) if c != "I"]
        vals = []
        for basis, bits in counts.items():
            if all(basis[j] == letters[j] for j in active) and bits.shape[0]:
                par = bits[:, active].sum(axis=1) & 1 if active else np.zeros(bits.shape[0], dtype=int)
                vals.append(1.0 - 2.0 * par)
        ev = float(np.concatenate(vals).mean()) if vals else 0.0
        if not active:
            ev = 1.0
        rho += ev * sv.pauli_matrix(PauliVec.parse("".join(letters)))
    rho /= 2**t
    w, V = np.linalg.eigh(rho)
    return V[:, -1]


# ---------------------------------------------------------------------------
# learning


class LearningSource(Protocol):
    n: int

    def bell_samples(self, M: int, rng: np.random.Generator) -> BellSampleSet: ...

    def sample_after(self, C: Circuit, M: int, rng: np.random.Generator) -> np.ndarray: ...


class DenseLearningSource:
    """Exact copies of a small pure state."""

    def __init__(self, psi: np.ndarray):
        self.psi = np.asarray(psi, dtype=complex)
        self.n = self.psi.shape[0].bit_length() - 1

    def bell_samples(self, M: int, rng: np.random.Generator) -> BellSampleSet:
        return sv.bell_sample_dense(self.psi, self.psi, M, rng)

    def sample_after(self, C: Circuit, M: int, rng: np.random.Generator) -> np.ndarray:
        """Apply C to fresh copies and measure every qubit in the computational basis."""
        return sv.sample_computational(sv.apply_circuit(self.psi, C), M, rng)


@dataclass(frozen=True)
class LearnedState:
    clifford: Circuit
    x: tuple[int, ...]
    phi: np.ndarray
    t_hat: int = 0

    def to_json(self) -> str:
        return json.dumps({
            "clifford": json.loads(serialize(self.clifford)),
            "x": "".join(str(b) for b in self.x),
            "phi": [[float(v.real), float(v.imag)] for v in self.phi],
            "t_hat": self.t_hat,
        })

    @classmethod
    def from_json(cls, text: str) -> "LearnedState":
        obj = json.loads(text)
        C = parse(json.dumps(obj["clifford"]))
        phi = np.array([complex(a, b) for a, b in obj["phi"]])
        return cls(C, tuple(int(c) for c in obj["x"]), phi, int(obj.get("t_hat", 0)))


def bell_sample_budget(n: int, eps: float, delta: float) -> int:
    return int(math.ceil(2 * n * math.log(1 / delta) / eps))


def tomography_budget(t: int, eps: float, delta: float, const: float = 1.0) -> int:
    return int(math.ceil(const * 2**t * math.log(1 / delta) / eps**2))


def learn_clifford_t(
    source: LearningSource,
    eps: float,
    delta: float,
    seed=None,
    t_cap: int = 6,
    tomo_const: float = 1.0,
    mode: str = "pairs",
) -> LearnedState:
    """Learn a Clifford+T state as U^dag (|x> (x) |phi>).

    Bell differences give G'; its radical gives commuting generators that U maps to +-Z on
    the first k wires; single copies rotated by U give the majority x on those wires and,
    after discarding records that disagree with x, Pauli-basis tomography of the rest.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    n = source.n
    samples = source.bell_samples(bell_sample_budget(n, eps, delta), rng)
    est = magic_estimate(samples, mode)
    Cp = radical(est.G_prime)
    k = Cp.dim
    t = n - k
    if t > t_cap:
        raise sv.ResourceError(f"{t} qubits to tomograph exceed the cap {t_cap}")
    if k:
        U = clifford_from_isotropic(Cp.vectors())
    else:
        U = Circuit(n)
    m_total = tomography_budget(t, eps, delta, tomo_const)
    bases = ["".join(b) for b in itertools.product("XYZ", repeat=t)] or [""]
    per_basis = max(1, int(math.ceil(m_total / len(bases))))
    records: dict[str, np.ndarray] = {}
    for basis in bases:
        gates = list(U.gates)
        for j, c in enumerate(basis):
            for kind in _BASIS_ROT[c]:
                gates.append(Gate(kind, (k + j,)))
        records[basis] = source.sample_after(Circuit(n, gates), per_basis, rng)
    allbits = np.concatenate(list(records.values()))
    head = allbits[:, :k]
    if k:
        keys, counts = np.unique(head, axis=0, return_counts=True)
        top = int(np.argmax(counts))
        if counts[top] * 2 <= head.shape[0]:
            raise AmbiguousOutcomeError("no strict majority on the stabilized wires")
        x = keys[top]
    else:
        x = np.zeros(0, dtype=np.uint8)
    kept = {b: r[np.all(r[:, :k] == x[None, :], axis=1)][:, k:] for b, r in records.items()}
    phi = pure_state_tomography(kept, t)
    return LearnedState(U, tuple(int(v) for v in x), phi, est.t_hat)


def reconstruct_state(l: LearnedState, cap: int = sv.STATE_CAP) -> np.ndarray:
    """U^dag (|x> (x) |phi>)."""
    n = l.clifford.n
    if n > cap:
        raise sv.ResourceError(f"reconstruction limited to n <= {cap}")
    k = len(l.x)
    head = np.zeros(2**k, dtype=complex)
    head[int("".join(map(str, l.x)) or "0", 2)] = 1.0
    psi = np.kron(head, l.phi)
    return sv.apply_circuit(psi, l.clifford.inverse())
