"""Dense state-vector and density-matrix oracles for small systems.

Basis index bits are big-endian: qubit 0 is the most significant bit.
"""

from __future__ import annotations

import functools

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate
from .noise import NoiseSpec, PauliChannel
from .samples import BellSampleSet
from .symplectic import PauliVec

STATE_CAP = 14
DENSITY_CAP = 10
BELL_TABLE_CAP = 8


class ResourceError(RuntimeError):
    """A dense representation would exceed its configured size cap."""


def _check(n: int, cap: int, what: str) -> None:
    if n > cap:
        raise ResourceError(f"{what} limited to n <= {cap}, got n = {n}")


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


# ---------------------------------------------------------------------------
# state vectors


def zero_state(n: int) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1.0
    return psi


def apply_matrix(psi: np.ndarray, n: int, U: np.ndarray, qubits) -> np.ndarray:
    """Apply a k-qubit unitary to the listed qubits (first listed = most significant)."""
    qubits = list(qubits)
    k = len(qubits)
    t = psi.reshape((2,) * n)
    t = np.tensordot(U.reshape((2,) * (2 * k)), t, axes=(list(range(k, 2 * k)), qubits))
    t = np.moveaxis(t, list(range(k)), qubits)
    return t.reshape(-1)


def apply_circuit(psi: np.ndarray, C: Circuit) -> np.ndarray:
    for g in C.gates:
        psi = apply_matrix(psi, C.n, g.matrix(), g.qubits)
    return psi


def simulate_state(C: Circuit, cap: int = STATE_CAP) -> np.ndarray:
    _check(C.n, cap, "state-vector simulation")
    return apply_circuit(zero_state(C.n), C)


def circuit_unitary(C: Circuit, cap: int = 8) -> np.ndarray:
    _check(C.n, cap, "unitary construction")
    d = 2**C.n
    cols = [apply_circuit(np.eye(d, dtype=complex)[:, j], C) for j in range(d)]
    return np.stack(cols, axis=1)


@functools.lru_cache(maxsize=256)
def _pauli_dense(n: int, value: int) -> np.ndarray:
    return G.label_matrix(n, value)


def pauli_matrix(P: PauliVec) -> np.ndarray:
    return _pauli_dense(P.n, P.value)


def apply_pauli(psi: np.ndarray, P: PauliVec) -> np.ndarray:
    """sigma_P |psi> without forming the 2^n x 2^n matrix."""
    n = P.n
    idx = np.arange(2**n)
    out = psi[idx ^ P.x]
    # Y = i X Z; acting on |j>: Z^z gives (-1)^{z.j}, then X^x, overall phase i^{#Y}
    j = idx ^ P.x
    sign = 1 - 2 * (np.bitwise_count(j & P.z) & 1).astype(np.int64)
    return out * sign * (1j ** (P.z & P.x).bit_count())


def pauli_expectation(psi: np.ndarray, P: PauliVec) -> float:
    if psi.shape[0] != 2**P.n:
        raise ValueError("qubit count mismatch")
    return float(np.real(np.vdot(psi, apply_pauli(psi, P))))


def sample_computational(psi: np.ndarray, M: int, seed=None) -> np.ndarray:
    """(M, n) computational-basis outcomes."""
    rng = _rng(seed)
    n = psi.shape[0].bit_length() - 1
    p = np.abs(psi) ** 2
    idx = rng.choice(p.shape[0], size=M, p=p / p.sum())
    return ((idx[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(np.uint8)


# ---------------------------------------------------------------------------
# Bell distributions


def _fwht(a: np.ndarray, n: int) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0 (length 2^n)."""
    rest = a.shape[1:]
    t = a.reshape((2,) * n + rest).astype(np.result_type(a, float), copy=True)
    for ax in range(n):
        a0 = np.take(t, 0, axis=ax)
        a1 = np.take(t, 1, axis=ax)
        t = np.stack([a0 + a1, a0 - a1], axis=ax)
    return t.reshape((2**n,) + rest)


def bell_probs_pure(psi: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """P(r) for copies psi (qubits 1..n) and phi (qubits n+1..2n), indexed by r as an integer."""
    d = psi.shape[0]
    if phi.shape[0] != d:
        raise ValueError("copies must have the same dimension")
    n = d.bit_length() - 1
    a = np.arange(d)
    V = psi[:, None] * phi[a[:, None] ^ a[None, :]]  # V[a, x] = psi[a] phi[a ^ x]
    amp = _fwht(V, n)  # amp[z, x]
    P = np.abs(amp) ** 2 / d
    return P.reshape(-1)


def bell_probs_mixed(rho: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """P(r) = <sigma_r| rho (x) sigma |sigma_r> for density matrices, indexed by r."""
    d = rho.shape[0]
    n = d.bit_length() - 1
    i = np.arange(d)
    Gm = np.empty((d, d), dtype=complex)  # Gm[u, x]
    for u in range(d):
        # sum_i rho[i, i^u] sigma[i^x, i^u^x]
        ix = i[:, None] ^ i[None, :]  # [i, x] -> i ^ x
        Gm[u] = np.einsum("i,ix->x", rho[i, i ^ u], sigma[ix, ix ^ u])
    P = np.real(_fwht(Gm, n)) / d
    return P.reshape(-1)


def bell_distribution_exact(C: Circuit, cap: int = BELL_TABLE_CAP) -> np.ndarray:
    """4^n table of P_C(r) = |<C|sigma_r|conj(C)>|^2 / 2^n."""
    _check(C.n, cap, "exact Bell distribution")
    psi = simulate_state(C)
    return bell_probs_pure(psi, psi)


def _index_to_bits(idx: np.ndarray, width: int) -> np.ndarray:
    return ((idx[:, None] >> np.arange(width - 1, -1, -1)) & 1).astype(np.uint8)


def sample_from_table(P: np.ndarray, n: int, M: int, seed=None) -> BellSampleSet:
    rng = _rng(seed)
    p = np.clip(P, 0, None)
    idx = rng.choice(p.shape[0], size=M, p=p / p.sum())
    return BellSampleSet(n, _index_to_bits(idx, 2 * n))


def bell_sample_dense(copy1: np.ndarray, copy2: np.ndarray, M: int, seed=None) -> BellSampleSet:
    n = copy1.shape[0].bit_length() - 1
    _check(2 * n, 28, "two-copy dense sampling")
    return sample_from_table(bell_probs_pure(copy1, copy2), n, M, seed)


def bell_sample_density(rho: np.ndarray, sigma: np.ndarray | None, M: int, seed=None) -> BellSampleSet:
    sigma = rho if sigma is None else sigma
    n = rho.shape[0].bit_length() - 1
    _check(n, DENSITY_CAP, "density Bell sampling")
    return sample_from_table(bell_probs_mixed(rho, sigma), n, M, seed)


def apply_readout_flips(samples: BellSampleSet, ch: PauliChannel | None, seed=None) -> BellSampleSet:
    """Readout channel on all 2n qubits between the CNOTs and the Hadamards, as classical flips.

    Z or Y on copy-1 qubit i flips bit i; X or Y on copy-2 qubit i flips bit n + i.
    """
    if ch is None or ch.is_identity:
        return samples
    rng = _rng(seed)
    n, M = samples.n, samples.M
    pI, pX, pY, pZ = ch.p
    flips = np.concatenate([rng.random((M, n)) < pZ + pY, rng.random((M, n)) < pX + pY], axis=1)
    return BellSampleSet(n, samples.bits ^ flips.astype(np.uint8))


def computational_from_density(rho: np.ndarray, M: int, readout: PauliChannel | None = None, seed=None) -> np.ndarray:
    """(M, n) computational samples of rho, with X or Y readout errors flipping each bit."""
    rng = _rng(seed)
    n = rho.shape[0].bit_length() - 1
    p = np.clip(np.real(np.diag(rho)), 0, None)
    bits = _index_to_bits(rng.choice(p.shape[0], size=M, p=p / p.sum()), n)
    if readout is not None and not readout.is_identity:
        bits ^= (rng.random((M, n)) < readout.p[1] + readout.p[2]).astype(np.uint8)
    return bits


# ---------------------------------------------------------------------------
# density matrices


def density(psi: np.ndarray) -> np.ndarray:
    return np.outer(psi, psi.conj())


def apply_unitary_density(rho: np.ndarray, n: int, U: np.ndarray, qubits) -> np.ndarray:
    d = 2**n
    # rows: U on the left; columns: conj(U) on the column index
    t = apply_matrix(rho.reshape(-1), 2 * n, U, list(qubits))
    t = apply_matrix(t, 2 * n, U.conj(), [n + q for q in qubits])
    return t.reshape(d, d)


def apply_channel_density(rho: np.ndarray, n: int, ch: PauliChannel, qubit: int) -> np.ndarray:
    out = np.zeros_like(rho)
    for pi, s in zip(ch.p, (G._I, G._X, G._Y, G._Z)):
        if pi > 0:
            out += pi * apply_unitary_density(rho, n, s, [qubit])
    return out


def evolve_density(C: Circuit, noise: NoiseSpec | None = None, include_measurement: bool = False,
                   cap: int = DENSITY_CAP) -> np.ndarray:
    """Exact noisy state: each gate followed by its channel on every qubit it touches."""
    _check(C.n, cap, "density-matrix evolution")
    n = C.n
    rho = density(zero_state(n))
    for g in C.gates:
        rho = apply_unitary_density(rho, n, g.matrix(), g.qubits)
        ch = noise.after_gate(g) if noise is not None else None
        if ch is not None:
            for q in g.qubits:
                rho = apply_channel_density(rho, n, ch, q)
    if include_measurement and noise is not None and noise.readout() is not None:
        for q in range(n):
            rho = apply_channel_density(rho, n, noise.readout(), q)
    return rho


def exact_purity(rho: np.ndarray) -> float:
    return float(np.real(np.vdot(rho.conj().T, rho)))


def exact_fidelity(rho: np.ndarray, target) -> float:
    """<psi|rho|psi> for a target state vector or circuit."""
    psi = simulate_state(target) if isinstance(target, Circuit) else np.asarray(target)
    return float(np.real(np.vdot(psi, rho @ psi)))


def reduced_density(psi: np.ndarray, n: int, A) -> np.ndarray:
    A = sorted(A)
    rest = [q for q in range(n) if q not in A]
    t = psi.reshape((2,) * n).transpose(A + rest).reshape(2 ** len(A), -1)
    return t @ t.conj().T


def subsystem_purity_exact(psi: np.ndarray, n: int, A) -> float:
    r = reduced_density(psi, n, A)
    return float(np.real(np.vdot(r.conj().T, r)))


def white_noise_state(psi: np.ndarray, eta: float) -> np.ndarray:
    d = psi.shape[0]
    return (1 - eta) * density(psi) + eta * np.eye(d) / d


def tfim_hamiltonian(n: int, J: float = 1.0, h: float = 1.0, periodic: bool = True) -> np.ndarray:
    """H = -J sum Z_i Z_{i+1} - h sum X_i as a dense matrix."""
    _check(n, DENSITY_CAP, "dense Hamiltonian")
    H = np.zeros((2**n, 2**n), dtype=complex)
    bonds = [(i, i + 1) for i in range(n - 1)] + ([(n - 1, 0)] if periodic and n > 2 else [])
    for a, b in bonds:
        H -= J * pauli_matrix(PauliVec(n, (1 << (n - 1 - a)) | (1 << (n - 1 - b)), 0))
    for i in range(n):
        H -= h * pauli_matrix(PauliVec(n, 0, 1 << (n - 1 - i)))
    return H


def thermal_state(H: np.ndarray, beta: float) -> np.ndarray:
    """exp(-beta H) / tr, via the eigendecomposition (shifted by the ground energy)."""
    w, V = np.linalg.eigh(H)
    g = np.exp(-beta * (w - w[0]))
    rho = (V * g) @ V.conj().T
    return rho / np.trace(rho).real


# ---------------------------------------------------------------------------
# random states and unitaries


def haar_unitary(d: int, seed=None) -> np.ndarray:
    """Haar-random unitary from the QR decomposition of a Ginibre matrix with phase fix."""
    rng = _rng(seed)
    Z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    Q, R = np.linalg.qr(Z)
    ph = np.diag(R) / np.abs(np.diag(R))
    return Q * ph[None, :]


def haar_circuit(n: int, layers: int, seed=None) -> Circuit:
    """Layers of Haar-random two-qubit gates on a random perfect matching (odd n leaves one idle)."""
    rng = _rng(seed)
    gates = []
    ends = []
    for _ in range(layers):
        perm = rng.permutation(n)
        for a, b in perm[: 2 * (n // 2)].reshape(-1, 2):
            gates.append(Gate.unitary(haar_unitary(4, rng), (int(a), int(b))))
        ends.append(len(gates))
    return Circuit(n, gates, tuple(ends))


def _canonical_key(psi: np.ndarray) -> bytes:
    i = int(np.argmax(np.abs(psi) > 1e-9))
    v = psi * (abs(psi[i]) / psi[i])
    return (np.round(v, 8) + 0.0 + 0.0j).tobytes()


@functools.lru_cache(maxsize=8)
def stabilizer_states(n: int) -> np.ndarray:
    """All n-qubit stabilizer states (modulo global phase), by closure under H, S, CNOT."""
    _check(n, 4, "stabilizer-state enumeration")
    gens: list[tuple[np.ndarray, list[int]]] = []
    for q in range(n):
        gens.append((G.FIXED["H"], [q]))
        gens.append((G.FIXED["S"], [q]))
    for a in range(n):
        for b in range(n):
            if a != b:
                gens.append((G.FIXED["CNOT"], [a, b]))
    start = zero_state(n)
    seen = {_canonical_key(start)}
    states = [start]
    frontier = [start]
    while frontier:
        nxt = []
        for psi in frontier:
            for U, qs in gens:
                phi = apply_matrix(psi, n, U, qs)
                key = _canonical_key(phi)
                if key not in seen:
                    seen.add(key)
                    states.append(phi)
                    nxt.append(phi)
        frontier = nxt
    return np.stack(states)


# ---------------------------------------------------------------------------
# single-copy Pauli measurement sources


class DensitySource:
    """Copies of a fixed density matrix; each Pauli measurement consumes a fresh copy."""

    def __init__(self, rho: np.ndarray):
        self.rho = np.asarray(rho, dtype=complex)
        self.n = self.rho.shape[0].bit_length() - 1

    def expectation(self, P: PauliVec) -> float:
        return float(np.real(np.trace(self.rho @ pauli_matrix(P))))

    def measure_paulis(self, labels: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        labels = np.asarray(labels, dtype=np.uint8)
        uniq, inv = np.unique(labels, axis=0, return_inverse=True)
        ev = np.array([self.expectation(PauliVec.from_bits(u)) for u in uniq])
        p_plus = np.clip((1 + ev[inv.reshape(-1)]) / 2, 0, 1)
        return np.where(rng.random(labels.shape[0]) < p_plus, 1, -1).astype(np.int8)


class StateSource(DensitySource):
    def __init__(self, psi: np.ndarray):
        self.psi = np.asarray(psi, dtype=complex)
        self.n = self.psi.shape[0].bit_length() - 1

    def expectation(self, P: PauliVec) -> float:
        return pauli_expectation(self.psi, P)

    def sample_computational(self, M: int, rng: np.random.Generator) -> np.ndarray:
        return sample_computational(self.psi, M, rng)

    def bell_samples(self, M: int, rng: np.random.Generator) -> BellSampleSet:
        return bell_sample_dense(self.psi, self.psi, M, rng)
