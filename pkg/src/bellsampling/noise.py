"""Single-qubit Pauli channels, their placement in circuits, and randomized compiling."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import gates as G
from .circuit import Circuit, Gate, clifford_table

# Pauli order used by channels: I, X, Y, Z
_CHANNEL_PAULIS = [G._I, G._X, G._Y, G._Z]
# products sigma_i sigma_j up to phase, indices in the I, X, Y, Z order
_PRODUCT = np.array([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]])


@dataclass(frozen=True)
class PauliChannel:
    """rho -> sum_i p_i sigma_i rho sigma_i with p = (p_I, p_X, p_Y, p_Z)."""

    p: tuple[float, float, float, float]

    def __post_init__(self):
        p = tuple(float(v) for v in self.p)
        if len(p) != 4:
            raise ValueError("a Pauli channel has four probabilities")
        if any(v < -1e-15 or v > 1 + 1e-15 for v in p) or abs(sum(p) - 1) > 1e-12:
            raise ValueError(f"invalid Pauli channel probabilities {p}")
        object.__setattr__(self, "p", p)

    @classmethod
    def from_xyz(cls, px: float, py: float, pz: float) -> "PauliChannel":
        return cls((1.0 - px - py - pz, px, py, pz))

    @classmethod
    def identity(cls) -> "PauliChannel":
        return cls((1.0, 0.0, 0.0, 0.0))

    @property
    def error_prob(self) -> float:
        return 1.0 - self.p[0]

    @property
    def is_identity(self) -> bool:
        return self.p[0] >= 1.0

    def compose(self, other: "PauliChannel") -> "PauliChannel":
        """Channel ``self`` after ``other``; Pauli channels commute so order is immaterial."""
        q = np.zeros(4)
        for i in range(4):
            for j in range(4):
                q[_PRODUCT[i, j]] += self.p[i] * other.p[j]
        q /= q.sum()
        return PauliChannel(tuple(q))

    def kraus(self) -> list[np.ndarray]:
        return [np.sqrt(pi) * s for pi, s in zip(self.p, _CHANNEL_PAULIS) if pi > 0]

    def superoperator(self) -> np.ndarray:
        """4x4 matrix acting on row-major vec(rho)."""
        return sum(pi * np.kron(s, s.conj()) for pi, s in zip(self.p, _CHANNEL_PAULIS))

    def to_json(self) -> dict:
        return {"px": self.p[1], "py": self.p[2], "pz": self.p[3]}


def depolarizing(eps: float) -> PauliChannel:
    """p_0 = 1 - 3 eps / 4 and p_X = p_Y = p_Z = eps / 4."""
    if not 0.0 <= eps <= 4.0 / 3.0:
        raise ValueError("depolarizing rate must lie in [0, 4/3]")
    return PauliChannel((1.0 - 0.75 * eps, eps / 4, eps / 4, eps / 4))


def purity_to_fidelity_channel(p: PauliChannel) -> PauliChannel:
    """q_k = sum over (i, j) with sigma_i sigma_j proportional to sigma_k of p_i p_j."""
    return p.compose(p)


def channel_from_config(block) -> PauliChannel | None:
    if block is None:
        return None
    if isinstance(block, (int, float)):
        return depolarizing(float(block))
    if not isinstance(block, dict):
        raise ValueError("noise channel must be an object or a number")
    if "depolarizing" in block:
        return depolarizing(float(block["depolarizing"]))
    keys = set(block) - {"px", "py", "pz"}
    if keys:
        raise ValueError(f"unknown channel keys {sorted(keys)}")
    return PauliChannel.from_xyz(float(block.get("px", 0)), float(block.get("py", 0)), float(block.get("pz", 0)))


@dataclass(frozen=True)
class NoiseSpec:
    """Where channels act: after each two-qubit gate on both its qubits, optionally after
    single-qubit gates, and on every qubit just before readout.

    ``m`` and ``E`` are the two-qubit gate count and the number of pre-measurement error
    locations for the circuit the spec was attached to.
    """

    channel: PauliChannel | None = None
    measurement: PauliChannel | None = None
    single_qubit: PauliChannel | None = None
    m: int = 0
    E: int = 0

    @classmethod
    def noiseless(cls) -> "NoiseSpec":
        return cls()

    @property
    def is_noiseless(self) -> bool:
        return all(c is None or c.is_identity for c in (self.channel, self.measurement, self.single_qubit))

    def after_gate(self, g: Gate) -> PauliChannel | None:
        ch = self.channel if g.arity >= 2 else self.single_qubit
        return None if ch is None or ch.is_identity else ch

    def readout(self) -> PauliChannel | None:
        ch = self.measurement
        return None if ch is None or ch.is_identity else ch

    def without_measurement(self) -> "NoiseSpec":
        return NoiseSpec(self.channel, None, self.single_qubit, self.m, self.E)

    @classmethod
    def from_config(cls, block: dict | None, C: Circuit | None = None) -> "NoiseSpec":
        block = block or {}
        spec = cls(channel_from_config(block.get("channel")), channel_from_config(block.get("measurement")),
                   channel_from_config(block.get("single_qubit")))
        return spec if C is None else attach_noise(C, spec.channel, spec.measurement, spec.single_qubit)


def attach_noise(
    C: Circuit,
    channel: PauliChannel | None,
    measurement_channel: PauliChannel | None = None,
    single_qubit: PauliChannel | None = None,
) -> NoiseSpec:
    m = C.two_qubit_count
    E = sum(g.arity for g in C.gates if g.arity >= 2) if channel is not None else 0
    if single_qubit is not None:
        E += sum(1 for g in C.gates if g.arity == 1)
    return NoiseSpec(channel, measurement_channel, single_qubit, m, E)


_PAULI_KIND = {1: "X", 2: "Z", 3: "Y"}  # indexed by 2*z + x


def _pauli_gates(label: int, qubits: tuple[int, ...]) -> list[Gate]:
    k = len(qubits)
    out = []
    for j, q in enumerate(qubits):
        s = k - 1 - j
        code = 2 * ((label >> (k + s)) & 1) + ((label >> s) & 1)
        if code:
            out.append(Gate(_PAULI_KIND[code], (q,)))
    return out


def randomized_compile(C: Circuit, seed=None) -> Circuit:
    """Dress every two-qubit Clifford G as P' G P with P uniform and P' = G P G^dag."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    out: list[Gate] = []
    remap = {}
    skipped = []
    for i, g in enumerate(C.gates):
        tab = clifford_table(g) if g.arity == 2 else None
        if g.arity == 2 and tab is None:
            skipped.append(i)
        if tab is None:
            out.append(g)
        else:
            label = int(rng.integers(16))
            out += _pauli_gates(label, g.qubits)
            out.append(g)
            out += _pauli_gates(int(tab[0][label]), g.qubits)
        remap[i + 1] = len(out)
    if skipped:
        warnings.warn(f"randomized_compile left {len(skipped)} non-Clifford two-qubit gates unwrapped", stacklevel=2)
    remap[0] = 0
    return Circuit(C.n, out, [remap[b] for b in C.layers])
