"""Circuit representation, random ensembles and the JSON circuit format."""

from __future__ import annotations

import functools
import json
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import gates as G

ONE_QUBIT = {"H", "S", "SDG", "X", "Y", "Z", "SQRTX", "T", "TDG", "U1", "C1"}
TWO_QUBIT = {"CNOT", "CZ", "ISWAP", "U2", "C2"}
KINDS = ONE_QUBIT | TWO_QUBIT | {"PROT"}


class UnsupportedGateError(ValueError):
    """Raised when a Clifford-only engine meets a non-Clifford gate."""


class CircuitParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"{msg} (line {line}, column {col})")
        self.line = line
        self.col = col


def _freeze_matrix(m: np.ndarray) -> tuple:
    return tuple(tuple(complex(v) for v in row) for row in np.asarray(m, dtype=complex))


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    axis: str | None = None
    theta: float | None = None
    index: int | None = None
    umatrix: tuple | None = None

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        k = self.kind
        if k not in KINDS:
            raise ValueError(f"unknown gate kind {k!r}")
        if len(set(self.qubits)) != len(self.qubits) or any(q < 0 for q in self.qubits):
            raise ValueError(f"invalid qubit list {self.qubits} for {k}")
        if k == "PROT":
            if not self.axis or set(self.axis) - set("IXYZ") or self.theta is None:
                raise ValueError("PROT needs an axis over IXYZ and an angle")
            if len(self.axis) != len(self.qubits):
                raise ValueError("PROT axis length must match its qubit count")
        else:
            want = 1 if k in ONE_QUBIT else 2
            if len(self.qubits) != want:
                raise ValueError(f"{k} acts on {want} qubit(s), got {len(self.qubits)}")
        if k in ("U1", "U2"):
            if self.umatrix is None:
                raise ValueError(f"{k} needs a matrix")
            m = np.array(self.umatrix, dtype=complex)
            d = 2 ** len(self.qubits)
            if m.shape != (d, d) or not np.allclose(m @ m.conj().T, np.eye(d), atol=1e-10):
                raise ValueError(f"{k} matrix is not a {d}x{d} unitary")
        if k == "C1" and not (self.index is not None and 0 <= self.index < 24):
            raise ValueError("C1 index must lie in [0, 24)")
        if k == "C2" and not (self.index is not None and 0 <= self.index < 11520):
            raise ValueError("C2 index must lie in [0, 11520)")

    @classmethod
    def unitary(cls, matrix: np.ndarray, qubits: Sequence[int]) -> "Gate":
        kind = "U1" if len(qubits) == 1 else "U2"
        return cls(kind, tuple(qubits), umatrix=_freeze_matrix(matrix))

    @classmethod
    def prot(cls, axis: str, theta: float, qubits: Sequence[int]) -> "Gate":
        return cls("PROT", tuple(qubits), axis=axis, theta=float(theta))

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def matrix(self) -> np.ndarray:
        return _gate_matrix(self.kind, self.axis, self.theta, self.index, self.umatrix)

    def is_clifford(self) -> bool:
        return clifford_table(self) is not None

    def shifted(self, offset: int) -> "Gate":
        return Gate(self.kind, tuple(q + offset for q in self.qubits), self.axis, self.theta, self.index, self.umatrix)

    def to_json(self) -> dict:
        out: dict = {"g": self.kind, "q": list(self.qubits)}
        if self.kind == "PROT":
            out["axis"] = self.axis
            out["theta"] = self.theta
        if self.index is not None:
            out["index"] = self.index
        if self.umatrix is not None:
            out["m"] = [[[v.real, v.imag] for v in row] for row in self.umatrix]
        return out


@functools.lru_cache(maxsize=4096)
def _gate_matrix(kind, axis, theta, index, umatrix) -> np.ndarray:
    if kind in G.FIXED:
        return G.FIXED[kind]
    if kind == "PROT":
        return G.pauli_rotation(axis, theta)
    if kind == "C1":
        return G.single_qubit_cliffords()[index]
    if kind == "C2":
        return G.two_qubit_cliffords()[index]
    return np.array(umatrix, dtype=complex)


@functools.lru_cache(maxsize=4096)
def _table_for(kind, axis, theta, index, umatrix):
    if kind in G.NON_CLIFFORD_KINDS:
        return None
    try:
        labels, signs = G.conjugation_table(_gate_matrix(kind, axis, theta, index, umatrix))
    except G.NotCliffordError:
        return None
    k = labels.shape[0].bit_length() // 2
    return labels, signs, G.symplectic_matrix(labels, k)


def clifford_table(g: Gate):
    """(image labels, sign bits, GF(2) frame matrix) of a Clifford gate, or None."""
    return _table_for(g.kind, g.axis, g.theta, g.index, g.umatrix)


@dataclass(frozen=True)
class Circuit:
    n: int
    gates: tuple[Gate, ...] = ()
    layers: tuple[int, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        object.__setattr__(self, "layers", tuple(int(v) for v in self.layers))
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        for g in self.gates:
            if max(g.qubits) >= self.n:
                raise ValueError(f"gate {g.kind} on {g.qubits} exceeds n={self.n}")
        if any(b < a for a, b in zip(self.layers, self.layers[1:])):
            raise ValueError("layer boundaries must be monotone")
        if self.layers and (self.layers[0] < 0 or self.layers[-1] > len(self.gates)):
            raise ValueError("layer boundary out of range")

    def __len__(self) -> int:
        return len(self.gates)

    @property
    def two_qubit_count(self) -> int:
        return sum(1 for g in self.gates if g.arity == 2)

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def is_clifford(self) -> bool:
        return all(g.is_clifford() for g in self.gates)

    def require_clifford(self) -> None:
        for i, g in enumerate(self.gates):
            if not g.is_clifford():
                raise UnsupportedGateError(f"gate {i} ({g.kind}) is not Clifford")

    def then(self, other: "Circuit") -> "Circuit":
        """Concatenation: ``self`` first, then ``other``."""
        if other.n != self.n:
            raise ValueError("qubit count mismatch")
        off = len(self.gates)
        return Circuit(self.n, self.gates + other.gates, self.layers + tuple(off + b for b in other.layers))

    def layer_slices(self) -> list[tuple[Gate, ...]]:
        bounds = [0, *self.layers]
        if not self.layers or self.layers[-1] != len(self.gates):
            bounds.append(len(self.gates))
        return [self.gates[a:b] for a, b in zip(bounds, bounds[1:])]

    def inverse(self) -> "Circuit":
        inv = []
        for g in reversed(self.gates):
            if g.kind == "PROT":
                inv.append(Gate.prot(g.axis, -g.theta, g.qubits))
            else:
                inv.append(Gate.unitary(g.matrix().conj().T, g.qubits))
        return Circuit(self.n, inv)


# ---------------------------------------------------------------------------
# architectures


@dataclass(frozen=True)
class Architecture:
    kind: str  # "chain_open", "chain_closed", "all_to_all", "grid"
    n: int
    rows: int = 0
    cols: int = 0

    @classmethod
    def chain(cls, n: int, closed: bool = True) -> "Architecture":
        return cls("chain_closed" if closed else "chain_open", n)

    @classmethod
    def all_to_all(cls, n: int) -> "Architecture":
        return cls("all_to_all", n)

    @classmethod
    def grid(cls, rows: int, cols: int) -> "Architecture":
        return cls("grid", rows * cols, rows, cols)

    @property
    def is_chain(self) -> bool:
        return self.kind.startswith("chain")

    @functools.cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        n = self.n
        if self.kind == "chain_open":
            return tuple((i, i + 1) for i in range(n - 1))
        if self.kind == "chain_closed":
            es = [(i, i + 1) for i in range(n - 1)]
            if n > 2:
                es.append((n - 1, 0))
            return tuple(es)
        if self.kind == "all_to_all":
            return tuple((i, j) for i in range(n) for j in range(i + 1, n))
        if self.kind == "grid":
            es = []
            for r in range(self.rows):
                for c in range(self.cols):
                    q = r * self.cols + c
                    if c + 1 < self.cols:
                        es.append((q, q + 1))
                    if r + 1 < self.rows:
                        es.append((q, q + self.cols))
            return tuple(es)
        raise ValueError(f"unknown architecture {self.kind!r}")

    def boundary_count(self, A: Iterable[int]) -> int:
        """Number of coupling edges with exactly one endpoint in A."""
        a = set(A)
        return sum(1 for i, j in self.edges if (i in a) != (j in a))

    def is_contiguous(self, A: Iterable[int]) -> bool:
        a = sorted(set(A))
        if not a or len(a) == self.n:
            return True
        if self.kind == "chain_open":
            return a[-1] - a[0] + 1 == len(a)
        if self.kind == "chain_closed":
            # a cyclic interval has at most one gap in its sorted positions
            gaps = sum(1 for x, y in zip(a, a[1:] + [a[0] + self.n]) if y - x > 1)
            return gaps <= 1
        return True


# ---------------------------------------------------------------------------
# generators


def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def random_all_to_all_clifford(n: int, layers: int, seed=None) -> Circuit:
    """``layers`` rounds of uniform two-qubit Cliffords on a random perfect matching."""
    if n < 2:
        raise ValueError("need n >= 2")
    if layers < 1:
        raise ValueError("need layers >= 1")
    rng = _rng(seed)
    out: list[Gate] = []
    bounds = []
    for _ in range(layers):
        perm = rng.permutation(n)
        idx = rng.integers(0, 11520, size=n // 2)
        for i in range(n // 2):
            out.append(Gate("C2", (int(perm[2 * i]), int(perm[2 * i + 1])), index=int(idx[i])))
        bounds.append(len(out))
    return Circuit(n, out, bounds)


def brickwork_bonds(n: int, sublayer: int, periodic: bool = True) -> list[tuple[int, int]]:
    """Bonds of one brickwork sublayer: even bonds first, then odd (with wrap if periodic)."""
    start = sublayer % 2
    bonds = [(i, i + 1) for i in range(start, n - 1, 2)]
    if start == 1 and periodic and n > 2 and n % 2 == 0:
        bonds.append((n - 1, 0))
    return bonds


def brickwork_clifford(n: int, depth: int, seed=None, periodic: bool = True) -> Circuit:
    """1D brickwork of uniform two-qubit Cliffords; ``depth`` counts sublayers."""
    if n < 2 or depth < 0:
        raise ValueError("need n >= 2 and depth >= 0")
    rng = _rng(seed)
    out: list[Gate] = []
    bounds = []
    for t in range(depth):
        for b in brickwork_bonds(n, t, periodic):
            out.append(Gate("C2", b, index=int(rng.integers(0, 11520))))
        bounds.append(len(out))
    return Circuit(n, out, bounds)


def scrambling_brickwork(n: int, depth: int, seed=None, periodic: bool = True) -> Circuit:
    """Brickwork of iSWAP (H x H) gates, each followed by random single-qubit Cliffords.

    The core gate turns |00> into a Bell pair and carries two ebits across a bond when its
    inputs are halves of Bell pairs, so entanglement grows at the maximal rate per sublayer.
    """
    if n < 2 or depth < 0:
        raise ValueError("need n >= 2 and depth >= 0")
    rng = _rng(seed)
    out: list[Gate] = []
    bounds = []
    for t in range(depth):
        for a, b in brickwork_bonds(n, t, periodic):
            out += [Gate("H", (a,)), Gate("H", (b,)), Gate("ISWAP", (a, b))]
            out += [Gate("C1", (a,), index=int(rng.integers(24))), Gate("C1", (b,), index=int(rng.integers(24)))]
        bounds.append(len(out))
    return Circuit(n, out, bounds)


def crystalline_floquet(n: int, depth: int, scrambling: bool, periodic: bool = True) -> Circuit:
    """iSWAP brickwork; with ``scrambling`` every iSWAP is followed by SqrtX on both qubits."""
    if n % 2:
        raise ValueError("crystalline circuit needs even n")
    if depth < 1:
        raise ValueError("need depth >= 1")
    out: list[Gate] = []
    bounds = []
    for t in range(depth):
        for a, b in brickwork_bonds(n, t, periodic):
            out.append(Gate("ISWAP", (a, b)))
            if scrambling:
                out += [Gate("SQRTX", (a,)), Gate("SQRTX", (b,))]
        bounds.append(len(out))
    return Circuit(n, out, bounds)


def random_clifford_block(n: int, depth: int, seed=None) -> Circuit:
    rng = _rng(seed)
    if n == 1:
        return Circuit(1, [Gate("C1", (0,), index=int(rng.integers(24))) for _ in range(max(depth, 1))])
    if depth == 0:
        return Circuit(n)
    return random_all_to_all_clifford(n, depth, rng)


def interleave_t(blocks: Sequence[Circuit], positions: Sequence[int]) -> Circuit:
    """C_t T_{x_t} ... T_{x_1} C_0 as a circuit (C_0 applied first)."""
    if len(blocks) != len(positions) + 1:
        raise ValueError("need exactly one more Clifford block than T gates")
    n = blocks[0].n
    circ = blocks[0]
    for pos, block in zip(positions, blocks[1:]):
        circ = circ.then(Circuit(n, [Gate("T", (int(pos),))])).then(block)
    return circ


def clifford_plus_t_random(n: int, t: int, clifford_depth: int = 3, seed=None) -> Circuit:
    """t+1 random Clifford blocks interleaved with t T gates on random qubits."""
    if n < 1 or t < 0 or clifford_depth < 0:
        raise ValueError("need n >= 1, t >= 0 and clifford_depth >= 0")
    rng = _rng(seed)
    blocks = [random_clifford_block(n, clifford_depth, rng) for _ in range(t + 1)]
    positions = [int(p) for p in rng.integers(0, n, size=t)]
    return interleave_t(blocks, positions)


def bqp_gadget(C: Circuit) -> Circuit:
    """Ancilla 0 in |+>, C on qubits 1..n, then exp(-i pi/8 (Z0 Z1 + Z0))."""
    if C.n < 1:
        raise ValueError("gadget needs a circuit on at least one qubit")
    gates_ = [Gate("H", (0,))]
    gates_ += [g.shifted(1) for g in C.gates]
    gates_.append(Gate.prot("ZZ", np.pi / 4, (0, 1)))
    gates_.append(Gate.prot("Z", np.pi / 4, (0,)))
    return Circuit(C.n + 1, gates_)


# ---------------------------------------------------------------------------
# serialization


def serialize(c: Circuit) -> str:
    lines = ["{", f'  "n": {c.n},']
    if c.gates:
        lines.append('  "gates": [')
        body = [json.dumps(g.to_json()) for g in c.gates]
        lines.append(",\n".join("    " + b for b in body))
        lines.append("  ],")
    else:
        lines.append('  "gates": [],')
    lines.append(f'  "layers": {json.dumps(list(c.layers))}')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _gate_positions(text: str) -> list[int]:
    """Character offsets of each element of the top-level "gates" array."""
    m = re.search(r'"gates"\s*:\s*\[', text)
    if not m:
        return []
    dec = json.JSONDecoder()
    pos = m.end()
    out = []
    ws = re.compile(r"[\s,]*")
    while True:
        pos = ws.match(text, pos).end()
        if pos >= len(text) or text[pos] == "]":
            return out
        out.append(pos)
        try:
            _, pos = dec.raw_decode(text, pos)
        except json.JSONDecodeError:
            return out


def _gate_from_json(d) -> Gate:
    if not isinstance(d, dict):
        raise ValueError("gate record must be an object")
    if "g" not in d or "q" not in d:
        raise ValueError('gate record needs "g" and "q"')
    kind = d["g"]
    if not isinstance(kind, str) or kind != kind.upper():
        raise ValueError(f"gate name {kind!r} must be an uppercase string")
    q = d["q"]
    if not isinstance(q, list) or not all(isinstance(v, int) and not isinstance(v, bool) for v in q):
        raise ValueError('"q" must be a list of integers')
    umat = None
    if "m" in d:
        umat = tuple(tuple(complex(re_, im) for re_, im in row) for row in d["m"])
    theta = d.get("theta")
    return Gate(kind, tuple(q), axis=d.get("axis"), theta=None if theta is None else float(theta),
                index=d.get("index"), umatrix=umat)


def parse(text: str) -> Circuit:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as e:
        raise CircuitParseError(e.msg, e.lineno, e.colno) from None
    if not isinstance(obj, dict) or "n" not in obj:
        raise CircuitParseError('top level must be an object with "n"', 1, 1)
    n = obj["n"]
    if not isinstance(n, int) or n < 0:
        raise CircuitParseError('"n" must be a nonnegative integer', *_line_col(text, max(text.find('"n"'), 0)))
    positions = _gate_positions(text)
    raw = obj.get("gates", [])
    gs = []
    for i, rec in enumerate(raw):
        try:
            g = _gate_from_json(rec)
            if max(g.qubits) >= n:
                raise ValueError(f"qubit index {max(g.qubits)} out of range for n={n}")
        except (ValueError, TypeError) as e:
            at = positions[i] if i < len(positions) else 0
            raise CircuitParseError(f"gate {i}: {e}", *_line_col(text, at)) from None
        gs.append(g)
    try:
        return Circuit(n, gs, obj.get("layers", []))
    except ValueError as e:
        raise CircuitParseError(str(e), *_line_col(text, max(text.find('"layers"'), 0))) from None
