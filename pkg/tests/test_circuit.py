import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellsampling import gates as G
from bellsampling import statevector as sv
from bellsampling.circuit import (
    Architecture,
    Circuit,
    CircuitParseError,
    Gate,
    bqp_gadget,
    brickwork_clifford,
    clifford_plus_t_random,
    crystalline_floquet,
    parse,
    random_all_to_all_clifford,
    scrambling_brickwork,
    serialize,
)
from bellsampling.symplectic import PauliVec


def _phase_equal(A, B, atol=1e-9):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    return np.allclose(A * (B[k] / A[k]), B, atol=atol) and np.isclose(abs(B[k] / A[k]), 1)


def test_group_sizes():
    assert G.single_qubit_cliffords().shape == (24, 2, 2)
    assert G.two_qubit_cliffords().shape == (11520, 4, 4)


def test_two_qubit_cliffords_distinct_up_to_phase():
    mats = G.two_qubit_cliffords()
    keys = set()
    for U in mats[::7]:
        k = np.argmax(np.abs(U.ravel()) > 1e-9)
        V = U * (abs(U.ravel()[k]) / U.ravel()[k])
        keys.add(np.round(V, 6).tobytes())
    assert len(keys) == len(mats[::7])


@pytest.mark.parametrize("kind", ["H", "S", "SDG", "X", "Y", "Z", "SQRTX", "CNOT", "CZ", "ISWAP"])
def test_fixed_gates_are_clifford(kind):
    G.conjugation_table(G.FIXED[kind])
    assert Gate(kind, (0,) if G.ARITY[kind] == 1 else (0, 1)).is_clifford()


def test_t_is_not_clifford():
    with pytest.raises(G.NotCliffordError):
        G.conjugation_table(G.FIXED["T"])
    assert not Gate("T", (0,)).is_clifford()


def test_hadamard_table():
    labels, signs = G.conjugation_table(G.FIXED["H"])
    # (z|x) layout: 1 = X, 2 = Z, 3 = Y; H swaps X and Z and negates Y
    assert list(labels) == [0, 2, 1, 3] and list(signs) == [0, 0, 0, 1]


def test_pauli_rotation_convention():
    assert np.allclose(G.pauli_rotation("Z", np.pi / 4), np.diag(np.exp([-1j * np.pi / 8, 1j * np.pi / 8])))


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="FOO", qubits=(0,)),
        dict(kind="H", qubits=(0, 1)),
        dict(kind="CNOT", qubits=(1, 1)),
        dict(kind="C2", qubits=(0, 1), index=11520),
        dict(kind="C1", qubits=(0,)),
        dict(kind="PROT", qubits=(0,), axis="ZZ", theta=0.1),
        dict(kind="U1", qubits=(0,), umatrix=((1, 1), (1, 1))),
    ],
)
def test_invalid_gates(kwargs):
    with pytest.raises(ValueError):
        Gate(**kwargs)


def test_gate_beyond_register():
    with pytest.raises(ValueError):
        Circuit(2, [Gate("H", (2,))])


def test_all_to_all_shapes():
    C = random_all_to_all_clifford(2, 1, seed=7)
    assert len(C) == 1 and C.gates[0].qubits in ((0, 1), (1, 0))
    C = random_all_to_all_clifford(6, 12, seed=3)
    assert len(C) == 36 and C.two_qubit_count == 36 and len(C.layers) == 12
    for layer in C.layer_slices():
        qs = [q for g in layer for q in g.qubits]
        assert sorted(qs) == list(range(6))  # perfect matching per layer
    with pytest.raises(ValueError):
        random_all_to_all_clifford(1, 3, seed=0)


@pytest.mark.parametrize(
    "make",
    [
        lambda s: random_all_to_all_clifford(6, 4, seed=s),
        lambda s: brickwork_clifford(8, 3, seed=s),
        lambda s: scrambling_brickwork(8, 2, seed=s),
        lambda s: clifford_plus_t_random(4, 2, 2, seed=s),
    ],
)
def test_generators_deterministic_and_roundtrip(make):
    a, b = make(42), make(42)
    assert a == b
    assert parse(serialize(a)) == a
    assert make(43) != a


def test_crystalline_examples():
    C = crystalline_floquet(4, 1, False)
    assert [(g.kind, g.qubits) for g in C.gates] == [("ISWAP", (0, 1)), ("ISWAP", (2, 3))]
    S = crystalline_floquet(18, 2, True)
    assert S.count("ISWAP") == 18 and S.count("SQRTX") == 36
    assert crystalline_floquet(18, 2, False).count("SQRTX") == 0
    with pytest.raises(ValueError):
        crystalline_floquet(5, 1, False)


def test_clifford_plus_t_counts():
    assert clifford_plus_t_random(6, 3, seed=1).count("T") == 3
    C0 = clifford_plus_t_random(4, 0, seed=1)
    assert C0.is_clifford() and C0.count("T") == 0


def test_clifford_plus_t_single_qubit_magic_state():
    from bellsampling.circuit import interleave_t

    C = interleave_t([Circuit(1, [Gate("H", (0,))]), Circuit(1)], [0])
    psi = sv.simulate_state(C)
    assert np.allclose(psi, np.array([1, np.exp(1j * np.pi / 4)]) / np.sqrt(2))


@pytest.mark.parametrize(
    "gates, p1",
    [([Gate("X", (0,))], 1.0), ([], 0.0), ([Gate("H", (0,))], 0.5)],
)
def test_gadget_x0_expectation(gates, p1):
    g = bqp_gadget(Circuit(1, gates))
    assert g.n == 2
    last = g.gates[-1]
    assert last.kind == "PROT" and set(last.axis) <= {"I", "Z"}
    psi = sv.simulate_state(g)
    assert abs(sv.pauli_expectation(psi, PauliVec.parse("XI"))) == pytest.approx(p1, abs=1e-12)


def test_serialize_examples():
    empty = serialize(Circuit(3))
    assert json.loads(empty) == {"n": 3, "gates": [], "layers": []}
    one = json.loads(serialize(Circuit(1, [Gate("H", (0,))])))
    assert one["gates"] == [{"g": "H", "q": [0]}]


def test_roundtrip_with_parameters():
    U = sv.haar_unitary(4, seed=5)
    C = Circuit(3, [Gate.unitary(U, (2, 0)), Gate.prot("XYZ", 0.3, (0, 1, 2)), Gate("C1", (1,), index=17)])
    C2 = parse(serialize(C))
    assert np.allclose(sv.circuit_unitary(C2), sv.circuit_unitary(C))


@pytest.mark.parametrize(
    "text, line",
    [
        ('{"n": 2,\n "gates": [\n  {"g": "H", "q": [0]},\n  {"g": "H" "q": [1]}\n]}', 4),
        ('{"n": 2,\n "gates": [\n  {"g": "H", "q": [0]},\n  {"g": "BOGUS", "q": [1]}\n]}', 4),
        ('{"n": 2,\n "gates": [\n  {"g": "CNOT", "q": [0, 5]}\n]}', 3),
        ('{"gates": []}', 1),
    ],
)
def test_parse_errors_carry_position(text, line):
    with pytest.raises(CircuitParseError) as ei:
        parse(text)
    assert ei.value.line == line and ei.value.col >= 1


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 5), st.integers(1, 4), st.integers(0, 2**32 - 1))
def test_inverse_undoes_circuit(n, layers, seed):
    C = random_all_to_all_clifford(n, layers, seed=seed).then(Circuit(n, [Gate("T", (0,)), Gate.prot("ZX", 0.7, (0, 1))]))
    U = sv.circuit_unitary(C.then(C.inverse()))
    assert _phase_equal(U, np.eye(2**n))


@pytest.mark.parametrize(
    "arch, A, want",
    [
        (Architecture.chain(8, closed=True), [0, 1, 2, 3], 2),
        (Architecture.chain(8, closed=False), [0, 1, 2, 3], 1),
        (Architecture.chain(8, closed=True), [6, 7, 0], 2),
        (Architecture.all_to_all(6), [0, 1], 8),
    ],
)
def test_boundary_count(arch, A, want):
    assert arch.boundary_count(A) == want


def test_contiguity():
    arch = Architecture.chain(8, closed=True)
    assert arch.is_contiguous([7, 0, 1])
    assert not arch.is_contiguous([0, 2])
