import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bellsampling import statevector as sv
from bellsampling.circuit import Circuit, Gate, random_all_to_all_clifford
from bellsampling.noise import (
    NoiseSpec,
    PauliChannel,
    attach_noise,
    channel_from_config,
    depolarizing,
    purity_to_fidelity_channel,
    randomized_compile,
)


def channels():
    return st.lists(st.floats(0, 1), min_size=4, max_size=4).filter(lambda v: sum(v) > 1e-3).map(
        lambda v: PauliChannel(tuple(np.array(v) / sum(v)))
    )


@pytest.mark.parametrize(
    "eps, want",
    [(0.0, (1, 0, 0, 0)), (1.0, (0.25, 0.25, 0.25, 0.25)), (0.02, (0.985, 0.005, 0.005, 0.005))],
)
def test_depolarizing(eps, want):
    assert depolarizing(eps).p == pytest.approx(want)


def test_depolarizing_range():
    with pytest.raises(ValueError):
        depolarizing(1.5)


@pytest.mark.parametrize("p", [(0.5, 0.5, 0.1, 0.0), (1.2, -0.2, 0, 0), (1.0, 0.0, 0.0)])
def test_invalid_channels(p):
    with pytest.raises(ValueError):
        PauliChannel(p)


def test_purity_to_fidelity_examples():
    assert purity_to_fidelity_channel(PauliChannel.identity()).p == pytest.approx((1, 0, 0, 0))
    eps = 0.03
    assert purity_to_fidelity_channel(depolarizing(eps)).p == pytest.approx(depolarizing(2 * eps - eps**2).p)
    eta = 0.1
    q = purity_to_fidelity_channel(PauliChannel.from_xyz(eta, 0, 0)).p
    assert q == pytest.approx((1 - 2 * eta + 2 * eta**2, 2 * eta * (1 - eta), 0, 0))


@settings(max_examples=100, deadline=None)
@given(channels(), channels())
def test_compose_matches_superoperator(a, b):
    assert np.allclose(a.compose(b).superoperator(), a.superoperator() @ b.superoperator(), atol=1e-12)


def test_channel_from_config():
    assert channel_from_config(None) is None
    assert channel_from_config(0.02).p == depolarizing(0.02).p
    assert channel_from_config({"px": 0.1}).p == pytest.approx((0.9, 0.1, 0, 0))
    with pytest.raises(ValueError):
        channel_from_config({"pq": 0.1})


def test_attach_noise_counts():
    C = random_all_to_all_clifford(6, 12, seed=3)
    spec = attach_noise(C, depolarizing(0.01))
    assert (spec.m, spec.E) == (36, 72)
    spec = attach_noise(Circuit(2, [Gate("H", (0,))]), depolarizing(0.01))
    assert (spec.m, spec.E) == (0, 0)


def test_weighted_pauli_channel():
    eps = 0.005
    ch = PauliChannel.from_xyz(eps, eps / 3, eps / 10)
    assert ch.p == pytest.approx((1 - eps * (1 + 1 / 3 + 0.1), 0.005, 0.005 / 3, 0.0005))


def test_noise_spec_from_config():
    C = random_all_to_all_clifford(4, 2, seed=0)
    spec = NoiseSpec.from_config({"channel": {"depolarizing": 0.01}, "measurement": {"px": 0.02}}, C)
    assert spec.m == 4 and spec.E == 8
    assert spec.readout().p == pytest.approx((0.98, 0.02, 0, 0))
    assert spec.without_measurement().readout() is None
    assert NoiseSpec.noiseless().is_noiseless


def _phase_equal(A, B):
    k = np.unravel_index(np.argmax(np.abs(B)), B.shape)
    return np.allclose(A * (B[k] / A[k]), B, atol=1e-9)


def test_randomized_compile_identity():
    assert randomized_compile(Circuit(3), seed=0) == Circuit(3)


@pytest.mark.parametrize("seed", range(8))
def test_randomized_compile_preserves_unitary(seed):
    C = random_all_to_all_clifford(4, 3, seed=seed).then(Circuit(4, [Gate("CNOT", (0, 1))]))
    R = randomized_compile(C, seed=seed)
    assert len(R.layers) == len(C.layers)
    assert _phase_equal(sv.circuit_unitary(R), sv.circuit_unitary(C))


def test_randomized_compile_warns_on_non_clifford():
    C = Circuit(2, [Gate.unitary(sv.haar_unitary(4, seed=1), (0, 1))])
    with pytest.warns(UserWarning):
        R = randomized_compile(C, seed=0)
    assert R == C


def test_twirl_turns_overrotation_into_dephasing():
    theta = 0.5
    over = Gate.prot("Z", theta, (0,))
    prep = [Gate("H", (0,)), Gate("H", (1,))]
    rho_sum = np.zeros((4, 4), dtype=complex)
    trials = 1500
    rng = np.random.default_rng(0)
    for _ in range(trials):
        R = randomized_compile(Circuit(2, [Gate("CNOT", (0, 1))]), rng)
        k = [i for i, g in enumerate(R.gates) if g.kind == "CNOT"][0]
        gates = prep + list(R.gates[: k + 1]) + [over] + list(R.gates[k + 1 :])
        rho_sum += sv.density(sv.simulate_state(Circuit(2, gates)))
    rho = rho_sum / trials
    ideal = sv.density(sv.simulate_state(Circuit(2, prep + [Gate("CNOT", (0, 1))])))
    pz = np.sin(theta / 2) ** 2
    want = sv.apply_channel_density(ideal, 2, PauliChannel.from_xyz(0, 0, pz), 0)
    assert np.max(np.abs(rho - want)) < 0.03
    # without the twirl the coherent error leaves an imaginary off-diagonal part
    bare = sv.density(sv.simulate_state(Circuit(2, prep + [Gate("CNOT", (0, 1)), over])))
    assert np.max(np.abs(bare - want)) > 0.1
