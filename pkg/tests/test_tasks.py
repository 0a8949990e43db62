import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qfnn.core import axis_states, basis_state, partial_trace, pauli_expectation, pure, sample_haar_state, tensor
from qfnn.network import DephasePlacement, Network, assign_params, count_params, forward_trace, output_state
from qfnn.tasks import (
    CNOT,
    H,
    bell_states,
    bottleneck_expectations,
    build_autoencoder_task,
    build_landscape_task,
    build_teleport_task,
    classical_equivalence_check,
    haar_costs,
    landscape_cost,
    landscape_descent,
    landscape_scan,
    named_state,
    teleport_oracle_params,
)
from qfnn.training import TrainConfig, train
from qfnn.unitaries import build_general

from conftest import equal_up_to_phase

seeds = st.integers(0, 2**32 - 1)
PAULIS = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]


def oracle_net():
    return assign_params(build_teleport_task().network, teleport_oracle_params())


# --- teleportation ----------------------------------------------------------------


def test_oracle_gates_match_targets():
    x = teleport_oracle_params()
    assert equal_up_to_phase(build_general(x[:16], 2), CNOT @ np.kron(H, np.eye(2)), tol=1e-9)
    assert equal_up_to_phase(build_general(x[16:32], 2), np.kron(H, np.eye(2)) @ CNOT, tol=1e-9)


def test_oracle_axis_states_zero_cost():
    task = build_teleport_task()
    net = oracle_net()
    for rho in axis_states():
        assert task.cost(net, rho) <= 1e-10


def test_oracle_haar_states():
    task = build_teleport_task()
    costs = haar_costs(task, oracle_net(), 1000, seed=4)
    assert costs.max() <= 1e-9


def test_oracle_without_dephasing():
    task = build_teleport_task()
    net = oracle_net()
    plain = Network(net.num_wires, net.input_wires, net.output_wires,
                    [e for e in net.elements if not isinstance(e, DephasePlacement)])
    r = np.random.default_rng(8)
    for _ in range(50):
        rho = sample_haar_state(1, r)
        assert task.cost(plain, rho) <= 1e-9
        assert np.max(np.abs(output_state(plain, rho) - output_state(net, rho))) <= 1e-10


def test_untrained_identity_network_on_one():
    task = build_teleport_task()
    net = assign_params(task.network, np.zeros(count_params(task.network)))
    assert task.cost(net, basis_state([1])) == pytest.approx(4, abs=1e-12)


def test_teleport_cost_oracle_by_hand(rng):
    task = build_teleport_task()
    net = assign_params(task.network, rng.uniform(-1, 1, 64))
    rho = sample_haar_state(1, rng)
    bob = output_state(net, rho)
    expected = sum(np.trace((bob - rho) @ p).real ** 2 for p in PAULIS)
    assert task.cost(net, rho) == pytest.approx(expected, abs=1e-12)


def test_oracle_leaves_alice_dephased():
    net = oracle_net()
    psi = pure(np.array([1, 1j]))
    alice = partial_trace(forward_trace(net, psi)[-1], [0])
    assert np.max(np.abs(alice - psi)) > 0.4
    assert abs(alice[0, 1]) < 1e-12


def test_trained_teleport_messes_up_alice():
    task = build_teleport_task()
    result = train(task.network, task, TrainConfig(eta=0.03, seed=2, max_iterations=400))
    psi = pure(np.array([1, 1]))
    final = forward_trace(result.network, psi)[-1]
    alice = partial_trace(final, [0])
    assert np.max(np.abs(alice - psi)) > 0.4
    assert np.max(np.abs(partial_trace(final, [2]) - psi)) < 0.05


def test_teleport_labels_cover_wires():
    net = build_teleport_task().network
    assert set(net.labels) == {"q0", "q1", "q2"}
    assert net.output_wires == (2,)


# --- autoencoder ------------------------------------------------------------------


def test_named_states():
    assert np.allclose(named_state("01"), basis_state([0, 1]))
    assert np.allclose(named_state("00+01"), tensor(basis_state([0]), pure(np.array([1, 1]))))
    assert np.array_equal(named_state("phi-"), bell_states()["phi-"])
    with pytest.raises(ValueError):
        named_state("012")


def test_bell_states_orthonormal():
    vals = list(bell_states().values())
    for a, b in itertools.product(range(4), repeat=2):
        assert abs(np.trace(vals[a] @ vals[b]) - (a == b)) < 1e-12


def test_autoencoder_rejects_bad_inputs():
    with pytest.raises(ValueError):
        build_autoencoder_task([])
    with pytest.raises(ValueError):
        build_autoencoder_task([basis_state([0])])
    with pytest.raises(ValueError):
        build_autoencoder_task([basis_state([0, 0])], outer="other")


def test_autoencoder_wiring():
    task = build_autoencoder_task([basis_state([0, 0])], diagonality_penalty=True, outer="neuron")
    net = task.network
    assert [e.wires for e in net.elements] == [(0, 1, 2), (2, 3), (2, 4), (3, 5)]
    assert net.output_wires == (4, 5)
    assert len(task.cost_template) == 2
    assert task.cost_template[1].wires == (2,) and task.cost_template[1].stage == 1


def test_autoencoder_cost_oracle(rng):
    task = build_autoencoder_task(list(bell_states().values()))
    net = assign_params(task.network, rng.uniform(-1, 1, count_params(task.network)))
    rho = bell_states()["psi+"]
    out = output_state(net, rho)
    expected = sum(
        np.trace((out - rho) @ np.kron(PAULIS[j], PAULIS[k])).real ** 2
        for j, k in itertools.product(range(4), repeat=2)
    )
    assert task.cost(net, rho) == pytest.approx(expected, abs=1e-12)


def test_penalty_terms_measure_bottleneck(rng):
    plain = build_autoencoder_task([bell_states()["phi+"]])
    pen = build_autoencoder_task([bell_states()["phi+"]], diagonality_penalty=True)
    net = assign_params(pen.network, rng.uniform(-1, 1, count_params(pen.network)))
    rho = bell_states()["phi+"]
    b = bottleneck_expectations(net, {"phi+": rho})["phi+"]
    extra = b["sigma1"] ** 2 + b["sigma2"] ** 2
    assert pen.cost(net, rho) == pytest.approx(plain.cost(net, rho) + extra, abs=1e-12)


@pytest.mark.parametrize("name", ["00", "phi+"])
def test_single_input_compresses(name):
    task = build_autoencoder_task([named_state(name)])
    cfg = TrainConfig(eta=0.05, epsilon=1e-6, seed=0, cost_threshold=1e-6, max_iterations=3000)
    result = train(task.network, task, cfg)
    assert result.converged
    assert task.mean_cost(result.network) < 1e-6


def test_sampler_is_uniform_over_pool():
    task = build_autoencoder_task([named_state("00"), named_state("01")])
    r = np.random.default_rng(0)
    picks = [task.sample(r) is task.inputs[0] for _ in range(2000)]
    assert abs(np.mean(picks) - 0.5) < 0.05


# --- landscape --------------------------------------------------------------------


def test_landscape_analytic_minimum():
    assert landscape_cost(np.pi / 2, 0) <= 1e-12


def test_landscape_cnot_point_by_hand():
    # CNOT sends |+0> to phi+ and |-0> to phi-; every local expectation vanishes
    plus_target = {(1, 0): 1, (2, 0): 0, (3, 0): 0, (0, 1): 0, (0, 2): 0, (0, 3): 1}
    minus_target = {(1, 0): -1, (2, 0): 0, (3, 0): 0, (0, 1): 0, (0, 2): 0, (0, 3): -1}
    expected = sum(v**2 for v in plus_target.values()) + sum(v**2 for v in minus_target.values())
    assert landscape_cost(0, 0) == pytest.approx(expected, abs=1e-12)


def test_landscape_targets():
    task = build_landscape_task()
    for rho, target in zip(task.inputs, task.targets):
        assert task.target(rho) is target
    with pytest.raises(ValueError):
        task.target(basis_state([0]))


def test_landscape_scan_shape_and_periodicity():
    grid = landscape_scan(7, 9)
    assert grid.shape == (63, 3)
    rows = grid.reshape(7, 9, 3)
    assert np.all(rows[:, 0, 1] == 0) and np.allclose(rows[:, -1, 1], 2 * np.pi)
    assert np.max(np.abs(rows[:, 0, 2] - rows[:, -1, 2])) <= 1e-12
    assert np.all(grid[:, 2] >= 0)
    with pytest.raises(ValueError):
        landscape_scan(1, 5)


@settings(max_examples=20)
@given(st.floats(0, np.pi), st.floats(0, 2 * np.pi))
def test_landscape_bounded(theta, phi):
    # six local terms per input, each gap at most 2
    assert 0 <= landscape_cost(theta, phi) <= 2 * 6 * 4


def test_landscape_descent_reaches_zero():
    path = landscape_descent((2.5, 2.5))
    assert path[0, 0] == 0 and tuple(path[0, 1:3]) == (2.5, 2.5)
    assert path[-1, 3] < 1e-4
    assert np.all(np.diff(path[:, 0]) == 1)


# --- classical special case ----------------------------------------------------------


def test_classical_or_and():
    report = classical_equivalence_check([((1, 1), 0.5), ((1, 1), 1.5)])
    assert report.ok and report.rows_checked == 8


def test_classical_random_weights():
    r = np.random.default_rng(21)
    sets = [(tuple(r.uniform(-2, 2, 2)), 0.5) for _ in range(100)]
    report = classical_equivalence_check(sets)
    assert report.ok and report.rows_checked == 400


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=3), st.floats(-2, 2))
def test_classical_check_any_weights(weights, threshold):
    assert classical_equivalence_check([(weights, threshold)]).ok


def test_haar_costs_deterministic():
    task = build_teleport_task()
    net = oracle_net()
    assert np.array_equal(haar_costs(task, net, 20, 3), haar_costs(task, net, 20, 3))


def test_bottleneck_expectations_bounds(rng):
    task = build_autoencoder_task([named_state("00")])
    net = assign_params(task.network, rng.uniform(-1, 1, count_params(task.network)))
    vals = bottleneck_expectations(net, {"00": named_state("00")})["00"]
    assert sum(v**2 for v in vals.values()) <= 1 + 1e-12
    bottleneck = partial_trace(forward_trace(net, named_state("00"))[1], [2])
    assert vals["sigma3"] == pytest.approx(pauli_expectation(bottleneck, [3]))
