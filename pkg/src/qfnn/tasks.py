"""The experiments: autoencoder, teleportation, cost landscape, classical check."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.optimize

from qfnn.core import (
    axis_states,
    basis_state,
    num_qubits,
    partial_trace,
    pauli_expectation,
    pure,
    sample_haar_state,
    tensor,
)
from qfnn.network import (
    DephasePlacement,
    GatePlacement,
    Network,
    assign_params,
    count_params,
    forward_trace,
    output_state,
)
from qfnn.training import (
    CostSpec,
    CostTerm,
    all_pauli_terms,
    cost_from_states,
    descent_step,
    gradient_fd,
    local_pauli_terms,
)
from qfnn.unitaries import ParamUnitary, general_params_for, heaviside_neuron

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)


@dataclass
class TrainingTask:
    """A network template, an input sampler and a per-sample cost builder.

    ``inputs`` is the finite pool the sampler draws from uniformly, or
    ``None`` for tasks that sample Haar-random states.  ``targets``, when
    given, pairs each pooled input with its desired output state; otherwise
    the desired output is the input itself.
    """

    name: str
    network: Network
    inputs: list[np.ndarray] | None
    cost_template: tuple[CostSpec, ...]
    wire_labels: dict = field(default_factory=dict)
    targets: list[np.ndarray] | None = None

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        if self.inputs is None:
            return sample_haar_state(len(self.network.input_wires), rng)
        return self.inputs[int(rng.integers(len(self.inputs)))]

    def target(self, rho_in: np.ndarray) -> np.ndarray:
        if self.targets is None:
            return rho_in
        for rho, target in zip(self.inputs, self.targets):
            if rho is rho_in or np.array_equal(rho, rho_in):
                return target
        raise ValueError("input is not part of the task's input pool")

    def cost_specs(self, rho_in: np.ndarray) -> list[CostSpec]:
        target = self.target(rho_in)
        return [spec.resolve(target) for spec in self.cost_template]

    def cost(self, net: Network, rho_in: np.ndarray) -> float:
        return cost_from_states(forward_trace(net, rho_in), self.cost_specs(rho_in), net.output_wires)

    def mean_cost(self, net: Network, states: Sequence[np.ndarray] | None = None) -> float:
        states = self.inputs if states is None else states
        return float(np.mean([self.cost(net, s) for s in states]))


# --- autoencoder -----------------------------------------------------------------

AUTOENCODER_LABELS = {
    "q0": "input qubit 1 of |in_12>",
    "q1": "input qubit 2 of |in_12>",
    "q2": "bottleneck: output of U1",
    "q3": "fan-out dummy",
    "q4": "output 6 (U2 output)",
    "q5": "output 8 (U3 output)",
}


def bell_states() -> dict[str, np.ndarray]:
    s = 1 / np.sqrt(2)
    return {
        "phi+": pure(np.array([s, 0, 0, s])),
        "phi-": pure(np.array([s, 0, 0, -s])),
        "psi+": pure(np.array([0, s, s, 0])),
        "psi-": pure(np.array([0, s, -s, 0])),
    }


def named_state(name: str) -> np.ndarray:
    """Two-qubit state from a short name: a Bell label or a ket like ``00`` or ``00+01``."""
    bells = bell_states()
    if name in bells:
        return bells[name]
    psi = np.zeros(4, dtype=complex)
    for ket in name.split("+"):
        if len(ket) != 2 or set(ket) - {"0", "1"}:
            raise ValueError(f"cannot parse two-qubit state {name!r}")
        psi[int(ket, 2)] += 1
    return pure(psi)


def build_autoencoder_task(
    input_set: Sequence[np.ndarray],
    diagonality_penalty: bool = False,
    outer: str = "general",
) -> TrainingTask:
    """Two-qubit to one-qubit quantum autoencoder.

    ``outer`` selects the decoding neurons on (q2, q4) and (q3, q5):
    ``"general"`` for full two-qubit unitaries, ``"neuron"`` for the
    restricted controlled form.
    """
    inputs = [np.asarray(s, dtype=complex) for s in input_set]
    if not inputs:
        raise ValueError("input set is empty")
    for s in inputs:
        if num_qubits(s) != 2:
            raise ValueError("autoencoder inputs must be two-qubit states")
    if outer == "general":
        make_outer = lambda: ParamUnitary.general(2)  # noqa: E731
    elif outer == "neuron":
        make_outer = lambda: ParamUnitary.neuron(1)  # noqa: E731
    else:
        raise ValueError(f"outer must be 'general' or 'neuron', got {outer!r}")
    elements = [
        GatePlacement(ParamUnitary.neuron(2), (0, 1, 2), layer=1),
        GatePlacement(ParamUnitary.fan_out(), (2, 3), layer=1),
        GatePlacement(make_outer(), (2, 4), layer=2),
        GatePlacement(make_outer(), (3, 5), layer=2),
    ]
    net = Network(6, (0, 1), (4, 5), elements, AUTOENCODER_LABELS)
    specs = [CostSpec(all_pauli_terms(2))]
    if diagonality_penalty:
        terms = (CostTerm((1,), 0.0), CostTerm((2,), 0.0))
        specs.append(CostSpec(terms, wires=(2,), stage=1))
    return TrainingTask("autoencoder", net, inputs, tuple(specs), AUTOENCODER_LABELS)


def bottleneck_expectations(net: Network, states: dict) -> dict:
    """Pauli expectations of the bottleneck wire right after the encoder, per named input."""
    out = {}
    for name, rho in states.items():
        after_encoder = partial_trace(forward_trace(net, rho)[1], [2])
        out[name] = {f"sigma{j}": pauli_expectation(after_encoder, [j]) for j in (1, 2, 3)}
    return out


def best_achievable_cost(task: TrainingTask, restarts: int = 20, seed: int = 0) -> float:
    """Lowest mean cost over the input pool found by multi-start L-BFGS."""
    net = task.network
    rng = np.random.default_rng(seed)

    def f(x):
        return task.mean_cost(assign_params(net, x))

    best = np.inf
    for _ in range(restarts):
        x0 = rng.uniform(-1, 1, count_params(net))
        res = scipy.optimize.minimize(f, x0, method="L-BFGS-B", options={"maxiter": 2000})
        best = min(best, float(res.fun))
    return best


# --- teleportation -----------------------------------------------------------------

TELEPORT_LABELS = {
    "q0": "Alice's input |psi> (output 1)",
    "q1": "Alice's half of the shared resource",
    "q2": "Bob's qubit (output 6)",
}


def build_teleport_task() -> TrainingTask:
    """Three-wire network with two dephased (classical) links from Alice to Bob."""
    elements = [
        GatePlacement(ParamUnitary.general(2), (1, 2), layer=1),
        GatePlacement(ParamUnitary.general(2), (0, 1), layer=2),
        DephasePlacement(0),
        DephasePlacement(1),
        GatePlacement(ParamUnitary.neuron(2), (0, 1, 2), layer=3),
    ]
    net = Network(3, (0,), (2,), elements, TELEPORT_LABELS)
    spec = CostSpec(tuple(CostTerm((j,)) for j in range(4)))
    return TrainingTask("teleport", net, axis_states(), (spec,), TELEPORT_LABELS)


def teleport_oracle_params() -> np.ndarray:
    """Parameters reproducing the textbook protocol on the teleport network.

    U1 prepares a Bell pair, U2 rotates Alice's pair into the Bell basis and
    U3 applies ``Z^a X^b`` controlled on the two dephased bits.
    """
    u1 = CNOT @ np.kron(H, np.eye(2))
    u2 = np.kron(H, np.eye(2)) @ CNOT
    half = np.pi / 2
    t_blocks = [
        (0.0, 0.0, 0.0, 0.0),  # 1
        (-half, half, 0.0, 0.0),  # X
        (-half, 0.0, 0.0, half),  # Z
        (0.0, 0.0, half, 0.0),  # ZX = iY
    ]
    u3 = np.concatenate([np.zeros(16), np.ravel(t_blocks)])
    return np.concatenate([general_params_for(u1), general_params_for(u2), u3])


def haar_costs(task: TrainingTask, net: Network, count: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return np.array([task.cost(net, sample_haar_state(1, rng)) for _ in range(count)])


# --- cost landscape --------------------------------------------------------------

def _landscape_network(theta: float = 0.0, phi: float = 0.0) -> Network:
    gate = GatePlacement(ParamUnitary.two_param(theta, phi), (0, 1))
    return Network(2, (0,), (0, 1), [gate], {"q0": "input", "q1": "dummy then output"})


def build_landscape_task() -> TrainingTask:
    """One-input neuron: ``|+>|0> -> |+>|0>`` and ``|->|0> -> |->|1>``."""
    s = 1 / np.sqrt(2)
    plus, minus = pure(np.array([s, s])), pure(np.array([s, -s]))
    zero, one = basis_state([0]), basis_state([1])
    spec = CostSpec(local_pauli_terms(2))
    return TrainingTask(
        "landscape",
        _landscape_network(),
        [plus, minus],
        (spec,),
        targets=[tensor(plus, zero), tensor(minus, one)],
    )


def landscape_cost(theta: float, phi: float, task: TrainingTask | None = None) -> float:
    """Summed cost of both task inputs through the two-parameter unitary."""
    task = build_landscape_task() if task is None else task
    net = assign_params(task.network, [theta, phi])
    return sum(task.cost(net, rho) for rho in task.inputs)


def landscape_scan(n_theta: int, n_phi: int) -> np.ndarray:
    """Rows ``(theta, phi, cost)`` over ``[0, pi] x [0, 2 pi]``, theta-major."""
    if n_theta < 2 or n_phi < 2:
        raise ValueError("grid needs at least two points per axis")
    task = build_landscape_task()
    rows = []
    for theta in np.linspace(0, np.pi, n_theta):
        for phi in np.linspace(0, 2 * np.pi, n_phi):
            rows.append((theta, phi, landscape_cost(theta, phi, task)))
    return np.array(rows)


def landscape_descent(
    start=(2.5, 2.5),
    eta: float = 0.1,
    momentum: float = 0.5,
    epsilon: float = 1e-6,
    max_steps: int = 2000,
    tol: float = 1e-8,
) -> np.ndarray:
    """Gradient-descent path ``(step, theta, phi, cost)`` on the landscape."""
    task = build_landscape_task()

    def cost(x):
        return landscape_cost(x[0], x[1], task)

    x = np.array(start, dtype=float)
    v = np.zeros(2)
    path = []
    for step in range(max_steps + 1):
        c = cost(x)
        path.append((step, x[0], x[1], c))
        if c < tol or step == max_steps:
            break
        g = gradient_fd(cost, x, epsilon)
        x, v = descent_step(x, g, eta, momentum, v)
    return np.array(path)


# --- classical special case ------------------------------------------------------


@dataclass
class EquivalenceReport:
    rows_checked: int = 0
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def classical_neuron_network(weights, threshold: float = 0.5) -> Network:
    n = len(weights)
    gate = GatePlacement(ParamUnitary.classical(weights, threshold), tuple(range(n + 1)))
    return Network(n + 1, tuple(range(n)), (n,), [gate])


def classical_equivalence_check(weight_sets) -> EquivalenceReport:
    """Compare the Heaviside neuron with its permutation-gate network on all inputs.

    ``weight_sets`` holds ``(weights, threshold)`` pairs.
    """
    report = EquivalenceReport()
    for weights, threshold in weight_sets:
        net = classical_neuron_network(weights, threshold)
        for bits in itertools.product((0, 1), repeat=len(weights)):
            expected = heaviside_neuron(weights, bits, threshold)
            out = output_state(net, basis_state(bits))
            p_one = out[1, 1].real
            coherent = abs(out[0, 1]) != 0
            report.rows_checked += 1
            if p_one != expected or out[0, 0].real != 1 - expected or coherent:
                report.mismatches.append(
                    f"weights={tuple(weights)} threshold={threshold} input={bits}: "
                    f"classical {expected}, quantum P(1)={p_one}"
                )
    return report

