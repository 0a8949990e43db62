"""Feedforward quantum networks on a fixed qubit register."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from qfnn.core import (
    MAX_QUBITS,
    WiringError,
    apply_local,
    dephase_z,
    num_qubits,
    partial_trace,
    tensor,
    zero_state,
)
from qfnn.unitaries import Family, ParamUnitary


@dataclass(frozen=True, eq=False)
class GatePlacement:
    gate: ParamUnitary
    wires: tuple[int, ...]
    layer: int = 0

    def __post_init__(self):
        object.__setattr__(self, "wires", tuple(int(w) for w in self.wires))
        if len(set(self.wires)) != len(self.wires):
            raise WiringError(f"duplicate wires {self.wires}")
        if len(self.wires) != self.gate.arity:
            raise WiringError(
                f"{self.gate.family.value} acts on {self.gate.arity} qubits, "
                f"placed on {len(self.wires)} wires"
            )


@dataclass(frozen=True)
class DephasePlacement:
    wire: int


Element = Union[GatePlacement, DephasePlacement]


@dataclass(frozen=True, eq=False)
class Network:
    """Register layout plus an ordered list of gates and dephasing channels.

    Wires not listed in ``input_wires`` are dummies initialised to ``|0>``.
    The task input is placed on ``input_wires`` in the listed order.
    """

    num_wires: int
    input_wires: tuple[int, ...]
    output_wires: tuple[int, ...]
    elements: tuple[Element, ...] = ()
    labels: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("input_wires", "output_wires", "elements"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = self.num_wires
        if not 1 <= n <= MAX_QUBITS:
            raise WiringError(f"register size must be in 1..{MAX_QUBITS}, got {n}")

        def check(wires, what):
            if len(set(wires)) != len(wires):
                raise WiringError(f"duplicate {what} wires {wires}")
            for w in wires:
                if not 0 <= w < n:
                    raise WiringError(f"{what} wire {w} out of range for {n} wires")

        check(self.input_wires, "input")
        check(self.output_wires, "output")
        if not self.output_wires:
            raise WiringError("network needs at least one output wire")
        for el in self.elements:
            if isinstance(el, GatePlacement):
                check(el.wires, "gate")
            elif isinstance(el, DephasePlacement):
                check((el.wire,), "dephasing")
            else:
                raise TypeError(f"unknown network element {el!r}")

    @property
    def dummy_wires(self) -> tuple[int, ...]:
        return tuple(w for w in range(self.num_wires) if w not in self.input_wires)

    @property
    def gates(self) -> list[GatePlacement]:
        return [el for el in self.elements if isinstance(el, GatePlacement)]

    def initial_state(self, rho_in: np.ndarray) -> np.ndarray:
        """``rho_in`` on the input wires, ``|0>`` on the dummies."""
        k = len(self.input_wires)
        if num_qubits(rho_in) != k:
            raise ValueError(f"input has {num_qubits(rho_in)} qubits, network expects {k}")
        n = self.num_wires
        full = tensor(rho_in, zero_state(n - k)) if k < n else rho_in.astype(complex)
        order = list(self.input_wires) + list(self.dummy_wires)
        if order == list(range(n)):
            return full
        inv = np.argsort(order)
        t = full.reshape((2,) * (2 * n)).transpose(list(inv) + [n + i for i in inv])
        return t.reshape(full.shape)


def count_params(net: Network) -> int:
    return sum(g.gate.num_params for g in net.gates)


def flatten_params(net: Network) -> np.ndarray:
    """All trainable parameters, gates in element order, each in family order."""
    parts = [g.gate.params for g in net.gates]
    return np.concatenate(parts) if parts else np.zeros(0)


def param_slices(net: Network) -> list[slice]:
    """Slice of the flat vector owned by each element (empty for dephasing)."""
    out, start = [], 0
    for el in net.elements:
        size = el.gate.num_params if isinstance(el, GatePlacement) else 0
        out.append(slice(start, start + size))
        start += size
    return out


def assign_params(net: Network, params) -> Network:
    """Copy of ``net`` with the flat parameter vector written back into its gates."""
    params = np.asarray(params, dtype=float)
    if params.shape != (count_params(net),):
        raise ValueError(f"expected {count_params(net)} parameters, got {params.shape}")
    elements = []
    for el, sl in zip(net.elements, param_slices(net)):
        if isinstance(el, GatePlacement):
            el = GatePlacement(el.gate.with_params(params[sl]), el.wires, el.layer)
        elements.append(el)
    return Network(net.num_wires, net.input_wires, net.output_wires, elements, net.labels)


def _apply_element(rho: np.ndarray, el: Element, matrix: np.ndarray | None) -> np.ndarray:
    if isinstance(el, DephasePlacement):
        return dephase_z(rho, el.wire)
    return apply_local(rho, matrix, el.wires)


def forward_trace(net: Network, rho_in: np.ndarray, matrices=None) -> list[np.ndarray]:
    """Full-register state before any element and after each one."""
    if matrices is None:
        matrices = gate_matrices(net)
    states = [net.initial_state(rho_in)]
    for el, mat in zip(net.elements, matrices):
        states.append(_apply_element(states[-1], el, mat))
    return states


def gate_matrices(net: Network) -> list[np.ndarray | None]:
    return [el.gate.matrix() if isinstance(el, GatePlacement) else None for el in net.elements]


def forward(net: Network, rho_in: np.ndarray) -> np.ndarray:
    """Propagate ``rho_in`` through the network; returns the full register state."""
    return forward_trace(net, rho_in)[-1]


def output_state(net: Network, rho_in: np.ndarray) -> np.ndarray:
    """Joint reduced state of the output wires."""
    return partial_trace(forward(net, rho_in), net.output_wires)


# --- serialisation -------------------------------------------------------------


def network_to_dict(net: Network) -> dict:
    elements = []
    for el in net.elements:
        if isinstance(el, DephasePlacement):
            elements.append({"kind": "dephase", "wire": el.wire})
            continue
        g = el.gate
        rec = {
            "kind": "gate",
            "family": g.family.value,
            "arity": g.arity,
            "wires": list(el.wires),
            "layer": el.layer,
            "params": [float(x) for x in g.params],
        }
        if g.family is Family.CLASSICAL_PERMUTATION:
            rec["weights"] = list(g.weights)
            rec["threshold"] = g.threshold
        elements.append(rec)
    return {
        "num_wires": net.num_wires,
        "input_wires": list(net.input_wires),
        "output_wires": list(net.output_wires),
        "labels": {str(k): v for k, v in net.labels.items()},
        "elements": elements,
    }


def network_from_dict(data: dict) -> Network:
    elements: list[Element] = []
    for rec in data["elements"]:
        if rec["kind"] == "dephase":
            elements.append(DephasePlacement(int(rec["wire"])))
        elif rec["kind"] == "gate":
            gate = ParamUnitary(
                Family(rec["family"]),
                int(rec["arity"]),
                rec["params"],
                tuple(rec.get("weights", ())),
                float(rec.get("threshold", 0.5)),
            )
            elements.append(GatePlacement(gate, tuple(rec["wires"]), int(rec.get("layer", 0))))
        else:
            raise ValueError(f"unknown element kind {rec['kind']!r}")
    return Network(
        int(data["num_wires"]),
        tuple(data["input_wires"]),
        tuple(data["output_wires"]),
        elements,
        dict(data.get("labels", {})),
    )


def dumps(net: Network) -> str:
    return json.dumps(network_to_dict(net), indent=2) + "\n"


def loads(text: str) -> Network:
    return network_from_dict(json.loads(text))


class CachedEvaluator:
    """Evaluates a cost under single-parameter shifts, reusing unchanged work.

    Shifting a parameter of element ``k`` leaves the gate matrices of every
    other element and the states before ``k`` untouched, so only the suffix
    from ``k`` is recomputed.

    ``cost_fn(states)`` receives the list returned by :func:`forward_trace`.
    """

    def __init__(self, net: Network, params: np.ndarray, rho_in: np.ndarray, cost_fn):
        self.net = assign_params(net, params)
        self.params = np.array(params, dtype=float)
        self.cost_fn = cost_fn
        self.matrices = gate_matrices(self.net)
        self.states = forward_trace(self.net, rho_in, self.matrices)
        self.slices = param_slices(self.net)
        self.owner = np.empty(self.params.size, dtype=int)
        for k, sl in enumerate(self.slices):
            self.owner[sl] = k

    def base_cost(self) -> float:
        return self.cost_fn(self.states)

    def shifted_cost(self, index: int, delta: float) -> float:
        k = self.owner[index]
        el = self.net.elements[k]
        sl = self.slices[k]
        local = self.params[sl].copy()
        local[index - sl.start] += delta
        mat = el.gate.with_params(local).matrix()
        states = self.states[: k + 1]
        states.append(_apply_element(states[-1], el, mat))
        for j in range(k + 1, len(self.net.elements)):
            states.append(_apply_element(states[-1], self.net.elements[j], self.matrices[j]))
        return self.cost_fn(states)

