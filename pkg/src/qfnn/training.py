"""Pauli-expectation costs and finite-difference gradient descent."""

from __future__ import annotations

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from qfnn.core import partial_trace, pauli_expectation, pauli_string
from qfnn.network import CachedEvaluator, Network, assign_params, count_params, forward_trace

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e6


class TrainingDiverged(RuntimeError):
    """Cost became non-finite or exceeded the divergence limit."""

    def __init__(self, message: str, trace: list[float], network: Network | None = None):
        super().__init__(message)
        self.trace = trace
        self.network = network


@dataclass(frozen=True)
class CostTerm:
    """One ``f * (<P>_actual - <P>_desired)**2`` summand.

    ``desired=None`` means the target is read off a reference state when the
    cost is evaluated.
    """

    pauli: tuple[int, ...]
    desired: float | None = None
    weight: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "pauli", tuple(int(i) for i in self.pauli))
        if self.weight < 0:
            raise ValueError("cost weights must be non-negative")
        if self.desired is not None and not -1 - 1e-9 <= self.desired <= 1 + 1e-9:
            raise ValueError(f"desired expectation {self.desired} outside [-1, 1]")


def _clip(x: float) -> float:
    return min(1.0, max(-1.0, x))


@dataclass(frozen=True)
class CostSpec:
    """A weighted sum of Pauli-expectation gaps on a group of wires.

    ``wires=None`` reads the network's output wires; ``stage=k`` reads the
    register after the first ``k`` network elements instead of the final state.
    """

    terms: tuple[CostTerm, ...]
    wires: tuple[int, ...] | None = None
    stage: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ValueError("a cost needs at least one term")
        if self.wires is not None:
            object.__setattr__(self, "wires", tuple(self.wires))

    def resolve(self, reference: np.ndarray) -> "CostSpec":
        """Fill every ``desired=None`` term from ``reference``."""
        terms = tuple(
            t if t.desired is not None else replace(t, desired=_clip(pauli_expectation(reference, t.pauli)))
            for t in self.terms
        )
        return replace(self, terms=terms)

    @cached_property
    def _arrays(self):
        paulis_t = np.stack([pauli_string(t.pauli).T for t in self.terms])
        weights = np.array([t.weight for t in self.terms])
        if any(t.desired is None for t in self.terms):
            desired = None
        else:
            desired = np.array([t.desired for t in self.terms])
        return paulis_t, weights, desired


def all_pauli_terms(n: int, weight: float = 1.0) -> tuple[CostTerm, ...]:
    """Every ``4**n`` Pauli string, identity included, matched to a reference."""
    return tuple(CostTerm(p, None, weight) for p in itertools.product(range(4), repeat=n))


def local_pauli_terms(n: int, paulis: Sequence[int] = (1, 2, 3)) -> tuple[CostTerm, ...]:
    """Single-qubit Pauli observables on each of ``n`` qubits."""
    out = []
    for q in range(n):
        for i in paulis:
            p = [0] * n
            p[q] = i
            out.append(CostTerm(tuple(p)))
    return tuple(out)


def eval_cost(spec: CostSpec, actual: np.ndarray, reference: np.ndarray | None = None) -> float:
    """``sum_t f_t (Tr(actual P_t) - desired_t)**2``.

    Terms without a literal ``desired`` value take it from ``reference``.
    """
    paulis_t, weights, desired = spec._arrays
    # Tr(rho P) = sum_ij rho_ij P_ji
    got = np.einsum("pij,ij->p", paulis_t, actual).real
    if desired is None:
        if reference is None:
            raise ValueError("term has no desired value and no reference state was given")
        ref = np.einsum("pij,ij->p", paulis_t, reference).real
        desired = np.array([ref[k] if t.desired is None else t.desired for k, t in enumerate(spec.terms)])
    return float(np.sum(weights * (got - desired) ** 2))


def cost_from_states(states: list[np.ndarray], specs: Sequence[CostSpec], output_wires) -> float:
    """Total cost of resolved specs over a :func:`forward_trace` result."""
    total = 0.0
    for spec in specs:
        rho = states[-1] if spec.stage is None else states[spec.stage]
        wires = output_wires if spec.wires is None else spec.wires
        total += eval_cost(spec, partial_trace(rho, wires))
    return total


def network_cost(net: Network, rho_in: np.ndarray, specs: Sequence[CostSpec]) -> float:
    return cost_from_states(forward_trace(net, rho_in), specs, net.output_wires)


# --- gradients -----------------------------------------------------------------


def _check_finite(value: float, where: str) -> float:
    if not np.isfinite(value):
        raise FloatingPointError(f"non-finite cost {value} at {where}")
    return value


def _map(fn, items, threads: int):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def gradient_fd(
    cost_fn: Callable[[np.ndarray], float],
    params,
    epsilon: float,
    mode: str = "forward",
    threads: int = 1,
) -> np.ndarray:
    """Finite-difference gradient of ``cost_fn`` at ``params``.

    ``forward``: ``(C(w + e) - C(w)) / e`` using ``1 + P`` evaluations.
    ``central``: ``(C(w + e) - C(w - e)) / 2e`` using ``2P`` evaluations.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    params = np.asarray(params, dtype=float)
    p = params.size

    def shifted(arg):
        i, delta = arg
        w = params.copy()
        w[i] += delta
        return _check_finite(cost_fn(w), f"parameter {i} shifted by {delta}")

    if mode == "forward":
        base = _check_finite(cost_fn(params), "base point")
        ups = _map(shifted, [(i, epsilon) for i in range(p)], threads)
        return (np.array(ups) - base) / epsilon
    if mode == "central":
        vals = _map(shifted, [(i, s) for i in range(p) for s in (epsilon, -epsilon)], threads)
        vals = np.array(vals).reshape(p, 2)
        return (vals[:, 0] - vals[:, 1]) / (2 * epsilon)
    raise ValueError(f"unknown gradient mode {mode!r}")


def network_gradient(
    net: Network,
    params: np.ndarray,
    rho_in: np.ndarray,
    specs: Sequence[CostSpec],
    epsilon: float,
    mode: str = "forward",
    threads: int = 1,
) -> tuple[float, np.ndarray]:
    """Cost and finite-difference gradient of a network cost for one input.

    Numerically the same formula as :func:`gradient_fd`, but only the part
    of the network downstream of each shifted parameter is re-simulated.
    """
    ev = CachedEvaluator(net, params, rho_in, lambda s: cost_from_states(s, specs, net.output_wires))
    base = _check_finite(ev.base_cost(), "base point")
    p = params.size

    def shifted(arg):
        i, delta = arg
        return _check_finite(ev.shifted_cost(i, delta), f"parameter {i} shifted by {delta}")

    if mode == "forward":
        ups = _map(shifted, [(i, epsilon) for i in range(p)], threads)
        return base, (np.array(ups) - base) / epsilon
    if mode == "central":
        vals = np.array(_map(shifted, [(i, s) for i in range(p) for s in (epsilon, -epsilon)], threads))
        vals = vals.reshape(p, 2)
        return base, (vals[:, 0] - vals[:, 1]) / (2 * epsilon)
    raise ValueError(f"unknown gradient mode {mode!r}")


def descent_step(params, grad, eta: float, momentum: float, velocity):
    """Momentum update: ``v' = momentum v - eta grad``, ``w' = w + v'``."""
    params, grad, velocity = (np.asarray(a, dtype=float) for a in (params, grad, velocity))
    if not params.shape == grad.shape == velocity.shape:
        raise ValueError("params, grad and velocity must have equal length")
    velocity = momentum * velocity - eta * grad
    return params + velocity, velocity


# --- training loop -------------------------------------------------------------


@dataclass(frozen=True)
class TrainConfig:
    eta: float = 0.01
    epsilon: float = 1e-4
    momentum: float = 0.9
    max_iterations: int = 20000
    cost_threshold: float = 1e-4
    average_window: int = 50
    seed: int = 0
    gradient_mode: str = "forward"
    init_scale: float = 1.0
    threads: int = 1

    def __post_init__(self):
        if self.eta < 0:
            raise ValueError("eta must be non-negative")
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be non-negative")
        if self.average_window < 1:
            raise ValueError("average_window must be at least 1")
        if self.gradient_mode not in ("forward", "central"):
            raise ValueError(f"unknown gradient mode {self.gradient_mode!r}")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


@dataclass
class TrainResult:
    network: Network
    trace: list[float] = field(default_factory=list)
    converged: bool = False

    @property
    def running_average(self) -> float:
        return float(np.mean(self.trace[-50:])) if self.trace else float("nan")


def initial_params(net: Network, rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Uniform draws in ``[-scale, scale]`` for every trainable parameter."""
    return rng.uniform(-scale, scale, count_params(net))


def train(net: Network, task, cfg: TrainConfig, params=None) -> TrainResult:
    """Stochastic gradient descent with one freshly sampled input per step.

    ``task`` supplies ``sample(rng) -> rho_in`` and ``cost_specs(rho_in)``.
    The same sample is used for every finite-difference evaluation of a
    step. Stops after ``cfg.max_iterations`` steps or once the mean of the
    last ``cfg.average_window`` costs drops below ``cfg.cost_threshold``.

    Raises
    ------
    TrainingDiverged
        With the partial trace, if the cost blows up.
    """
    rng = np.random.default_rng(cfg.seed)
    params = initial_params(net, rng, cfg.init_scale) if params is None else np.array(params, float)
    velocity = np.zeros_like(params)
    trace: list[float] = []
    converged = False
    for it in range(cfg.max_iterations):
        if not np.all(np.isfinite(params)):
            raise TrainingDiverged(f"non-finite parameters at step {it}", trace)
        rho_in = task.sample(rng)
        specs = task.cost_specs(rho_in)
        try:
            cost, grad = network_gradient(
                net, params, rho_in, specs, cfg.epsilon, cfg.gradient_mode, cfg.threads
            )
        except FloatingPointError as exc:
            raise TrainingDiverged(str(exc), trace, assign_params(net, params)) from exc
        trace.append(cost)
        if cost > DIVERGENCE_LIMIT:
            raise TrainingDiverged(f"cost {cost} at step {it}", trace, assign_params(net, params))
        if len(trace) >= cfg.average_window:
            avg = sum(trace[-cfg.average_window :]) / cfg.average_window
            if avg < cfg.cost_threshold:
                converged = True
                break
        params, velocity = descent_step(params, grad, cfg.eta, cfg.momentum, velocity)
        if it % 1000 == 0:
            log.debug("step %d cost %.3e", it, cost)
    return TrainResult(assign_params(net, params), trace, converged)
