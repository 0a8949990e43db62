"""Parametrised unitary families used as quantum neurons.

Every family maps a flat real vector to a unitary matrix.  Parameter layouts:

* ``GeneralN`` / ``FanOut2``: ``4**N`` coefficients of the Pauli strings
  ``sigma_{j1} (x) ... (x) sigma_{jN}``, ``j1`` most significant.
* ``SingleQubit``: ``(a0, a1, a2, a3)``.
* ``Neuron2`` / ``Neuron3``: the control-basis rotation ``V`` (``GeneralN``
  on the ``m`` controls) followed by ``2**m`` blocks of four ``SingleQubit``
  parameters, one per target unitary ``T_j``.
* ``TwoParam``: ``(theta, phi)``.
* ``ClassicalPermutation``: no trainable parameters; weights and threshold
  are fixed at construction.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
import scipy.linalg

from qfnn.core import PAULIS, exp_hermitian, pauli_string

MAX_GENERAL_QUBITS = 3
SINC_CUTOFF = 1e-6


class Family(str, enum.Enum):
    GENERAL_N = "GeneralN"
    NEURON3 = "Neuron3"
    NEURON2 = "Neuron2"
    SINGLE_QUBIT = "SingleQubit"
    TWO_PARAM = "TwoParam"
    FAN_OUT2 = "FanOut2"
    CLASSICAL_PERMUTATION = "ClassicalPermutation"


@lru_cache(maxsize=None)
def pauli_basis(n: int) -> np.ndarray:
    """All ``4**n`` Pauli strings on ``n`` qubits, stacked in parameter order."""
    return np.stack([pauli_string(js) for js in itertools.product(range(4), repeat=n)])


def build_general(alpha, n: int) -> np.ndarray:
    """``exp(i sum_j alpha_j P_j)`` over all ``n``-qubit Pauli strings ``P_j``."""
    alpha = np.asarray(alpha, dtype=float)
    if n < 1 or n > MAX_GENERAL_QUBITS:
        raise ValueError(f"general unitaries supported on 1..{MAX_GENERAL_QUBITS} qubits, got {n}")
    if alpha.shape != (4**n,):
        raise ValueError(f"expected {4**n} parameters for a {n}-qubit unitary, got {alpha.shape}")
    h = np.tensordot(alpha, pauli_basis(n), axes=1)
    return exp_hermitian(h)


def build_single_qubit(a0: float, a1: float, a2: float, a3: float) -> np.ndarray:
    """Closed form ``e^{i a0} (cos W 1 + i sin(W)/W (a1 X + a2 Y + a3 Z))``."""
    omega = np.sqrt(a1 * a1 + a2 * a2 + a3 * a3)
    # removable singularity at omega = 0
    sinc = 1 - omega * omega / 6 if omega < SINC_CUTOFF else np.sin(omega) / omega
    c = np.cos(omega)
    s = 1j * sinc
    u = np.array(
        [[c + s * a3, s * (a1 - 1j * a2)], [s * (a1 + 1j * a2), c - s * a3]],
        dtype=complex,
    )
    return np.exp(1j * a0) * u


def build_neuron(m: int, v_params, t_params) -> np.ndarray:
    """Restricted neuron ``sum_j |tau_j><tau_j| (x) T_j`` with ``|tau_j> = V|j>``.

    Acts on ``m`` control qubits followed by the target qubit.
    """
    if m not in (1, 2):
        raise ValueError(f"neuron control arity must be 1 or 2, got {m}")
    v_params = np.asarray(v_params, dtype=float)
    t_params = np.asarray(t_params, dtype=float).reshape(-1)
    if v_params.shape != (4**m,):
        raise ValueError(f"V needs {4**m} parameters, got {v_params.size}")
    if t_params.size != 4 * 2**m:
        raise ValueError(f"need {2**m} blocks of 4 target parameters, got {t_params.size}")
    v = build_general(v_params, m)
    blocks = [build_single_qubit(*t_params[4 * j : 4 * j + 4]) for j in range(2**m)]
    vi = np.kron(v, np.eye(2))
    return vi @ scipy.linalg.block_diag(*blocks) @ vi.conj().T


def build_two_param(theta: float, phi: float) -> np.ndarray:
    """``|tau><tau| (x) 1 + |tau_perp><tau_perp| (x) sigma_1``."""
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    ph = np.exp(1j * phi)
    tau = np.array([c, ph * s])
    tau_perp = np.array([s, -ph * c])
    return np.kron(np.outer(tau, tau.conj()), PAULIS[0]) + np.kron(
        np.outer(tau_perp, tau_perp.conj()), PAULIS[1]
    )


def heaviside_neuron(weights, inputs, threshold: float = 0.5) -> int:
    """Classical neuron: 1 if the weighted input exceeds ``threshold``."""
    z = sum(w * x for w, x in zip(weights, inputs))
    return int(z > threshold)


def build_classical_permutation(weights, threshold: float = 0.5) -> np.ndarray:
    """Reversible neuron ``|in, d> -> |in, d XOR H(w.in - threshold)>``."""
    n = len(weights)
    if n < 1:
        raise ValueError("need at least one input")
    dim = 1 << (n + 1)
    p = np.zeros((dim, dim), dtype=complex)
    for bits in itertools.product((0, 1), repeat=n):
        out = heaviside_neuron(weights, bits, threshold)
        base = int("".join(map(str, bits)), 2) << 1 if n else 0
        for d in (0, 1):
            p[base | (d ^ out), base | d] = 1
    return p


def cnot_params() -> np.ndarray:
    """``GeneralN(2)`` parameters whose exponential is exactly CNOT.

    CNOT = exp(i pi/4 (1 - Z) (x) (1 - X)).
    """
    alpha = np.zeros(16)
    alpha[0 * 4 + 0] = np.pi / 4
    alpha[0 * 4 + 1] = -np.pi / 4
    alpha[3 * 4 + 0] = -np.pi / 4
    alpha[3 * 4 + 1] = np.pi / 4
    return alpha


def general_params_for(u: np.ndarray) -> np.ndarray:
    """Inverse of :func:`build_general`: Pauli coefficients of ``-i log U``.

    Uses the principal branch of the logarithm via the complex Schur form,
    which is diagonal with a unitary basis for normal matrices.
    """
    n = u.shape[0].bit_length() - 1
    t, z = scipy.linalg.schur(u, output="complex")
    h = (z * np.angle(np.diag(t))) @ z.conj().T
    basis = pauli_basis(n)
    return np.real(np.einsum("pij,ji->p", basis, h)) / u.shape[0]


def single_qubit_params_for(u: np.ndarray) -> np.ndarray:
    """Parameters ``(a0, a1, a2, a3)`` of :func:`build_single_qubit` reproducing ``u``."""
    return general_params_for(u)


_SIZES = {
    Family.SINGLE_QUBIT: (1, 4),
    Family.NEURON2: (2, 12),
    Family.NEURON3: (3, 32),
    Family.TWO_PARAM: (2, 2),
    Family.FAN_OUT2: (2, 16),
}


def family_shape(family: Family, arity: int | None = None) -> tuple[int, int]:
    """``(qubits acted on, trainable parameter count)`` for a family."""
    family = Family(family)
    if family is Family.GENERAL_N:
        if arity is None:
            raise ValueError("GeneralN needs an explicit arity")
        return arity, 4**arity
    if family is Family.CLASSICAL_PERMUTATION:
        if arity is None:
            raise ValueError("ClassicalPermutation needs an explicit arity")
        return arity, 0
    return _SIZES[family]


@dataclass(frozen=True, eq=False)
class ParamUnitary:
    """A unitary family tag plus its real parameter vector.

    ``weights`` and ``threshold`` are only used by ``ClassicalPermutation``.
    """

    family: Family
    arity: int
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))
    weights: tuple[float, ...] = ()
    threshold: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        params = np.array(self.params, dtype=float).reshape(-1)
        params.setflags(write=False)
        object.__setattr__(self, "params", params)
        arity, count = family_shape(self.family, self.arity)
        if arity != self.arity:
            raise ValueError(f"{self.family.value} acts on {arity} qubits, not {self.arity}")
        if self.family is Family.CLASSICAL_PERMUTATION and len(self.weights) != self.arity - 1:
            raise ValueError("ClassicalPermutation needs arity - 1 weights")
        if params.size != count:
            raise ValueError(
                f"{self.family.value} on {self.arity} qubits takes {count} parameters, "
                f"got {params.size}"
            )

    @property
    def num_params(self) -> int:
        return self.params.size

    def with_params(self, params) -> "ParamUnitary":
        return ParamUnitary(self.family, self.arity, params, self.weights, self.threshold)

    def matrix(self) -> np.ndarray:
        return materialize(self.family, self.arity, self.params, self.weights, self.threshold)

    # convenience constructors

    @classmethod
    def general(cls, n: int, params=None) -> "ParamUnitary":
        return cls(Family.GENERAL_N, n, np.zeros(4**n) if params is None else params)

    @classmethod
    def neuron(cls, m: int, params=None) -> "ParamUnitary":
        fam = Family.NEURON3 if m == 2 else Family.NEURON2
        arity, count = family_shape(fam)
        return cls(fam, arity, np.zeros(count) if params is None else params)

    @classmethod
    def fan_out(cls, params=None) -> "ParamUnitary":
        return cls(Family.FAN_OUT2, 2, np.zeros(16) if params is None else params)

    @classmethod
    def single_qubit(cls, params=None) -> "ParamUnitary":
        return cls(Family.SINGLE_QUBIT, 1, np.zeros(4) if params is None else params)

    @classmethod
    def two_param(cls, theta: float, phi: float) -> "ParamUnitary":
        return cls(Family.TWO_PARAM, 2, [theta, phi])

    @classmethod
    def classical(cls, weights, threshold: float = 0.5) -> "ParamUnitary":
        weights = tuple(float(w) for w in weights)
        return cls(Family.CLASSICAL_PERMUTATION, len(weights) + 1, (), weights, float(threshold))


def materialize(family: Family, arity: int, params, weights=(), threshold=0.5) -> np.ndarray:
    """Matrix of a family member; dispatch on ``family``."""
    if family is Family.GENERAL_N or family is Family.FAN_OUT2:
        return build_general(params, arity)
    if family is Family.SINGLE_QUBIT:
        return build_single_qubit(*params)
    if family is Family.NEURON3 or family is Family.NEURON2:
        m = arity - 1
        return build_neuron(m, params[: 4**m], params[4**m :])
    if family is Family.TWO_PARAM:
        return build_two_param(*params)
    if family is Family.CLASSICAL_PERMUTATION:
        return build_classical_permutation(weights, threshold)
    raise ValueError(f"unknown family {family}")
