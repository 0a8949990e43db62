"""Dense density-matrix primitives.

States are plain ``complex128`` numpy arrays of shape ``(2**n, 2**n)``.
Wire 0 is the most significant tensor factor: the basis index of a bit
string ``b`` is ``sum(b[w] * 2**(n - 1 - w))``.
"""

from __future__ import annotations

from functools import lru_cache, reduce
from typing import Sequence

import numpy as np

MAX_QUBITS = 12

HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-8

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = np.stack([I2, SX, SY, SZ])


class WiringError(ValueError):
    """Gate wires are duplicated, out of range or do not match the gate."""


def num_qubits(mat: np.ndarray) -> int:
    dim = mat.shape[0]
    n = dim.bit_length() - 1
    if dim != 1 << n or mat.shape != (dim, dim):
        raise ValueError(f"expected a square 2^n matrix, got shape {mat.shape}")
    return n


def _max_abs(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def is_hermitian(mat: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return _max_abs(mat - mat.conj().T) <= tol


def unitarity_error(u: np.ndarray) -> float:
    """Max-entry norm of ``U^dagger U - I``."""
    return _max_abs(u.conj().T @ u - np.eye(u.shape[0]))


def check_density_matrix(rho: np.ndarray, tol: float = 1e-9) -> None:
    """Raise ``ValueError`` unless ``rho`` is Hermitian, unit-trace and PSD."""
    num_qubits(rho)
    if not is_hermitian(rho, tol):
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValueError(f"density matrix trace is {np.trace(rho).real}, not 1")
    if np.linalg.eigvalsh(rho).min() < -10 * tol:
        raise ValueError("density matrix has a negative eigenvalue")


def _check_wires(wires: Sequence[int], n: int) -> None:
    if len(set(wires)) != len(wires):
        raise WiringError(f"duplicate wires in {list(wires)}")
    for w in wires:
        if not 0 <= w < n:
            raise WiringError(f"wire {w} out of range for {n} qubits")


def _check_size(n: int) -> None:
    if n > MAX_QUBITS:
        raise ValueError(f"register of {n} qubits exceeds the limit of {MAX_QUBITS}")


# --- constructors -----------------------------------------------------------


def tensor(*mats: np.ndarray) -> np.ndarray:
    """Kronecker product, first argument most significant."""
    return reduce(np.kron, mats)


def pure(psi: np.ndarray) -> np.ndarray:
    """``|psi><psi|`` for a (normalised on the fly) state vector."""
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return np.outer(psi, psi.conj())


def basis_state(bits: Sequence[int]) -> np.ndarray:
    """Projector onto the computational basis state ``|bits>``."""
    n = len(bits)
    idx = int("".join(str(int(b)) for b in bits), 2) if n else 0
    rho = np.zeros((1 << n, 1 << n), dtype=complex)
    rho[idx, idx] = 1
    return rho


def zero_state(n: int) -> np.ndarray:
    return basis_state([0] * n)


def sample_haar_state(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random pure state on ``n`` qubits as a density matrix."""
    if n < 1:
        raise ValueError("need at least one qubit")
    dim = 1 << n
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return pure(psi)


def axis_states() -> list[np.ndarray]:
    """Eigenstates of sigma_3, sigma_1, sigma_2: |0>, |1>, |+>, |->, |+i>, |-i>."""
    s = 1 / np.sqrt(2)
    vecs = [
        [1, 0],
        [0, 1],
        [s, s],
        [s, -s],
        [s, 1j * s],
        [s, -1j * s],
    ]
    return [pure(np.array(v, dtype=complex)) for v in vecs]


# --- operators ---------------------------------------------------------------


def pauli_string(indices: Sequence[int]) -> np.ndarray:
    """Matrix of ``sigma_{i_1} (x) ... (x) sigma_{i_k}``; index 0 is identity.

    The returned array is cached and read-only.
    """
    return _pauli_string(tuple(int(i) for i in indices))


@lru_cache(maxsize=4096)
def _pauli_string(indices: tuple[int, ...]) -> np.ndarray:
    for i in indices:
        if i not in (0, 1, 2, 3):
            raise ValueError(f"Pauli index must be in 0..3, got {i}")
    mat = tensor(*(PAULIS[i] for i in indices)) if indices else np.ones((1, 1), dtype=complex)
    mat.setflags(write=False)
    return mat


def exp_hermitian(h: np.ndarray) -> np.ndarray:
    """``exp(iH)`` for Hermitian ``H`` via ``H = Q diag(lam) Q^dagger``."""
    if not is_hermitian(h):
        raise ValueError("generator is not Hermitian")
    lam, q = np.linalg.eigh(h)
    return (q * np.exp(1j * lam)) @ q.conj().T


def _perm_axes(wires: Sequence[int], n: int) -> list[int]:
    rest = [w for w in range(n) if w not in wires]
    return list(wires) + rest


def embed(gate: np.ndarray, wires: Sequence[int], n: int) -> np.ndarray:
    """Operator on ``n`` qubits acting as ``gate`` on ``wires`` (in that order).

    Raises
    ------
    WiringError
        If wires repeat, fall outside ``range(n)`` or do not match the gate size.
    """
    wires = list(wires)
    _check_size(n)
    _check_wires(wires, n)
    k = len(wires)
    if gate.shape != (1 << k, 1 << k):
        raise WiringError(f"gate of shape {gate.shape} cannot act on {k} wires")
    full = np.kron(gate, np.eye(1 << (n - k), dtype=complex))
    order = _perm_axes(wires, n)
    # axis a of `full` (as a 2n tensor) carries wire order[a]; undo that
    inv = np.argsort(order)
    t = full.reshape((2,) * (2 * n))
    t = t.transpose(list(inv) + [n + i for i in inv])
    return t.reshape(1 << n, 1 << n)


def apply(rho: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``U rho U^dagger`` with a unitarity check on ``U``."""
    if u.shape != rho.shape:
        raise ValueError(f"operator shape {u.shape} does not match state {rho.shape}")
    if unitarity_error(u) > UNITARY_TOL:
        raise ValueError("operator is not unitary")
    return u @ rho @ u.conj().T


@lru_cache(maxsize=None)
def _gate_axes(wires: tuple[int, ...], n: int) -> tuple[list[int], list[int]]:
    order = _perm_axes(wires, n)
    fwd = order + [n + w for w in order]
    return fwd, [int(a) for a in np.argsort(fwd)]


def apply_local(rho: np.ndarray, gate: np.ndarray, wires: Sequence[int]) -> np.ndarray:
    """``U rho U^dagger`` with ``U = embed(gate, wires, n)``, without forming ``U``.

    No validation; callers are expected to have checked the wiring.
    """
    n = rho.shape[0].bit_length() - 1
    k = len(wires)
    big, rest = 1 << k, 1 << (n - k)
    fwd, inv = _gate_axes(tuple(wires), n)
    # bring the gate wires to the front of both row and column indices
    t = rho.reshape((2,) * (2 * n)).transpose(fwd).reshape(big, rest * big * rest)
    t = (gate @ t).reshape(big * rest, big, rest)
    t = np.matmul(gate.conj(), t)
    return t.reshape((2,) * (2 * n)).transpose(inv).reshape(rho.shape)


def partial_trace(rho: np.ndarray, keep: Sequence[int]) -> np.ndarray:
    """Reduced state on ``keep`` wires, returned in the listed order."""
    keep = list(keep)
    if not keep:
        raise ValueError("keep must name at least one wire")
    n = num_qubits(rho)
    _check_wires(keep, n)
    drop = [w for w in range(n) if w not in keep]
    k, d = len(keep), len(drop)
    t = rho.reshape((2,) * (2 * n))
    t = t.transpose(keep + drop + [n + w for w in keep] + [n + w for w in drop])
    t = t.reshape(1 << k, 1 << d, 1 << k, 1 << d)
    return np.einsum("ajbj->ab", t)


def pauli_expectation(rho: np.ndarray, indices: Sequence[int]) -> float:
    """``Tr(rho sigma_p)`` for a Pauli string covering every qubit of ``rho``."""
    n = num_qubits(rho)
    if len(indices) != n:
        raise ValueError(f"Pauli string of length {len(indices)} on {n} qubits")
    p = pauli_string(indices)
    # Tr(AB) = sum_ij A_ij B_ji
    return float(np.real(np.sum(rho * p.T)))


def dephase_z(rho: np.ndarray, wire: int) -> np.ndarray:
    """Full Z-dephasing of one wire: ``(rho + Z rho Z) / 2``."""
    n = num_qubits(rho)
    _check_wires([wire], n)
    bit = (np.arange(1 << n) >> (n - 1 - wire)) & 1
    return np.where(bit[:, None] == bit[None, :], rho, 0)


def purity(rho: np.ndarray) -> float:
    return float(np.real(np.trace(rho @ rho)))
