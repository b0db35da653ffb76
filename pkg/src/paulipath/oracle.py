"""Brute-force dense simulator: the ground truth for all validation.

Evolves full 2^n x 2^n matrices in either picture, applying channels as
single-site superoperators.  Deliberately simple and independent of the
sparse propagation engine; capped at a configurable qubit count.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import TYPE_CHECKING, Iterator, Sequence

import numpy as np

from .circuit import Circuit, Gate
from .errors import CapExceededError
from .pauli import PauliString, PauliSum

if TYPE_CHECKING:  # pragma: no cover
    from .ensembles import StateSpec

DEFAULT_CAP = 10

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass
class DenseOperator:
    n: int
    mat: np.ndarray


def _check_cap(n: int, cap: int):
    if n > cap:
        raise CapExceededError(f"dense computation on {n} qubits exceeds cap {cap}")


def embed_unitary(u: np.ndarray, qubits: Sequence[int], n: int) -> np.ndarray:
    """Embed a 1- or 2-qubit unitary into the full space.

    Basis index bit for qubit q is bit (n-1-q) of the integer index, i.e.
    qubit 0 is most significant; the first listed gate qubit is the most
    significant bit of the local index.
    """
    dim = 2**n
    arity = len(qubits)
    full = np.zeros((dim, dim), dtype=complex)
    clear = 0
    for q in qubits:
        clear |= 1 << (n - 1 - q)
    for col in range(dim):
        lin = 0
        for q in qubits:
            lin = (lin << 1) | ((col >> (n - 1 - q)) & 1)
        base = col & ~clear
        for lout in range(2**arity):
            row = base
            for k, q in enumerate(qubits):
                row |= ((lout >> (arity - 1 - k)) & 1) << (n - 1 - q)
            full[row, col] += u[lout, lin]
    return full


def full_layer_unitary(gates: Sequence[Gate], n: int) -> np.ndarray:
    u = np.eye(2**n, dtype=complex)
    for g in gates:
        u = embed_unitary(g.unitary(), g.qubits, n) @ u
    return u


def apply_site_superop(mat: np.ndarray, qubit: int, s4: np.ndarray, n: int) -> np.ndarray:
    """Apply a 4x4 superoperator (vec index i*2+j) on one site of a matrix."""
    pre = 2**qubit
    post = 2 ** (n - 1 - qubit)
    m = mat.reshape(pre, 2, post, pre, 2, post)
    m = np.moveaxis(m, (1, 4), (4, 5)).reshape(pre, post, pre, post, 4)
    m = m @ s4.T
    m = np.moveaxis(m.reshape(pre, post, pre, post, 2, 2), (4, 5), (1, 4))
    return m.reshape(mat.shape)


def depolarizing_superop(gamma: float) -> np.ndarray:
    f = np.exp(-gamma)
    return np.array(
        [
            [(1 + f) / 2, 0, 0, (1 - f) / 2],
            [0, f, 0, 0],
            [0, 0, f, 0],
            [(1 - f) / 2, 0, 0, (1 + f) / 2],
        ],
        dtype=complex,
    )


def emission_superop(gamma_s: float, direction: int, heisenberg: bool) -> np.ndarray:
    """Random-direction spontaneous emission, in either picture.

    The Schrödinger action for direction +1 (emit 1 -> 0) is
    rho + gamma_s <1|rho|1> |0><0| - (gamma_s/2){|1><1|, rho}.
    """
    h = gamma_s / 2
    if direction > 0:
        s = np.array(
            [[1, 0, 0, gamma_s], [0, 1 - h, 0, 0], [0, 0, 1 - h, 0], [0, 0, 0, 1 - gamma_s]],
            dtype=complex,
        )
    else:
        s = np.array(
            [[1 - gamma_s, 0, 0, 0], [0, 1 - h, 0, 0], [0, 0, 1 - h, 0], [gamma_s, 0, 0, 1]],
            dtype=complex,
        )
    return s.T if heisenberg else s


def _noise_qubits(circuit: Circuit, t: int) -> list[int]:
    """Qubits hit by noise channel D_t (t = 0 is read-out, on all qubits)."""
    model = circuit.noise.model
    if t == 0:
        return list(range(circuit.n))
    if model in ("uniform", "nonunital_random"):
        return list(range(circuit.n))
    if model == "gate_based":
        mask = circuit.layers[t - 1].noise_support()
        return [q for q in range(circuit.n) if (mask >> q) & 1]
    return []


def _directions_for(circuit: Circuit, directions) -> Sequence[Sequence[int]]:
    if directions is not None:
        return directions
    from .nonunital import emission_directions

    return emission_directions(circuit)


def _apply_noise(mat: np.ndarray, circuit: Circuit, t: int, heisenberg: bool,
                 directions) -> np.ndarray:
    noise = circuit.noise
    qubits = _noise_qubits(circuit, t)
    if not qubits:
        return mat
    if noise.model == "nonunital_random":
        for q in qubits:
            s = emission_superop(noise.gamma_s, directions[t][q], heisenberg)
            mat = apply_site_superop(mat, q, s, circuit.n)
    elif noise.gamma > 0:
        s = depolarizing_superop(noise.gamma)
        for q in qubits:
            mat = apply_site_superop(mat, q, s, circuit.n)
    return mat


def evolve_density_matrix(circuit: Circuit, rho: "StateSpec", cap: int = DEFAULT_CAP,
                          directions=None, skip_readout: bool = False) -> DenseOperator:
    """Exact Schrödinger evolution: D_0{U_1 D_1{... U_d D_d{rho} U_d^dag ...} U_1^dag}."""
    _check_cap(circuit.n, cap)
    if circuit.noise.model == "nonunital_random":
        directions = _directions_for(circuit, directions)
    mat = rho.to_dense()
    for t in range(circuit.depth, 0, -1):
        mat = _apply_noise(mat, circuit, t, False, directions)
        u = full_layer_unitary(circuit.layers[t - 1].gates, circuit.n)
        mat = u @ mat @ u.conj().T
    if not skip_readout:
        mat = _apply_noise(mat, circuit, 0, False, directions)
    return DenseOperator(circuit.n, mat)


def exact_heisenberg(circuit: Circuit, observable: PauliSum, cap: int = DEFAULT_CAP,
                     directions=None) -> DenseOperator:
    """Exact Heisenberg evolution C^dag{O} of the observable."""
    _check_cap(circuit.n, cap)
    if circuit.noise.model == "nonunital_random":
        directions = _directions_for(circuit, directions)
    mat = dense_from_pauli_sum(observable)
    mat = _apply_noise(mat, circuit, 0, True, directions)
    for t in range(1, circuit.depth + 1):
        u = full_layer_unitary(circuit.layers[t - 1].gates, circuit.n)
        mat = u.conj().T @ mat @ u
        mat = _apply_noise(mat, circuit, t, True, directions)
    return DenseOperator(circuit.n, mat)


def exact_expectation(circuit: Circuit, rho: "StateSpec", observable: PauliSum,
                      cap: int = DEFAULT_CAP, directions=None) -> float:
    """tr(C{rho} O), exact."""
    out = evolve_density_matrix(circuit, rho, cap, directions)
    val = np.trace(out.mat @ dense_from_pauli_sum(observable))
    assert abs(val.imag) < 1e-10, f"expectation has imaginary residue {val.imag}"
    return float(val.real)


def output_distribution(circuit: Circuit, rho: "StateSpec", cap: int = DEFAULT_CAP,
                        directions=None, skip_readout: bool = False) -> np.ndarray:
    """Computational-basis outcome probabilities of the evolved state."""
    out = evolve_density_matrix(circuit, rho, cap, directions, skip_readout)
    p = np.real(np.diag(out.mat)).copy()
    p[p < 0] = 0.0
    return p


def heisenberg_noise_steps(circuit: Circuit, observable: PauliSum,
                           cap: int = DEFAULT_CAP) -> Iterator[tuple[tuple, np.ndarray]]:
    """Gate-granularity Heisenberg evolution for weight-distribution profiling.

    Yields (label, matrix) after every step: the initial operator, the
    read-out channel, then per layer each gate unitary followed by its noise
    application (per gate for gate-based noise, per layer otherwise).
    """
    _check_cap(circuit.n, cap)
    model = circuit.noise.model
    mat = dense_from_pauli_sum(observable)
    yield ("init",), mat
    mat = _apply_noise(mat, circuit, 0, True, None)
    yield ("readout",), mat
    dep = depolarizing_superop(circuit.noise.gamma)
    for t in range(1, circuit.depth + 1):
        layer = circuit.layers[t - 1]
        for gi, g in enumerate(layer.gates):
            u = embed_unitary(g.unitary(), g.qubits, circuit.n)
            mat = u.conj().T @ mat @ u
            yield ("gate", t, gi), mat
            if model == "gate_based" and not g.is_identity and circuit.noise.gamma > 0:
                for q in g.qubits:
                    mat = apply_site_superop(mat, q, dep, circuit.n)
                yield ("noise", t, gi), mat
        if model == "uniform" and circuit.noise.gamma > 0:
            for q in range(circuit.n):
                mat = apply_site_superop(mat, q, dep, circuit.n)
            yield ("noise", t), mat


# --- Pauli-basis decomposition helpers -------------------------------------

def dense_pauli(p: PauliString) -> np.ndarray:
    return reduce(np.kron, (_SIGMA[p.code(i)] for i in range(p.n)), np.eye(1, dtype=complex))


def dense_from_pauli_sum(op: PauliSum) -> np.ndarray:
    mat = np.zeros((2**op.n, 2**op.n), dtype=complex)
    for p, c in op:
        mat += c * dense_pauli(p)
    return mat


def pauli_coefficients(mat: np.ndarray, n: int) -> np.ndarray:
    """All 4^n coefficients tr(mat * sigma_P)/2^n.

    The flat index is base-4 with qubit 0 the most significant digit and
    digit order (I, X, Y, Z) — identical to the canonical text order.
    """
    t = np.empty((4, 2, 2), dtype=complex)
    for a in range(4):
        t[a] = _SIGMA[a].T / 2
    cur = mat.reshape((2,) * (2 * n))
    operands = [cur, list(range(2 * n))]
    for s in range(n):
        operands += [t, [2 * n + s, s, n + s]]
    out = np.einsum(*operands, list(range(2 * n, 3 * n)), optimize="greedy")
    return out.reshape(4**n)


def index_weights(n: int) -> np.ndarray:
    """Pauli weight of every flat coefficient index."""
    w = np.zeros(1, dtype=np.int64)
    step = np.array([0, 1, 1, 1], dtype=np.int64)
    for _ in range(n):
        w = (w[:, None] + step[None, :]).reshape(-1)
    return w


def pauli_sum_from_dense(mat: np.ndarray, n: int, tol: float = 1e-12) -> PauliSum:
    coeffs = pauli_coefficients(mat, n)
    assert np.abs(coeffs.imag).max(initial=0.0) < 1e-9, "non-Hermitian operator"
    pairs = []
    for idx in np.flatnonzero(np.abs(coeffs.real) > tol):
        x = z = 0
        rest = int(idx)
        for site in range(n - 1, -1, -1):
            code = rest & 3
            rest >>= 2
            x |= ((0, 1, 1, 0)[code]) << site
            z |= ((0, 0, 1, 1)[code]) << site
        pairs.append((PauliString(n, x, z), float(coeffs[idx].real)))
    return PauliSum(n, pairs)


def frobenius_dense(mat: np.ndarray, n: int) -> float:
    """Normalized Frobenius norm sqrt(tr(M^dag M)/2^n)."""
    return float(np.sqrt(np.abs(np.vdot(mat, mat)) / 2**n))
