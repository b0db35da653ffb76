"""Transition amplitudes a_PQ = tr(Q U^dag P U)/2^n for gates and layers.

Rows are computed per gate on its local 1- or 2-qubit Pauli basis by dense
conjugation and cached; named Clifford gates collapse to a single target
with amplitude exactly +1 or -1.  Layer rows are tensor products of gate
rows, with untouched qubits passing through unchanged.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import numpy as np

from .circuit import CLIFFORD_GATES, Gate, Layer
from .errors import DimensionMismatchError
from .pauli import X_BIT, Z_BIT, PauliString, canonical_key

AMP_DROP_TOL = 1e-14

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


def _local_pauli(code: int, arity: int) -> np.ndarray:
    if arity == 1:
        return _SIGMA[code]
    return np.kron(_SIGMA[code >> 2], _SIGMA[code & 3])


def _codes_of_local(local: int, arity: int) -> tuple[int, ...]:
    if arity == 1:
        return (local,)
    return (local >> 2, local & 3)


def _dense_row(u: np.ndarray, local: int, arity: int) -> list[tuple[int, float]]:
    dim = 2**arity
    m = u.conj().T @ _local_pauli(local, arity) @ u
    row = []
    for q in range(4**arity):
        a = np.trace(_local_pauli(q, arity) @ m) / dim
        if abs(a.imag) > 1e-12:
            raise AssertionError(f"non-real transition amplitude {a}")
        if abs(a.real) >= AMP_DROP_TOL:
            row.append((q, float(a.real)))
    row.sort(key=lambda qa: (-abs(qa[1]), qa[0]))
    return row


def _build_rows(gate: Gate, schrodinger: bool) -> list[list[tuple[int, float]]]:
    u = gate.unitary()
    if schrodinger:
        # U P U^dag = (U^dag)^dag P (U^dag)
        u = u.conj().T
    arity = gate.arity
    rows: list[list[tuple[int, float]]] = [[(0, 1.0)]]
    for local in range(1, 4**arity):
        row = _dense_row(u, local, arity)
        if gate.kind in CLIFFORD_GATES:
            # Clifford conjugation permutes Paulis up to sign; snap to exact +-1.
            if len(row) != 1 or abs(abs(row[0][1]) - 1.0) > 1e-10:
                raise AssertionError(f"gate {gate.kind} produced a non-Clifford row")
            row = [(row[0][0], 1.0 if row[0][1] > 0 else -1.0)]
        rows.append(row)
    return rows


_cache: dict[tuple, list[list[tuple[int, float]]]] = {}
_cache_lock = threading.Lock()


def gate_rows(gate: Gate, schrodinger: bool = False) -> list[list[tuple[int, float]]]:
    """Transition rows for every local source Pauli, cached per gate content."""
    key = (gate.key(), schrodinger)
    rows = _cache.get(key)
    if rows is None:
        built = _build_rows(gate, schrodinger)
        with _cache_lock:
            rows = _cache.setdefault(key, built)
    return rows


@dataclass(frozen=True, slots=True)
class TransitionRow:
    """Expansion of U^dag P U for one local source Pauli."""

    source: PauliString
    targets: tuple[tuple[PauliString, float], ...]


def _local_code_of(p: PauliString, qubits: tuple[int, ...]) -> int:
    local = 0
    for q in qubits:
        local = (local << 2) | p.code(q)
    return local


def _local_string(local: int, arity: int) -> PauliString:
    x = z = 0
    for i, code in enumerate(_codes_of_local(local, arity)):
        x |= X_BIT[code] << i
        z |= Z_BIT[code] << i
    return PauliString(arity, x, z)


def conjugate_through_gate(gate: Gate, p_local: PauliString) -> TransitionRow:
    """Expand U^dag P U in the local Pauli basis of the gate's support."""
    if p_local.n != gate.arity:
        raise DimensionMismatchError(f"source acts on {p_local.n} qubits, gate on {gate.arity}")
    local = _local_code_of(p_local, tuple(range(gate.arity)))
    row = gate_rows(gate)[local]
    targets = tuple((_local_string(q, gate.arity), a) for q, a in row)
    return TransitionRow(p_local, targets)


def layer_transition(layer: Layer, p: PauliString, schrodinger: bool = False) -> list[tuple[PauliString, float]]:
    """All (Q, a_PQ) with a_PQ != 0 for one layer, unitary part only.

    Targets are sorted by descending |amplitude|, ties broken by canonical
    text order, so enumeration order is platform-independent.
    """
    active = []
    for g in layer.gates:
        local = _local_code_of(p, g.qubits)
        if local:
            active.append((g, gate_rows(g, schrodinger)[local]))
    base_x, base_z = p.x, p.z
    for g, _ in active:
        for q in g.qubits:
            base_x &= ~(1 << q)
            base_z &= ~(1 << q)
    results = [(base_x, base_z, 1.0)]
    for g, row in active:
        new = []
        for x, z, amp in results:
            for local_q, a in row:
                xq, zq = x, z
                for q, code in zip(g.qubits, _codes_of_local(local_q, g.arity)):
                    xq |= X_BIT[code] << q
                    zq |= Z_BIT[code] << q
                new.append((xq, zq, amp * a))
        results = new
    out = [(PauliString(p.n, x, z), amp) for x, z, amp in results]
    out.sort(key=lambda qa: (-abs(qa[1]), canonical_key(qa[0])))
    return out
