"""Transition rows: exactness vs dense conjugation, Parseval, Clifford paths."""

import itertools

import numpy as np
import pytest

from corpus import haar_unitary, random_layer
from paulipath.circuit import CLIFFORD_GATES, Gate, Layer
from paulipath.conjugation import conjugate_through_gate, gate_rows, layer_transition
from paulipath.pauli import PauliString

SIGMA = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def dense(label: str) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ch in label:
        out = np.kron(out, SIGMA[ch])
    return out


def row_as_dict(row):
    return {p.to_label(): a for p, a in row.targets}


def test_clifford_examples():
    h = conjugate_through_gate(Gate("H", (0,)), PauliString.from_label("Z"))
    assert row_as_dict(h) == {"X": 1.0}
    cnot = conjugate_through_gate(Gate("CNOT", (0, 1)), PauliString.from_label("XI"))
    assert row_as_dict(cnot) == {"XX": 1.0}


def test_t_gate_row():
    # T^dag X T = (X - Y)/sqrt(2): equal magnitudes, Y picks up the minus sign
    t = conjugate_through_gate(Gate("T", (0,)), PauliString.from_label("X"))
    d = row_as_dict(t)
    assert set(d) == {"X", "Y"}
    assert abs(d["X"] - 1 / np.sqrt(2)) < 1e-15
    assert abs(d["Y"] + 1 / np.sqrt(2)) < 1e-15


def test_identity_row_shortcut():
    row = conjugate_through_gate(Gate("CNOT", (0, 1)), PauliString.from_label("II"))
    assert row_as_dict(row) == {"II": 1.0}


@pytest.mark.parametrize("kind", sorted(CLIFFORD_GATES))
def test_clifford_rows_single_target(kind):
    arity = 2 if kind in ("CNOT", "CZ", "SWAP") else 1
    rows = gate_rows(Gate(kind, tuple(range(arity))))
    for row in rows:
        assert len(row) == 1
        assert row[0][1] in (1.0, -1.0)


def test_rows_match_dense_conjugation():
    rng = np.random.default_rng(17)
    for arity in (1, 2):
        u = haar_unitary(rng, 2**arity)
        g = Gate("unitary", tuple(range(arity)), u)
        for labels in itertools.product("IXYZ", repeat=arity):
            label = "".join(labels)
            row = conjugate_through_gate(g, PauliString.from_label(label))
            rebuilt = sum(a * dense(p.to_label()) for p, a in row.targets)
            exact = u.conj().T @ dense(label) @ u
            assert np.abs(rebuilt - exact).max() < 1e-12


def test_row_parseval_and_orthogonality():
    rng = np.random.default_rng(23)
    for arity in (1, 2):
        u = haar_unitary(rng, 2**arity)
        g = Gate("unitary", tuple(range(arity)), u)
        rows = gate_rows(g)
        vecs = []
        for row in rows:
            v = np.zeros(4**arity)
            for q, a in row:
                v[q] = a
            vecs.append(v)
            assert abs(np.dot(v, v) - 1.0) < 1e-12
        for i in range(len(vecs)):
            for j in range(i + 1, len(vecs)):
                assert abs(np.dot(vecs[i], vecs[j])) < 1e-12


def test_layer_transition_examples():
    layer = Layer((Gate("H", (0,)),))
    out = layer_transition(layer, PauliString.from_label("ZZ"))
    assert [(p.to_label(), a) for p, a in out] == [("XZ", 1.0)]

    layer2 = Layer((Gate("CNOT", (0, 1)), Gate("H", (2,))))
    out2 = layer_transition(layer2, PauliString.from_label("XIZ"))
    assert [(p.to_label(), a) for p, a in out2] == [("XXX", 1.0)]

    layer3 = Layer((Gate("T", (0,)),))
    out3 = layer_transition(layer3, PauliString.from_label("XZ"))
    assert {p.to_label(): a for p, a in out3} == pytest.approx(
        {"XZ": 1 / np.sqrt(2), "YZ": -1 / np.sqrt(2)})


def test_layer_superoperator_matches_dense():
    """Assembled layer transitions equal dense conjugation entrywise, n <= 4."""
    from paulipath.oracle import dense_pauli, full_layer_unitary, pauli_coefficients

    rng = np.random.default_rng(31)
    for _ in range(5):
        n = int(rng.integers(2, 5))
        layer = random_layer(rng, n)
        u = full_layer_unitary(layer.gates, n)
        for _ in range(8):
            p = PauliString(n, int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))
            exact = u.conj().T @ dense_pauli(p) @ u
            rebuilt = np.zeros_like(exact)
            for q, a in layer_transition(layer, p):
                rebuilt += a * dense_pauli(q)
            assert np.abs(rebuilt - exact).max() < 1e-12
            # amplitudes are the Pauli coefficients of the conjugated operator
            coeffs = pauli_coefficients(exact, n)
            assert abs(np.sum(np.abs(coeffs) ** 2) - 1.0) < 1e-12


def test_transition_sorted_by_amplitude():
    rng = np.random.default_rng(37)
    layer = Layer((Gate("unitary", (0, 1), haar_unitary(rng, 4)),))
    out = layer_transition(layer, PauliString.from_label("XY"))
    mags = [abs(a) for _, a in out]
    assert mags == sorted(mags, reverse=True)
