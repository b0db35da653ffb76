"""Circuit model: parsing, validation, gate weights, light cones."""

import json

import numpy as np
import pytest

from corpus import random_circuit
from paulipath.circuit import (Circuit, Gate, Layer, NoiseSpec, circuits_equal,
                               format_circuit, gate_weight, light_cone, parse_circuit,
                               validate)
from paulipath.errors import ParseError
from paulipath.pauli import PauliString

MINIMAL = """
{
  "n": 2,
  "noise": {"model": "uniform", "gamma": 0.1},
  "layers": [{"gates": [{"kind": "CNOT", "qubits": [0, 1]}]}]
}
"""


def test_parse_minimal():
    c = parse_circuit(MINIMAL)
    assert c.n == 2 and c.depth == 1
    assert c.noise.model == "uniform" and c.noise.gamma == 0.1
    assert c.layers[0].gates[0].kind == "CNOT"


def test_parse_duplicate_qubit():
    bad = MINIMAL.replace("[0, 1]", "[0, 0]")
    with pytest.raises(ParseError, match="duplicate qubit"):
        parse_circuit(bad)


def test_parse_non_unitary_matrix():
    doc = {
        "n": 1,
        "noise": {"model": "uniform", "gamma": 0.0},
        "layers": [{"gates": [{"kind": "unitary", "qubits": [0],
                               "matrix": [[1, 0], [0, 2]]}]}],
    }
    with pytest.raises(ParseError, match="non-unitary"):
        parse_circuit(json.dumps(doc))


@pytest.mark.parametrize(
    "mutate,message",
    [
        (lambda d: d.update(n="x") or d, "malformed|invalid"),
        (lambda d: (d.pop("layers"), d)[1], "missing"),
        (lambda d: d["layers"][0]["gates"][0].update(kind="FOO") or d, "unknown gate"),
        (lambda d: d["layers"][0]["gates"][0].update(qubits=[0, 5]) or d, "out of range"),
        (lambda d: d["noise"].update(gamma=-0.1) or d, "negative noise"),
    ],
)
def test_parse_error_cases(mutate, message):
    doc = json.loads(MINIMAL)
    try:
        doc = mutate(doc)
        text = json.dumps(doc)
    except TypeError:
        text = "{"
    with pytest.raises(ParseError, match=message):
        parse_circuit(text)


def test_gamma_s_range():
    doc = json.loads(MINIMAL)
    doc["noise"] = {"model": "nonunital_random", "gamma_s": 0.6, "seed": 1}
    with pytest.raises(ParseError, match="4/7"):
        parse_circuit(json.dumps(doc))
    doc["noise"]["gamma_s"] = 0.5
    assert parse_circuit(json.dumps(doc)).noise.gamma_s == 0.5


def test_validate_layer_overlap():
    layer = Layer((Gate("CNOT", (0, 1)), Gate("H", (1,))))
    c = Circuit(2, (layer,), NoiseSpec("uniform", 0.1))
    assert any("overlap" in v for v in validate(c))


def test_validate_ok_bell():
    bell = Circuit(2, (Layer((Gate("CNOT", (0, 1)),)), Layer((Gate("H", (0,)),))),
                   NoiseSpec("uniform", 0.05))
    assert validate(bell) == []


def test_round_trip_random_circuits():
    rng = np.random.default_rng(21)
    for _ in range(20):
        n = int(rng.integers(1, 6))
        c = random_circuit(rng, n, int(rng.integers(0, 4)), "gate_based", 0.2,
                           named_prob=0.5)
        again = parse_circuit(format_circuit(c))
        assert circuits_equal(c, again)


def test_gate_weight_examples():
    layer = Layer((Gate("CNOT", (0, 1)),))
    assert gate_weight(layer, PauliString.from_label("XIZ")) == 1
    assert gate_weight(layer, PauliString.from_label("XXI")) == 2
    assert gate_weight(layer, PauliString.from_label("III")) == 0
    # identity gates carry no noise
    idle = Layer((Gate("I", (0,)), Gate("CNOT", (1, 2))))
    assert gate_weight(idle, PauliString.from_label("XXI")) == 1


def test_gate_weight_bounds():
    rng = np.random.default_rng(5)
    for _ in range(50):
        n = int(rng.integers(2, 7))
        c = random_circuit(rng, n, 1, "gate_based", 0.1)
        p = PauliString(n, int(rng.integers(0, 2**n)), int(rng.integers(0, 2**n)))
        w = gate_weight(c.layers[0], p)
        assert w <= min((p.x | p.z).bit_count(), 2 * len(c.layers[0].gates))


def test_light_cone_examples():
    c1 = Circuit(3, (Layer((Gate("CNOT", (1, 2)),)),), NoiseSpec("readout_only", 0.0))
    assert light_cone(c1, {2}) == [{1, 2}]
    c2 = Circuit(3, (Layer((Gate("CNOT", (1, 2)),)),) * 3, NoiseSpec("readout_only", 0.0))
    assert light_cone(c2, {0}) == [{0}, {0}, {0}]
    # 1D brickwork, d=2, 4 qubits
    brick = Circuit(
        4,
        (Layer((Gate("CNOT", (0, 1)), Gate("CNOT", (2, 3)))),
         Layer((Gate("CNOT", (1, 2)),))),
        NoiseSpec("readout_only", 0.0),
    )
    cones = light_cone(brick, {0})
    assert cones == [{0, 1}, {0, 1, 2}] and len(cones[-1]) <= 3


def test_light_cone_monotone_and_bounded():
    rng = np.random.default_rng(9)
    for _ in range(30):
        n = int(rng.integers(2, 8))
        c = random_circuit(rng, n, int(rng.integers(1, 5)), "uniform", 0.1)
        start = {int(rng.integers(0, n))}
        cones = light_cone(c, start)
        prev = start
        for k, cone in enumerate(cones, start=1):
            assert prev <= cone
            assert len(cone) <= min(n, len(start) * 2**k)
            prev = cone
