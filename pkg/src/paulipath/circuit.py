"""Circuit and noise-model representation plus the circuit-file parser.

A circuit file is a JSON document::

    {
      "n": 2,
      "noise": {"model": "uniform", "gamma": 0.1},
      "layers": [
        {"gates": [{"kind": "CNOT", "qubits": [0, 1]}]},
        {"gates": [{"kind": "H", "qubits": [0]}]}
      ]
    }

Layers are listed in reverse temporal order: ``layers[0]`` is the layer
adjacent to the observable and read-out noise, ``layers[-1]`` acts first on
the input state.  Explicit gates use ``"kind": "unitary"`` with a row-major
``matrix`` whose entries are either reals or ``[re, im]`` pairs; the first
listed qubit is the most significant bit of the matrix index.

In Schrödinger order the circuit is

    input state -> D_d -> U_d -> ... -> D_1 -> U_1 -> D_0 (read-out),

so Heisenberg propagation processes the read-out channel first.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .errors import ParseError
from .pauli import PauliString

NAMED_GATES = ("I", "X", "Y", "Z", "H", "S", "T", "CNOT", "CZ", "SWAP")
CLIFFORD_GATES = frozenset(NAMED_GATES) - {"T"}
NOISE_MODELS = ("uniform", "gate_based", "readout_only", "nonunital_random")

MAX_GAMMA_S = 4.0 / 7.0

_S2 = 1.0 / math.sqrt(2.0)


def _named_matrix(kind: str) -> np.ndarray:
    if kind == "I":
        return np.eye(2, dtype=complex)
    if kind == "X":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if kind == "Y":
        return np.array([[0, -1j], [1j, 0]], dtype=complex)
    if kind == "Z":
        return np.array([[1, 0], [0, -1]], dtype=complex)
    if kind == "H":
        return np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex)
    if kind == "S":
        return np.array([[1, 0], [0, 1j]], dtype=complex)
    if kind == "T":
        return np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=complex)
    if kind == "CNOT":
        return np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    if kind == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if kind == "SWAP":
        return np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)
    raise ParseError(f"unknown gate name {kind!r}")


_NAMED_MATRICES = {kind: _named_matrix(kind) for kind in NAMED_GATES}


@dataclass(frozen=True, slots=True, eq=False)
class Gate:
    """A named or explicit-matrix gate on 1 or 2 distinct qubits.

    ``matrix`` is None for named gates; for ``kind == "unitary"`` it is the
    gate's unitary in the computational basis, first listed qubit most
    significant.
    """

    kind: str
    qubits: tuple[int, ...]
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.matrix is not None:
            m = np.asarray(self.matrix, dtype=complex)
            m.setflags(write=False)
            object.__setattr__(self, "matrix", m)

    @property
    def arity(self) -> int:
        return len(self.qubits)

    @property
    def is_identity(self) -> bool:
        """Named identity gates carry no gate-based noise."""
        return self.kind == "I"

    def unitary(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        return _NAMED_MATRICES[self.kind]

    def key(self) -> tuple:
        """Hashable content key, used for transition-row caching."""
        if self.matrix is None:
            return (self.kind, self.arity)
        return ("unitary", self.arity, self.matrix.tobytes())

    def __repr__(self) -> str:
        qs = ",".join(map(str, self.qubits))
        return f"{self.kind}({qs})"


@dataclass(frozen=True, slots=True)
class Layer:
    """One depth-1 unitary: gates with pairwise-disjoint qubit sets."""

    gates: tuple[Gate, ...]

    def support(self) -> int:
        """Bit mask of qubits touched by any gate (identity gates included)."""
        mask = 0
        for g in self.gates:
            for q in g.qubits:
                mask |= 1 << q
        return mask

    def noise_support(self) -> int:
        """Bit mask of qubits participating in non-identity gates."""
        mask = 0
        for g in self.gates:
            if not g.is_identity:
                for q in g.qubits:
                    mask |= 1 << q
        return mask


@dataclass(frozen=True, slots=True)
class NoiseSpec:
    model: str
    gamma: float = 0.0
    gamma_s: float = 0.0
    seed: int = 0


@dataclass(frozen=True, slots=True)
class Circuit:
    """Layers indexed t = 1..d in reverse temporal order, plus a noise spec.

    ``layers[0]`` is U_1 (adjacent to the observable); d = 0 circuits carry
    read-out noise only.
    """

    n: int
    layers: tuple[Layer, ...] = field(default_factory=tuple)
    noise: NoiseSpec = NoiseSpec("readout_only", 0.0)

    @property
    def depth(self) -> int:
        return len(self.layers)


def gate_weight(layer: Layer, p: PauliString) -> int:
    """Gate-restricted weight w_U[P]: support sites hit by non-identity gates."""
    return (p.support & layer.noise_support()).bit_count()


def light_cone(circuit: Circuit, support: Iterable[int]) -> list[set[int]]:
    """Per-layer reachable qubit sets, in Heisenberg order (layers[0] first)."""
    current = set(support)
    for q in current:
        if not 0 <= q < circuit.n:
            raise ValueError(f"support qubit {q} out of range")
    cones = []
    for layer in circuit.layers:
        for g in layer.gates:
            if any(q in current for q in g.qubits):
                current = current | set(g.qubits)
        cones.append(set(current))
    return cones


def _check_unitary(m: np.ndarray, arity: int) -> str | None:
    dim = 2**arity
    if m.shape != (dim, dim):
        return f"matrix shape {m.shape} does not match {arity}-qubit gate"
    if not np.all(np.isfinite(m.view(float))):
        return "non-finite matrix entry"
    defect = np.abs(m.conj().T @ m - np.eye(dim)).max()
    if defect > 1e-10:
        return f"non-unitary matrix (defect {defect:.2e})"
    return None


def validate(circuit: Circuit) -> list[str]:
    """Check all structural invariants; returns a list of violations."""
    out = []
    if circuit.n <= 0:
        out.append("qubit count must be positive")
    noise = circuit.noise
    if noise.model not in NOISE_MODELS:
        out.append(f"unknown noise model {noise.model!r}")
    if noise.gamma < 0:
        out.append("negative noise rate gamma")
    if noise.model == "nonunital_random":
        if not 0 <= noise.gamma_s <= MAX_GAMMA_S:
            out.append(f"gamma_s must lie in [0, 4/7], got {noise.gamma_s}")
    for t, layer in enumerate(circuit.layers, start=1):
        seen = set()
        for g in layer.gates:
            if g.kind not in NAMED_GATES and g.kind != "unitary":
                out.append(f"layer {t}: unknown gate name {g.kind!r}")
                continue
            if g.arity not in (1, 2):
                out.append(f"layer {t}: gate {g} must act on 1 or 2 qubits")
            if len(set(g.qubits)) != g.arity:
                out.append(f"layer {t}: duplicate qubit in gate {g}")
            for q in g.qubits:
                if not 0 <= q < circuit.n:
                    out.append(f"layer {t}: qubit {q} out of range in gate {g}")
                elif q in seen:
                    out.append(f"layer {t}: layer overlap on qubit {q}")
                seen.add(q)
            if g.kind == "unitary":
                if g.matrix is None:
                    out.append(f"layer {t}: explicit gate without matrix")
                else:
                    err = _check_unitary(g.matrix, g.arity)
                    if err:
                        out.append(f"layer {t}: {err}")
            elif g.matrix is not None:
                out.append(f"layer {t}: named gate {g.kind} must not carry a matrix")
            if g.kind in NAMED_GATES:
                expected = 2 if g.kind in ("CNOT", "CZ", "SWAP") else 1
                if g.arity != expected:
                    out.append(f"layer {t}: {g.kind} takes {expected} qubit(s)")
    return out


def _matrix_from_json(entries, where: str) -> np.ndarray:
    if not isinstance(entries, list) or not entries:
        raise ParseError(f"{where}: matrix must be a list of rows")
    rows = []
    for row in entries:
        if not isinstance(row, list):
            raise ParseError(f"{where}: matrix row is not a list")
        vals = []
        for e in row:
            if isinstance(e, (int, float)):
                vals.append(complex(e))
            elif isinstance(e, list) and len(e) == 2 and all(isinstance(v, (int, float)) for v in e):
                vals.append(complex(e[0], e[1]))
            else:
                raise ParseError(f"{where}: matrix entry must be a real or an [re, im] pair")
        rows.append(vals)
    if any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{where}: matrix is not square")
    return np.array(rows, dtype=complex)


def parse_circuit(text: str) -> Circuit:
    """Parse and validate a circuit file; raises ParseError on any defect."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed circuit document: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("circuit document must be a JSON object")
    try:
        n = int(doc["n"])
        noise_doc = doc["noise"]
        layers_doc = doc["layers"]
    except KeyError as exc:
        raise ParseError(f"missing required field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid field value: {exc}") from None
    if not isinstance(noise_doc, dict) or "model" not in noise_doc:
        raise ParseError("noise must be an object with a 'model' field")
    try:
        noise = NoiseSpec(
            model=str(noise_doc["model"]),
            gamma=float(noise_doc.get("gamma", 0.0)),
            gamma_s=float(noise_doc.get("gamma_s", 0.0)),
            seed=int(noise_doc.get("seed", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ParseError(f"invalid noise field: {exc}") from None
    if not isinstance(layers_doc, list):
        raise ParseError("layers must be a list")
    layers = []
    for t, layer_doc in enumerate(layers_doc, start=1):
        if not isinstance(layer_doc, dict) or "gates" not in layer_doc:
            raise ParseError(f"layer {t}: expected an object with a 'gates' list")
        gates = []
        for gdoc in layer_doc["gates"]:
            if not isinstance(gdoc, dict):
                raise ParseError(f"layer {t}: gate entry is not an object")
            kind = str(gdoc.get("kind", "")).upper()
            if kind == "UNITARY":
                kind = "unitary"
            qubits = gdoc.get("qubits")
            if not isinstance(qubits, list) or not all(isinstance(q, int) for q in qubits):
                raise ParseError(f"layer {t}: gate qubits must be a list of integers")
            matrix = None
            if "matrix" in gdoc:
                matrix = _matrix_from_json(gdoc["matrix"], f"layer {t}")
                if kind != "unitary":
                    raise ParseError(f"layer {t}: only 'unitary' gates take a matrix")
            gates.append(Gate(kind, tuple(qubits), matrix))
        layers.append(Layer(tuple(gates)))
    circuit = Circuit(n=n, layers=tuple(layers), noise=noise)
    problems = validate(circuit)
    if problems:
        raise ParseError("; ".join(problems))
    return circuit


def format_circuit(circuit: Circuit) -> str:
    """Serialize a circuit back to the JSON file format."""
    noise = {"model": circuit.noise.model, "gamma": circuit.noise.gamma}
    if circuit.noise.model == "nonunital_random":
        noise["gamma_s"] = circuit.noise.gamma_s
        noise["seed"] = circuit.noise.seed
    layers = []
    for layer in circuit.layers:
        gates = []
        for g in layer.gates:
            gdoc = {"kind": g.kind, "qubits": list(g.qubits)}
            if g.matrix is not None:
                gdoc["matrix"] = [[[float(e.real), float(e.imag)] for e in row] for row in g.matrix]
            gates.append(gdoc)
        layers.append({"gates": gates})
    return json.dumps({"n": circuit.n, "noise": noise, "layers": layers}, indent=2) + "\n"


def circuits_equal(a: Circuit, b: Circuit, tol: float = 1e-15) -> bool:
    """Structural equality; explicit matrices compared entrywise within tol."""
    if (a.n, a.depth, a.noise) != (b.n, b.depth, b.noise):
        return False
    for la, lb in zip(a.layers, b.layers):
        if len(la.gates) != len(lb.gates):
            return False
        for ga, gb in zip(la.gates, lb.gates):
            if (ga.kind, ga.qubits) != (gb.kind, gb.qubits):
                return False
            if (ga.matrix is None) != (gb.matrix is None):
                return False
            if ga.matrix is not None and np.abs(ga.matrix - gb.matrix).max() > tol:
                return False
    return True
