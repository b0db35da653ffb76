"""Input states, low-average ensembles and RMS-error measurement.

State specifications are symbolic product states whose Pauli coefficients
tr(rho P) factor over sites, so they can be evaluated in O(n) time:

* ``basis:0101`` — a computational basis state, qubit 0 leftmost;
* ``product:<file>`` — one single-qubit density matrix per line, eight
  whitespace-separated reals (row-major re/im pairs);
* ``mixed:c=<2^m>`` — the first m qubits in |0>, the rest maximally mixed;
  its largest eigenvalue is c/2^n, matching the purity constant c.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np

from . import diagnostics, oracle
from .circuit import Circuit, Gate, Layer
from .errors import DimensionMismatchError, ParseError
from .pauli import PauliString, PauliSum, pauli_l1_norm

_SIGMA = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)


@dataclass(frozen=True, slots=True, eq=False)
class StateSpec:
    """Symbolic n-qubit product state with O(n)-time Pauli coefficients."""

    kind: str
    n: int
    bits: int = 0
    factors: tuple = ()
    purity_c: float = 1.0

    @classmethod
    def basis(cls, bitstring: str) -> "StateSpec":
        bits = 0
        for i, ch in enumerate(bitstring):
            if ch not in "01":
                raise ParseError(f"invalid basis bit {ch!r}")
            bits |= int(ch) << i
        return cls("basis", len(bitstring), bits=bits)

    @classmethod
    def product(cls, factors: Sequence[np.ndarray]) -> "StateSpec":
        mats = []
        for i, f in enumerate(factors):
            m = np.asarray(f, dtype=complex)
            if m.shape != (2, 2):
                raise ParseError(f"site {i}: factor is not a 2x2 matrix")
            if abs(np.trace(m) - 1) > 1e-10:
                raise ParseError(f"site {i}: factor trace is {np.trace(m)}, expected 1")
            if np.abs(m - m.conj().T).max() > 1e-10:
                raise ParseError(f"site {i}: factor is not Hermitian")
            if np.linalg.eigvalsh(m).min() < -1e-10:
                raise ParseError(f"site {i}: factor is not positive semidefinite")
            m.setflags(write=False)
            mats.append(m)
        return cls("product", len(mats), factors=tuple(mats))

    @classmethod
    def mixed(cls, n: int, c: float) -> "StateSpec":
        """First log2(c) qubits fixed to |0>, the rest maximally mixed."""
        m = math.log2(c)
        if c < 1 or abs(m - round(m)) > 1e-12 or round(m) > n:
            raise ParseError(f"mixed purity must be 2^m with 0 <= m <= n, got {c}")
        return cls("mixed", n, bits=round(m), purity_c=float(c))

    def site_coefficient(self, qubit: int, code: int) -> float:
        """tr(rho_site * sigma_code) for the single-site factor."""
        if self.kind == "basis":
            if code == 0:
                return 1.0
            if code == 3:
                return -1.0 if (self.bits >> qubit) & 1 else 1.0
            return 0.0
        if self.kind == "mixed":
            if code == 0:
                return 1.0
            if code == 3 and qubit < self.bits:
                return 1.0
            return 0.0
        val = np.trace(self.factors[qubit] @ _SIGMA[code])
        return float(val.real)

    def to_dense(self) -> np.ndarray:
        mats = []
        for q in range(self.n):
            if self.kind == "product":
                mats.append(self.factors[q])
            elif self.kind == "basis":
                b = (self.bits >> q) & 1
                mats.append(np.diag([1.0 - b, float(b)]).astype(complex))
            else:
                mats.append(np.diag([1.0, 0.0]).astype(complex) if q < self.bits
                            else np.eye(2, dtype=complex) / 2)
        return reduce(np.kron, mats, np.eye(1, dtype=complex))

    def purity(self) -> float:
        """tr(rho^2), a product over sites."""
        out = 1.0
        for q in range(self.n):
            if self.kind == "basis":
                pass
            elif self.kind == "mixed":
                if q >= self.bits:
                    out *= 0.5
            else:
                out *= float(np.trace(self.factors[q] @ self.factors[q]).real)
        return out


def pauli_coefficient(rho: StateSpec, p: PauliString) -> float:
    """tr(rho P) as a product of single-site traces."""
    if rho.n != p.n:
        raise DimensionMismatchError(f"state on {rho.n} qubits, Pauli on {p.n}")
    out = 1.0
    sup = p.support
    while sup:
        q = (sup & -sup).bit_length() - 1
        out *= rho.site_coefficient(q, p.code(q))
        if out == 0.0:
            return 0.0
        sup &= sup - 1
    return out


def expectation_of_table(op: PauliSum, rho: StateSpec) -> float:
    """tr(rho O) for O given by its Pauli expansion coefficients."""
    return sum(c * pauli_coefficient(rho, p) for p, c in op)


def parse_state_spec(text: str, n: int) -> StateSpec:
    """CLI syntax: ``basis:0101``, ``mixed:c=1`` or ``product:<file>``."""
    kind, _, arg = text.partition(":")
    if kind == "basis":
        spec = StateSpec.basis(arg)
        if spec.n != n:
            raise ParseError(f"basis string has {spec.n} bits, circuit has {n} qubits")
        return spec
    if kind == "mixed":
        if not arg.startswith("c="):
            raise ParseError("mixed state spec must be mixed:c=<value>")
        return StateSpec.mixed(n, float(arg[2:]))
    if kind == "product":
        factors = []
        with open(arg) as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.split("#", 1)[0].strip()
                if not line:
                    continue
                vals = [float(v) for v in line.split()]
                if len(vals) != 8:
                    raise ParseError(f"{arg}:{lineno}: expected 8 reals per site")
                factors.append(np.array(vals[0::2]).reshape(2, 2)
                               + 1j * np.array(vals[1::2]).reshape(2, 2))
        if len(factors) != n:
            raise ParseError(f"{arg}: {len(factors)} sites for an {n}-qubit circuit")
        return StateSpec.product(factors)
    raise ParseError(f"unknown state spec kind {kind!r}")


@dataclass(frozen=True, slots=True)
class StateEnsemble:
    """A low-average ensemble of input states with purity constant c."""

    kind: str
    n: int
    states: tuple[StateSpec, ...] = ()
    purity_constant: float = 1.0

    @classmethod
    def computational_basis(cls, n: int) -> "StateEnsemble":
        return cls("computational_basis", n, purity_constant=1.0)

    @classmethod
    def fixed_list(cls, states: Sequence[StateSpec], purity_constant: float) -> "StateEnsemble":
        return cls("fixed_list", states[0].n, tuple(states), purity_constant)

    @classmethod
    def single(cls, state: StateSpec, purity_constant: float | None = None) -> "StateEnsemble":
        if purity_constant is None:
            purity_constant = state.purity_c if state.kind == "mixed" else 2.0**state.n
        return cls("single", state.n, (state,), purity_constant)

    def __iter__(self) -> Iterator[StateSpec]:
        if self.kind == "computational_basis":
            for bits in range(2**self.n):
                yield StateSpec.basis("".join(str((bits >> i) & 1) for i in range(self.n)))
        else:
            yield from self.states

    def size(self) -> int:
        return 2**self.n if self.kind == "computational_basis" else len(self.states)

    def mixture_dense(self) -> np.ndarray:
        """Exact dense mixture; used to verify the low-average condition."""
        acc = np.zeros((2**self.n, 2**self.n), dtype=complex)
        count = 0
        for rho in self:
            acc += rho.to_dense()
            count += 1
        return acc / count


def markov_epsilon(eps_tilde: float, delta: float) -> float:
    """Translate a (failure tolerance, probability) pair to an RMS target."""
    return eps_tilde * math.sqrt(delta)


def _approximate_operator(circuit: Circuit, observable: PauliSum, ell: int,
                          algorithm: str, threads: int = 1) -> PauliSum:
    from . import layer_prop, path_sum

    if algorithm == "path_sum":
        return path_sum.truncated_observable(circuit, observable, ell, threads=threads)
    if algorithm == "layer_prop":
        return layer_prop.propagate(circuit, observable, ell, threads=threads).table
    raise ValueError(f"unknown algorithm {algorithm!r}")


def rms_error(ensemble: StateEnsemble, circuit: Circuit, observable: PauliSum, ell: int,
              algorithm: str, cap: int = oracle.DEFAULT_CAP,
              threads: int = 1) -> tuple[float, float]:
    """Measured RMS expectation error over the ensemble, and its bound.

    The bound is sqrt(c) * ||delta O||_F with delta O taken from the dense
    oracle's Heisenberg operator minus the reconstructed approximation.
    """
    approx = _approximate_operator(circuit, observable, ell, algorithm, threads)
    exact = oracle.exact_heisenberg(circuit, observable, cap=cap).mat
    delta = exact - oracle.dense_from_pauli_sum(approx)
    bound = math.sqrt(ensemble.purity_constant) * oracle.frobenius_dense(delta, circuit.n)
    sq = 0.0
    count = 0
    for rho in ensemble:
        approx_val = expectation_of_table(approx, rho)
        exact_val = np.trace(rho.to_dense() @ exact)
        sq += (approx_val - float(exact_val.real)) ** 2
        count += 1
    return math.sqrt(sq / count), bound


def conjugate_circuit(circuit: Circuit, p: PauliString) -> Circuit:
    """Replace every gate U with P_loc^dag U P_loc on its support."""
    if p.n != circuit.n:
        raise DimensionMismatchError(f"Pauli on {p.n} qubits, circuit on {circuit.n}")
    new_layers = []
    for layer in circuit.layers:
        gates = []
        for g in layer.gates:
            codes = [p.code(q) for q in g.qubits]
            if all(c == 0 for c in codes):
                gates.append(g)
                continue
            local = reduce(np.kron, (_SIGMA[c] for c in codes), np.eye(1, dtype=complex))
            gates.append(Gate("unitary", g.qubits, local.conj().T @ g.unitary() @ local))
        new_layers.append(Layer(tuple(gates)))
    return Circuit(circuit.n, tuple(new_layers), circuit.noise)


def random_pauli_conjugated_family(circuit: Circuit) -> Callable:
    """Family {C^P : P uniform Pauli} — spatially disordered by construction."""
    def draw(rng: np.random.Generator) -> Circuit:
        x = int(rng.integers(0, 2**circuit.n))
        z = int(rng.integers(0, 2**circuit.n))
        return conjugate_circuit(circuit, PauliString(circuit.n, x, z))

    return draw


def spatial_disorder_estimate(circuit_family, rho: StateSpec, observable: PauliSum,
                              ell: int, algorithm: str, samples: int, seed: int,
                              cap: int = oracle.DEFAULT_CAP,
                              threads: int = 1) -> tuple[float, float]:
    """Monte-Carlo RMS error over a disordered circuit ensemble, with bound.

    The reported bound is the per-Pauli algorithm bound times the Pauli
    1-norm of the observable.
    """
    if callable(circuit_family):
        rng = np.random.default_rng(seed)
        circuits: Iterable[Circuit] = (circuit_family(rng) for _ in range(samples))
    else:
        circuits = itertools.islice(circuit_family, samples)
    sq = 0.0
    count = 0
    bound_eps = 0.0
    for c in circuits:
        approx = _approximate_operator(c, observable, ell, algorithm, threads)
        approx_val = expectation_of_table(approx, rho)
        exact_val = oracle.exact_expectation(c, rho, observable, cap=cap)
        sq += (approx_val - exact_val) ** 2
        count += 1
        gamma, d = c.noise.gamma, c.depth
        if algorithm == "path_sum":
            # per normalized Pauli; 2.0 is the trivial bound when ell < d
            eps = diagnostics.error_bound_uniform(gamma, d, ell) if ell >= d else 2.0
        else:
            eps = diagnostics.error_bound_gate(gamma, d, ell)
        bound_eps = max(bound_eps, eps)
    rms = math.sqrt(sq / max(count, 1))
    return rms, bound_eps * pauli_l1_norm(observable)
