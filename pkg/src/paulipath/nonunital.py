"""Random-direction spontaneous-emission noise (the non-unital extension).

Each noise location applies, in the Heisenberg picture,

    A+/-{1} = 1,   A+/-{X} = (1 - gs/2) X,   A+/-{Y} = (1 - gs/2) Y,
    A+/-{Z} = (1 - gs) Z +/- gs 1,

with the emission direction drawn per (layer, qubit) from the circuit seed.
The channel decomposes as A = Atilde o D with D depolarizing at rate
gamma = -ln(1 - gs/2), so both propagation algorithms run unchanged with
Atilde folded into the adjacent layer as an extra weight-lowering map.
Pauli components that fall to the identity mid-circuit contribute constant
offsets carried exactly by the engine (the identity is never truncated).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from . import rng
from .circuit import Circuit
from .engine import apply_layer, compile_emission, compile_layer, table_from_pairs
from .errors import NoiseModelError
from .pauli import COEFF_DROP_TOL, PauliString, PauliSum
from .path_sum import _LayerExpander


def emission_directions(circuit: Circuit) -> tuple[tuple[int, ...], ...]:
    """Directions (+1/-1) per (layer, qubit); layer 0 is the read-out channel.

    Draw index is layer * n + qubit on the stream given by the noise seed,
    so instances are reproducible across platforms.
    """
    n = circuit.n
    seed = circuit.noise.seed
    return tuple(
        tuple(1 if rng.uniform(seed, t * n + q) < 0.5 else -1 for q in range(n))
        for t in range(circuit.depth + 1)
    )


@dataclass(frozen=True, slots=True)
class EmissionAssignment:
    """A fixed emission-direction instance for one circuit."""

    n: int
    gamma_s: float
    seed: int
    directions: tuple[tuple[int, ...], ...]

    @classmethod
    def from_circuit(cls, circuit: Circuit) -> "EmissionAssignment":
        if circuit.noise.model != "nonunital_random":
            raise NoiseModelError("emission assignments require the nonunital_random model")
        return cls(circuit.n, circuit.noise.gamma_s, circuit.noise.seed,
                   emission_directions(circuit))

    @property
    def gamma(self) -> float:
        """Effective depolarizing rate of the D factor."""
        return -math.log(1.0 - self.gamma_s / 2.0)


def emission_heisenberg_action(direction: int, gamma_s: float, letter: str) -> list[tuple[str, float]]:
    """Exact one-site Heisenberg action of the emission channel."""
    if letter == "I":
        return [("I", 1.0)]
    if letter in ("X", "Y"):
        return [(letter, 1.0 - gamma_s / 2.0)]
    if letter == "Z":
        out = [("Z", 1.0 - gamma_s)]
        if gamma_s:
            out.append(("I", gamma_s if direction > 0 else -gamma_s))
        return out
    raise ValueError(f"invalid Pauli letter {letter!r}")


def decompose(gamma_s: float):
    """Split the emission channel as Atilde o (depolarizing at gamma).

    Returns ``(atilde, gamma)`` where ``atilde(direction, letter)`` expands
    the weight-lowering factor and gamma = -ln(1 - gamma_s/2).  The
    composition identity is verified on the one-qubit Pauli basis.
    """
    if not 0 <= gamma_s < 2:
        raise ValueError("gamma_s must lie in [0, 2)")
    gamma = -math.log(1.0 - gamma_s / 2.0)
    keep = (1.0 - gamma_s) / (1.0 - gamma_s / 2.0)
    leak = gamma_s / (1.0 - gamma_s / 2.0)

    def atilde(direction: int, letter: str) -> list[tuple[str, float]]:
        if letter != "Z":
            return [(letter, 1.0)]
        out = [("Z", keep)]
        if gamma_s:
            out.append(("I", leak if direction > 0 else -leak))
        return out

    damp = math.exp(-gamma)
    for direction in (1, -1):
        for letter in "IXYZ":
            composed = {}
            scale = 1.0 if letter == "I" else damp
            for target, coeff in atilde(direction, letter):
                composed[target] = composed.get(target, 0.0) + scale * coeff
            direct = dict(emission_heisenberg_action(direction, gamma_s, letter))
            for key in set(composed) | set(direct):
                if abs(composed.get(key, 0.0) - direct.get(key, 0.0)) > 1e-12:
                    raise AssertionError("emission decomposition identity failed")
    return atilde, gamma


def mean_square_contraction(observable: PauliSum, site: int, gamma_s: float) -> float:
    """E_+/- ||Atilde{O}||_F^2 / ||O||_F^2 for the given site; <= 1 for gs <= 4/7."""
    keep = (1.0 - gamma_s) / (1.0 - gamma_s / 2.0)
    leak = gamma_s / (1.0 - gamma_s / 2.0)
    total = 0.0
    mass_z = 0.0
    for p, c in observable:
        total += c * c
        if p.code(site) == 3:
            mass_z += c * c
    if total == 0.0:
        return 1.0
    return (total - mass_z + (keep * keep + leak * leak) * mass_z) / total


def _check_model(circuit: Circuit):
    if circuit.noise.model != "nonunital_random":
        raise NoiseModelError(
            f"nonunital expectation requires the nonunital_random model, got {circuit.noise.model!r}")


def _expectation_layer_prop(circuit: Circuit, observable: PauliSum, rho, ell: int,
                            assignment: EmissionAssignment, threads: int,
                            backend: str | None) -> float:
    from .ensembles import pauli_coefficient

    n = circuit.n
    gamma = assignment.gamma
    gs = assignment.gamma_s
    pairs = []
    for p, c in observable:
        w = (p.x | p.z).bit_count()
        c = c * math.exp(-gamma * w)
        if w <= ell and abs(c) >= COEFF_DROP_TOL:
            pairs.append((p.x, p.z, c))
    table = table_from_pairs(n, pairs)
    emis0 = compile_emission(n, gs, assignment.directions[0])
    table, _ = apply_layer(table, emis0, 0.0, 0, ell, threads=threads, backend=backend)
    full = (1 << n) - 1
    for t in range(1, circuit.depth + 1):
        clayer = compile_layer(circuit.layers[t - 1], n)
        table, _ = apply_layer(table, clayer, gamma, full, ell, threads=threads, backend=backend)
        emis = compile_emission(n, gs, assignment.directions[t])
        table, _ = apply_layer(table, emis, 0.0, 0, ell, threads=threads, backend=backend)
    total = 0.0
    for p, c in table.to_pauli_sum():
        total += c * pauli_coefficient(rho, p)
    return total


def _expectation_path_sum(circuit: Circuit, observable: PauliSum, rho, ell: int,
                          assignment: EmissionAssignment, threads: int) -> float:
    """DFS over Pauli paths with emission branching between layers.

    Paths whose operator falls to the identity contribute their accumulated
    amplitude immediately (tr(rho 1)/2^n * 2^n = 1); all other paths obey
    sum_t w[P_t] <= ell with the weights taken before each emission map.
    """
    from .ensembles import pauli_coefficient

    n, d = circuit.n, circuit.depth
    gamma = assignment.gamma
    gs = assignment.gamma_s
    keep = (1.0 - gs) / (1.0 - gs / 2.0)
    leak = gs / (1.0 - gs / 2.0)
    exp = _LayerExpander(circuit)
    dirs = assignment.directions

    def after_emission(t: int, x: int, z: int, amp: float, w_total: int) -> float:
        """Branch the Atilde map over the Z-sites of the current Pauli."""
        zsites = [q for q in range(n) if ((z >> q) & 1) and not ((x >> q) & 1)]

        def branch(i: int, zmask: int, a: float) -> float:
            if i == len(zsites):
                return proceed(t, x, zmask, a, w_total)
            q = zsites[i]
            total = branch(i + 1, zmask, a * keep)
            if gs:
                drop = leak if dirs[t][q] > 0 else -leak
                total += branch(i + 1, zmask & ~(1 << q), a * drop)
            return total

        return branch(0, z, amp)

    def proceed(t: int, x: int, z: int, amp: float, w_total: int) -> float:
        if x == 0 and z == 0:
            return amp
        if t == d:
            return amp * pauli_coefficient(rho, PauliString(n, x, z))
        total = 0.0
        for tx, tz, ta, tw in exp.targets(t, x, z):
            w_next = w_total + tw
            if w_next <= ell:
                total += after_emission(t + 1, tx, tz,
                                        amp * ta * math.exp(-gamma * tw), w_next)
        return total

    units = []
    for p0, c0 in observable:
        w0 = (p0.x | p0.z).bit_count()
        if w0 <= ell:
            units.append((c0 * math.exp(-gamma * w0), p0.x, p0.z, w0))

    def run(unit):
        c_eff, x, z, w0 = unit
        return c_eff * after_emission(0, x, z, 1.0, w0)

    if threads > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, units))
    else:
        parts = [run(u) for u in units]
    total = 0.0
    for v in parts:
        total += v
    return total


def expectation_nonunital(circuit: Circuit, observable: PauliSum, rho, ell: int,
                          assignment: EmissionAssignment | None = None,
                          algorithm: str = "layer_prop", threads: int = 1,
                          backend: str | None = None) -> float:
    """Expectation under random-direction emission noise.

    Exact against the non-unital oracle at ell = n (layer propagation) or
    ell = n(d+1) (path sum).
    """
    _check_model(circuit)
    if assignment is None:
        assignment = EmissionAssignment.from_circuit(circuit)
    if algorithm == "layer_prop":
        return _expectation_layer_prop(circuit, observable, rho, ell, assignment,
                                       threads, backend)
    if algorithm == "path_sum":
        return _expectation_path_sum(circuit, observable, rho, ell, assignment, threads)
    raise ValueError(f"unknown algorithm {algorithm!r}")
