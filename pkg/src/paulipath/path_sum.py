"""Pauli-path enumeration and summation (the uniform-noise algorithm).

Every Pauli path (P_0, ..., P_d) of total weight sum_t w[P_t] <= ell is
enumerated depth-first from the observable's terms through the layer
transition rows.  Each path contributes

    c_{P_0} * prod_t a_{P_{t-1} P_t} * exp(-gamma * sum_t w[P_t]) * tr(rho P_d).

Branches are explored in descending |amplitude| with canonical-text-order
tie-breaks, and expectation values are reduced per top-level branch (one
starting Pauli, then one first-layer target) in that fixed order, so results
do not depend on the worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator

from .circuit import Circuit
from .engine import _py_text_key, compile_layer
from .errors import NoiseModelError
from .pauli import PauliString, PauliSum
from . import _pykernels


@dataclass(frozen=True, slots=True)
class PauliPath:
    """One Pauli path: operators at every layer boundary, P_0 next to O."""

    sequence: tuple[PauliString, ...]
    amplitude: float
    total_weight: int


def _check_model(circuit: Circuit):
    if circuit.noise.model not in ("uniform", "readout_only"):
        raise NoiseModelError(
            f"path-sum algorithm handles uniform/readout_only noise, got {circuit.noise.model!r}")


class _LayerExpander:
    """Memoized single-Pauli layer transitions, sorted for DFS order."""

    def __init__(self, circuit: Circuit):
        self.n = circuit.n
        self.compiled = [compile_layer(layer, circuit.n) for layer in circuit.layers]
        self.cache: dict[tuple[int, int, int], list] = {}

    def targets(self, t: int, x: int, z: int) -> list[tuple[int, int, float, int]]:
        """Targets (x, z, amplitude, weight) of layer index t, DFS-ordered."""
        key = (t, x, z)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        tx, tz, ta, _ = _pykernels.expand([x], [z], [1.0], self.compiled[t].pygates)
        out = [(xi, zi, ai, (xi | zi).bit_count()) for xi, zi, ai in zip(tx, tz, ta)]
        out.sort(key=lambda e: (-abs(e[2]), _py_text_key(e[0], e[1], self.n)))
        self.cache[key] = out
        return out


def enumerate_paths(circuit: Circuit, observable: PauliSum, ell: int) -> Iterator[PauliPath]:
    """Stream all Pauli paths with total weight <= ell, each exactly once.

    Paths from the identity term carry zero weight at every boundary; paths
    from traceless terms have weight >= 1 per boundary, which prunes any
    branch that cannot stay within the budget.
    """
    _check_model(circuit)
    if ell < 0:
        raise ValueError("ell must be non-negative")
    d = circuit.depth
    exp = _LayerExpander(circuit)
    n = circuit.n

    def descend(t: int, x: int, z: int, amp: float, w_total: int, prefix: tuple):
        if t == d:
            yield PauliPath(prefix, amp, w_total)
            return
        for tx, tz, ta, tw in exp.targets(t, x, z):
            w_next = w_total + tw
            remaining = d - (t + 1) if (tx | tz) else 0
            if w_next + remaining <= ell:
                yield from descend(t + 1, tx, tz, amp * ta, w_next,
                                   prefix + (PauliString(n, tx, tz),))

    for p0, _ in observable:
        w0 = (p0.x | p0.z).bit_count()
        remaining = d if (p0.x | p0.z) else 0
        if w0 + remaining <= ell:
            yield from descend(0, p0.x, p0.z, 1.0, w0, (p0,))


def count_paths(circuit: Circuit, observable: PauliSum, ell: int,
                budget: int | None = None) -> int | None:
    """Number of enumerated paths; None once ``budget`` is exceeded."""
    count = 0
    for _ in enumerate_paths(circuit, observable, ell):
        count += 1
        if budget is not None and count > budget:
            return None
    return count


def _subtree_sum(exp: _LayerExpander, t: int, d: int, x: int, z: int, amp: float,
                 w_total: int, ell: int, leaf) -> float:
    if t == d:
        return leaf(x, z, amp, w_total)
    total = 0.0
    for tx, tz, ta, tw in exp.targets(t, x, z):
        w_next = w_total + tw
        remaining = d - (t + 1) if (tx | tz) else 0
        if w_next + remaining <= ell:
            total += _subtree_sum(exp, t + 1, d, tx, tz, amp * ta, w_next, ell, leaf)
    return total


def _branch_units(circuit: Circuit, observable: PauliSum, ell: int, exp: _LayerExpander):
    """Independent reduction units: one starting Pauli and first-layer target.

    The unit coefficient absorbs the observable coefficient and, for
    read-out-only noise, the start damping exp(-gamma w[P_0]).
    """
    d = circuit.depth
    gamma = circuit.noise.gamma
    uniform = circuit.noise.model == "uniform"
    units = []
    for p0, c0 in observable:
        w0 = (p0.x | p0.z).bit_count()
        remaining = d if (p0.x | p0.z) else 0
        if w0 + remaining > ell:
            continue
        c_eff = c0 if uniform else c0 * math.exp(-gamma * w0)
        if d == 0:
            units.append((c_eff, 0, p0.x, p0.z, 1.0, w0))
            continue
        for tx, tz, ta, tw in exp.targets(0, p0.x, p0.z):
            w1 = w0 + tw
            remaining = d - 1 if (tx | tz) else 0
            if w1 + remaining <= ell:
                units.append((c_eff, 1, tx, tz, ta, w1))
    return units


def expectation_uniform(circuit: Circuit, observable: PauliSum, rho, ell: int,
                        threads: int = 1) -> float:
    """Algorithm-1 expectation estimate sum_paths c_path tr(rho P_d)."""
    from .ensembles import pauli_coefficient

    _check_model(circuit)
    if ell < 0:
        raise ValueError("ell must be non-negative")
    gamma = circuit.noise.gamma
    uniform = circuit.noise.model == "uniform"
    n, d = circuit.n, circuit.depth
    exp = _LayerExpander(circuit)

    def leaf(x: int, z: int, amp: float, w_total: int) -> float:
        coef = pauli_coefficient(rho, PauliString(n, x, z))
        if coef == 0.0:
            return 0.0
        damp = math.exp(-gamma * w_total) if uniform else 1.0
        return amp * damp * coef

    units = _branch_units(circuit, observable, ell, exp)

    def run(unit) -> float:
        c_eff, t, x, z, amp, w = unit
        return c_eff * _subtree_sum(exp, t, d, x, z, amp, w, ell, leaf)

    if threads > 1 and len(units) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, units))
    else:
        parts = [run(u) for u in units]
    total = 0.0
    for v in parts:
        total += v
    return total


def truncated_observable(circuit: Circuit, observable: PauliSum, ell: int,
                         threads: int = 1) -> PauliSum:
    """Reconstruct the truncated operator: damped path contributions on P_d."""
    _check_model(circuit)
    gamma = circuit.noise.gamma
    uniform = circuit.noise.model == "uniform"
    n = circuit.n
    acc: dict[tuple[int, int], float] = {}
    for path in enumerate_paths(circuit, observable, ell):
        p0 = path.sequence[0]
        c0 = observable.coefficient(p0)
        if uniform:
            c = c0 * path.amplitude * math.exp(-gamma * path.total_weight)
        else:
            c = c0 * path.amplitude * math.exp(-gamma * (p0.x | p0.z).bit_count())
        last = path.sequence[-1]
        key = (last.x, last.z)
        acc[key] = acc.get(key, 0.0) + c
    return PauliSum(n, [(PauliString(n, x, z), c) for (x, z), c in acc.items()])
