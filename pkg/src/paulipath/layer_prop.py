"""Layerwise truncated Heisenberg propagation (the gate-noise algorithm).

Keeps a sparse table of Pauli coefficients with weight <= ell, updated layer
by layer: conjugate through the layer's gates, damp each merged target by
exp(-gamma * restricted weight), then drop weights above ell while recording
the truncated Frobenius-squared mass.  The same machinery run in the
Schrödinger direction yields the highly-mixed-input state approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .circuit import Circuit
from .engine import (Table, apply_layer, apply_layer_big, compile_layer, damp_weights,
                     table_from_pairs)
from .errors import NoiseModelError
from .pauli import COEFF_DROP_TOL, PauliString, PauliSum

_UNITAL_MODELS = ("uniform", "gate_based", "readout_only")


@dataclass
class PropagationState:
    """Truncated operator table after layer ``layer_index``.

    ``truncated_norms`` holds the d+1 per-step truncated masses
    ||delta O^(t)||_F^2, read-out step first.
    """

    table: PauliSum
    layer_index: int
    truncated_norms: list[float]


def _check_model(circuit: Circuit):
    if circuit.noise.model not in _UNITAL_MODELS:
        raise NoiseModelError(
            f"layer propagation handles unital noise models, got {circuit.noise.model!r}"
            " (use the nonunital module)")


def _damp_mask(circuit: Circuit, t: int) -> int:
    """Support of the depolarizing channel D_t (t = 0 is read-out)."""
    if circuit.noise.gamma == 0.0:
        return 0
    model = circuit.noise.model
    if t == 0:
        return (1 << circuit.n) - 1
    if model == "uniform":
        return (1 << circuit.n) - 1
    if model == "gate_based":
        return circuit.layers[t - 1].noise_support()
    return 0


def _initial_pairs(circuit: Circuit, observable: PauliSum, ell: int):
    """Read-out-damped initial coefficients, split at the weight threshold."""
    gamma = circuit.noise.gamma
    kept = []
    mass = 0.0
    for p, c in observable:
        w = (p.x | p.z).bit_count()
        c = c * math.exp(-gamma * w)
        if w > ell:
            mass += c * c
        elif abs(c) >= COEFF_DROP_TOL:
            kept.append((p.x, p.z, c))
    return kept, mass


def propagate(circuit: Circuit, observable: PauliSum, ell: int, threads: int = 1,
              backend: str | None = None) -> PropagationState:
    """Heisenberg-propagate the observable with per-layer weight truncation."""
    _check_model(circuit)
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n = circuit.n
    gamma = circuit.noise.gamma
    pairs, mass0 = _initial_pairs(circuit, observable, ell)
    masses = [mass0]
    if n <= 64:
        table = table_from_pairs(n, pairs)
        for t in range(1, circuit.depth + 1):
            clayer = compile_layer(circuit.layers[t - 1], n)
            table, mass = apply_layer(table, clayer, gamma, _damp_mask(circuit, t), ell,
                                      threads=threads, backend=backend)
            masses.append(mass)
        final = table.to_pauli_sum()
    else:
        terms = {(x, z): c for x, z, c in pairs}
        for t in range(1, circuit.depth + 1):
            clayer = compile_layer(circuit.layers[t - 1], n)
            terms, mass = apply_layer_big(terms, clayer.pygates, n, gamma,
                                          _damp_mask(circuit, t), ell)
            masses.append(mass)
        final = PauliSum(n, [(PauliString(n, x, z), c) for (x, z), c in terms.items()])
    return PropagationState(final, circuit.depth, masses)


def expectation_gate_noise(circuit: Circuit, observable: PauliSum, rho, ell: int,
                           threads: int = 1, backend: str | None = None) -> float:
    """Algorithm-2 expectation estimate: inner product of the final table with rho."""
    from .ensembles import pauli_coefficient

    state = propagate(circuit, observable, ell, threads=threads, backend=backend)
    total = 0.0
    for p, c in state.table:
        total += c * pauli_coefficient(rho, p)
    return total


def _state_pairs(circuit: Circuit, rho, ell: int):
    """Pauli expansion coefficients tr(rho P)/2^n of the input state, w <= ell."""
    n = circuit.n
    site_codes = []
    for q in range(n):
        codes = []
        for code in range(4):
            val = rho.site_coefficient(q, code) / 2.0
            if val != 0.0:
                codes.append((code, val))
        site_codes.append(codes)
    pairs = []

    def build(q: int, x: int, z: int, c: float, w: int):
        if q == n:
            pairs.append((x, z, c))
            return
        for code, val in site_codes[q]:
            if code == 0:
                build(q + 1, x, z, c * val, w)
            elif w < ell:
                xb = (0, 1, 1, 0)[code] << q
                zb = (0, 0, 1, 1)[code] << q
                build(q + 1, x | xb, z | zb, c * val, w + 1)

    build(0, 0, 0, 1.0, 0)
    kept_sq = sum(c * c for _, _, c in pairs)
    total_sq = rho.purity() / 2**n
    return pairs, max(total_sq - kept_sq, 0.0)


def propagate_state(circuit: Circuit, rho, ell: int, threads: int = 1,
                    backend: str | None = None) -> tuple[PauliSum, list[float]]:
    """Schrödinger-picture truncated propagation of the input state.

    Applies the circuit in forward order D_d, U_d, ..., D_1, U_1, D_0 to the
    state's Pauli table; the identity coefficient 2^-n is never truncated,
    so the approximation keeps unit trace.
    """
    _check_model(circuit)
    if ell < 1:
        raise ValueError("ell must be at least 1")
    n = circuit.n
    gamma = circuit.noise.gamma
    d = circuit.depth
    pairs, mass0 = _state_pairs(circuit, rho, ell)
    masses = [mass0]
    if n <= 64:
        table = table_from_pairs(n, pairs)
        table = damp_weights(table, gamma, _damp_mask(circuit, d))
        for t in range(d, 0, -1):
            clayer = compile_layer(circuit.layers[t - 1], n, schrodinger=True)
            table, mass = apply_layer(table, clayer, gamma, _damp_mask(circuit, t - 1), ell,
                                      threads=threads, backend=backend)
            masses.append(mass)
        return table.to_pauli_sum(), masses
    mask = _damp_mask(circuit, d)
    terms = {}
    for x, z, c in pairs:
        if gamma != 0.0 and mask != 0:
            c *= math.exp(-gamma * ((x | z) & mask).bit_count())
        terms[(x, z)] = c
    for t in range(d, 0, -1):
        clayer = compile_layer(circuit.layers[t - 1], n, schrodinger=True)
        terms, mass = apply_layer_big(terms, clayer.pygates, n, gamma,
                                      _damp_mask(circuit, t - 1), ell)
        masses.append(mass)
    return PauliSum(n, [(PauliString(n, x, z), c) for (x, z), c in terms.items()]), masses


def approximate_state(circuit: Circuit, rho, ell: int, threads: int = 1,
                      backend: str | None = None) -> PauliSum:
    """Pauli table of the approximated output state (coefficients tr(rho P)/2^n)."""
    table, _ = propagate_state(circuit, rho, ell, threads=threads, backend=backend)
    return table
