"""Bitstring sampling from truncated Fourier coefficients.

The output distribution of a noisy circuit expands over Z-type Paulis as
p(s) = 2^-n sum_t (-1)^(s.t) tr(Z_t C{rho}).  Keeping only |t| <= ell_s and
estimating each coefficient with one of the expectation backends gives a
quasi-probability q whose marginals are exact partial sums; bits are then
sampled sequentially from clamped, renormalized conditionals.

The sampler is a pure function of (seed, sample index, bit index), so runs
are reproducible; ``induced_distribution`` evaluates the exact distribution
the fix-up procedure induces, for verification against the dense oracle.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import layer_prop, oracle, path_sum, rng
from .circuit import Circuit
from .errors import CapExceededError, NoiseModelError
from .pauli import PauliString, PauliSum

BACKENDS = ("path_sum", "layer_prop", "lightcone_exact", "oracle")

_ZERO_MARGINAL = 1e-12


@dataclass
class FourierTable:
    """Estimates a_t of tr(Z_t C{rho}) for all masks t with |t| <= ell_s."""

    n: int
    ell_s: int
    coeffs: dict[int, float]


def _masks_up_to(n: int, ell_s: int):
    for k in range(min(ell_s, n) + 1):
        for sites in itertools.combinations(range(n), k):
            mask = 0
            for q in sites:
                mask |= 1 << q
            yield mask


def _index_mask(t: int, n: int) -> int:
    """Qubit-indexed mask -> basis-index mask (qubit 0 most significant)."""
    out = 0
    for i in range(n):
        if (t >> i) & 1:
            out |= 1 << (n - 1 - i)
    return out


def _lightcone_expectation(circuit: Circuit, rho, t_mask: int, cap: int) -> float:
    """Exact tr(Z_t C{rho}) by restriction to the light cone of Z_t."""
    from .circuit import Layer
    from .ensembles import StateSpec

    if circuit.noise.model == "nonunital_random":
        raise NoiseModelError("lightcone_exact backend does not handle non-unital noise")
    n = circuit.n
    current = {q for q in range(n) if (t_mask >> q) & 1}
    kept_layers = []
    for layer in circuit.layers:
        kept = []
        for g in layer.gates:
            if any(q in current for q in g.qubits):
                current |= set(g.qubits)
                kept.append(g)
        kept_layers.append(kept)
    cone = sorted(current)
    if len(cone) > cap:
        raise CapExceededError(f"light cone spans {len(cone)} qubits, cap is {cap}")
    relabel = {q: i for i, q in enumerate(cone)}
    m = len(cone)
    layers = tuple(
        Layer(tuple(type(g)(g.kind, tuple(relabel[q] for q in g.qubits), g.matrix)
                    for g in kept))
        for kept in kept_layers)
    sub_circuit = Circuit(m, layers, circuit.noise)
    factors = []
    for q in cone:
        if rho.kind == "product":
            factors.append(rho.factors[q])
        elif rho.kind == "basis":
            b = (rho.bits >> q) & 1
            factors.append(np.diag([1.0 - b, float(b)]).astype(complex))
        else:
            factors.append(np.diag([1.0, 0.0]).astype(complex) if q < rho.bits
                           else np.eye(2, dtype=complex) / 2)
    sub_rho = StateSpec.product(factors)
    z_sub = 0
    for q in range(n):
        if (t_mask >> q) & 1:
            z_sub |= 1 << relabel[q]
    obs = PauliSum(m, [(PauliString(m, 0, z_sub), 1.0)])
    return oracle.exact_expectation(sub_circuit, sub_rho, obs, cap=cap)


def fourier_coefficients(circuit: Circuit, rho, ell_s: int, backend: str = "layer_prop",
                         ell: int | None = None, oracle_cap: int = oracle.DEFAULT_CAP,
                         lightcone_cap: int = 12, threads: int = 1) -> FourierTable:
    """Estimate all a_t = tr(Z_t C{rho}) with |t| <= ell_s.

    ``ell`` is the truncation threshold of the expectation backend (required
    for path_sum/layer_prop).  a_0 is forced to exactly 1: the circuit is
    trace preserving.
    """
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r}; choose from {BACKENDS}")
    if ell_s < 0:
        raise ValueError("ell_s must be non-negative")
    n = circuit.n
    masks = [t for t in _masks_up_to(n, ell_s) if t]

    if backend == "oracle":
        p = oracle.output_distribution(circuit, rho, cap=oracle_cap)
        idx = np.arange(2**n, dtype=np.uint64)

        def estimate(t: int) -> float:
            parity = np.bitwise_count(idx & np.uint64(_index_mask(t, n))) & 1
            return float(np.sum(p * (1.0 - 2.0 * parity.astype(float))))
    elif backend == "lightcone_exact":
        def estimate(t: int) -> float:
            return _lightcone_expectation(circuit, rho, t, lightcone_cap)
    else:
        if ell is None:
            raise ValueError(f"backend {backend!r} requires an ell threshold")

        def estimate(t: int) -> float:
            obs = PauliSum(n, [(PauliString(n, 0, t), 1.0)])
            if backend == "path_sum":
                return path_sum.expectation_uniform(circuit, obs, rho, ell)
            return layer_prop.expectation_gate_noise(circuit, obs, rho, ell)

    if threads > 1 and len(masks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            values = list(pool.map(estimate, masks))
    else:
        values = [estimate(t) for t in masks]
    coeffs = {0: 1.0}
    coeffs.update(zip(masks, values))
    return FourierTable(n, ell_s, coeffs)


def marginal(table: FourierTable, prefix: str) -> float:
    """Exact marginal of q over the first len(prefix) qubits fixed to prefix."""
    k = len(prefix)
    if k > table.n:
        raise ValueError("prefix longer than qubit count")
    y = 0
    for i, ch in enumerate(prefix):
        y |= int(ch) << i
    total = 0.0
    for t, a in table.coeffs.items():
        if t >> k:
            continue
        total += -a if ((t & y).bit_count() & 1) else a
    return total / 2.0**k


def _conditional_zero(table: FourierTable, prefix: str, m: float) -> float:
    """Clamped, renormalized probability that the next bit is 0."""
    m0 = marginal(table, prefix + "0")
    m1 = marginal(table, prefix + "1")
    c0 = min(max(m0 / m, 0.0), 1.0)
    c1 = min(max(m1 / m, 0.0), 1.0)
    s = c0 + c1
    return 0.5 if s <= 0.0 else c0 / s


def sample_from_table(table: FourierTable, seed: int, count: int) -> list[str]:
    """Draw bitstrings by sequential conditional sampling from the table."""
    n = table.n
    out = []
    for k in range(count):
        bits = []
        prefix = ""
        dead = False
        m = marginal(table, "")
        for j in range(n):
            u = rng.uniform(seed, k * n + j)
            if dead or m <= _ZERO_MARGINAL:
                dead = True
                bit = 0 if u < 0.5 else 1
            else:
                p0 = _conditional_zero(table, prefix, m)
                bit = 0 if u < p0 else 1
            bits.append(str(bit))
            prefix += str(bit)
            if not dead:
                m = marginal(table, prefix)
        out.append("".join(bits))
    return out


def sample(circuit: Circuit, rho, ell_s: int, backend: str, seed: int, count: int,
           ell: int | None = None, oracle_cap: int = oracle.DEFAULT_CAP,
           lightcone_cap: int = 12, threads: int = 1) -> list[str]:
    """End-to-end sampler: build the Fourier table, then draw bitstrings."""
    table = fourier_coefficients(circuit, rho, ell_s, backend, ell=ell,
                                 oracle_cap=oracle_cap, lightcone_cap=lightcone_cap,
                                 threads=threads)
    return sample_from_table(table, seed, count)


def induced_distribution(table: FourierTable) -> np.ndarray:
    """Exact distribution of the sampler, indexed like the oracle's output.

    Walks the full binary tree of prefixes, applying the same clamping and
    dead-branch rules as ``sample_from_table``.
    """
    n = table.n
    out = np.zeros(2**n)

    def walk(prefix: str, prob: float, m: float, dead: bool):
        k = len(prefix)
        if k == n:
            idx = 0
            for i, ch in enumerate(prefix):
                idx |= int(ch) << (n - 1 - i)
            out[idx] += prob
            return
        if dead or m <= _ZERO_MARGINAL:
            walk(prefix + "0", prob / 2, 0.0, True)
            walk(prefix + "1", prob / 2, 0.0, True)
            return
        p0 = _conditional_zero(table, prefix, m)
        walk(prefix + "0", prob * p0, marginal(table, prefix + "0"), False)
        walk(prefix + "1", prob * (1 - p0), marginal(table, prefix + "1"), False)

    walk("", 1.0, marginal(table, ""), False)
    return out


def sample_pauli_outcomes(estimate: float, seed: int, count: int) -> list[int]:
    """i.i.d. +-1 outcomes with mean equal to the clamped estimate."""
    est = min(max(estimate, -1.0), 1.0)
    p_plus = (1.0 + est) / 2.0
    return [1 if rng.uniform(seed, i) < p_plus else -1 for i in range(count)]


def collision_alpha(circuit: Circuit, rho, cap: int = oracle.DEFAULT_CAP) -> float:
    """2^n times the collision probability of the pre-read-out distribution."""
    p = oracle.output_distribution(circuit, rho, cap=cap, skip_readout=True)
    return float(2**circuit.n * np.sum(p * p))
