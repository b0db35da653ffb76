"""Threshold selection, error-bound formulas, counts and weight profiling.

All logarithms are natural.  The closed-form bounds here are the quantities
the test suite verifies against the dense oracle; the profiling entry point
tracks the operator weight distribution P(w), its cumulative tail Q(w) and
the inter-weight current J(w) at gate/noise-step granularity.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import oracle
from .circuit import Circuit
from .pauli import PauliSum


def solve_c_gamma(gamma: float, tol: float = 1e-10, max_iter: int = 200) -> float:
    """Larger fixed point of c = ln(e*c)/gamma, by iteration from max(e, 1/gamma).

    The iteration converges to the larger of the two roots, which is the one
    that makes the binomial bound close.  For gamma > 1 no root >= 1 exists;
    c = 1 is returned with a warning (any c >= 1 then satisfies the required
    inequality direction).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    c = max(math.e, 1.0 / gamma)
    for _ in range(max_iter):
        arg = math.e * c
        if arg <= 0:
            break
        nxt = math.log(arg) / gamma
        if nxt <= 0:
            break
        if abs(nxt - c) < tol:
            return nxt
        c = nxt
    warnings.warn(f"c_gamma fixed point did not converge for gamma={gamma}; using 1",
                  RuntimeWarning, stacklevel=2)
    return 1.0


def choose_ell_uniform(gamma: float, d: int, epsilon: float) -> int:
    """Threshold for the path-sum algorithm: ceil(c_gamma*d + 2 ln(1/eps)/gamma)."""
    if not 0 < epsilon <= 1:
        raise ValueError("epsilon must lie in (0, 1]")
    c = solve_c_gamma(gamma)
    return math.ceil(c * d + 2.0 / gamma * math.log(1.0 / epsilon))


def choose_ell_gate(gamma: float, d: int, epsilon: float) -> int:
    """Threshold for layer propagation: ceil(ln(sqrt(d+1)/eps)/gamma - 1), >= 1."""
    if gamma <= 0 or epsilon <= 0:
        raise ValueError("gamma and epsilon must be positive")
    ell = math.ceil(math.log(math.sqrt(d + 1) / epsilon) / gamma - 1.0)
    return max(ell, 1)


def error_bound_uniform(gamma: float, d: int, ell: int) -> float:
    """Frobenius-relative bound sqrt(C(ell, d)) * exp(-gamma (ell+1))."""
    if not ell >= d >= 0:
        raise ValueError("requires ell >= d >= 0")
    return math.sqrt(math.comb(ell, d)) * math.exp(-gamma * (ell + 1))


def error_bound_gate(gamma: float, d: int, ell: int) -> float:
    """Frobenius-relative bound sqrt(d+1) * exp(-gamma (ell+1))."""
    if ell < 1:
        raise ValueError("requires ell >= 1")
    return math.sqrt(d + 1) * math.exp(-gamma * (ell + 1))


def error_bound_nonunital_uniform(gamma: float, d: int, ell: int) -> float:
    """Path-sum bound under non-unital noise: prefactor sum_t C(ell, t).

    Paths may fall to the identity mid-circuit, enlarging the truncation
    count from C(ell, d) to sum_{t=0}^{d} C(ell, t).
    """
    if not ell >= d >= 0:
        raise ValueError("requires ell >= d >= 0")
    pref = sum(math.comb(ell, t) for t in range(d + 1))
    return math.sqrt(pref) * math.exp(-gamma * (ell + 1))


def dl_count(n: int, ell: int) -> int:
    """Number of n-qubit Paulis of weight <= ell: sum_k C(n,k) 3^k."""
    if not 0 <= ell <= n:
        raise ValueError("requires 0 <= ell <= n")
    return sum(math.comb(n, k) * 3**k for k in range(ell + 1))


def composition_count(ell: int, d: int) -> int:
    """Compositions of ell+1 into d+1 positive parts: C(ell, d)."""
    if not ell >= d >= 0:
        raise ValueError("requires ell >= d >= 0")
    return math.comb(ell, d)


def depth_threshold(gamma: float, epsilon: float) -> int:
    """Smallest depth d with exp(-gamma (d+1)) <= epsilon."""
    if gamma <= 0 or not 0 < epsilon < 1:
        raise ValueError("requires gamma > 0 and epsilon in (0, 1)")
    # the 1e-12 slack keeps exact boundaries (epsilon = e^-gamma(k+1)) stable
    return max(0, math.ceil(math.log(1.0 / epsilon) / gamma - 1.0 - 1e-12))


def sensitivity_gamma_max(n: int, d: int, epsilon: float, log_chi: float) -> float:
    """Largest noise rate compatible with classical hardness chi.

    Explicit-constant inversion of the quasi-polynomial runtime
    n^(ln(sqrt(d+1)/eps)/gamma - 1) >= chi:

        gamma_max = ln(sqrt(d+1)/eps) * ln(n) / (ln(chi) + ln(n)).

    ``log_chi`` is the natural log of the runtime lower bound.
    """
    if n <= 1 or epsilon <= 0 or log_chi <= 0:
        raise ValueError("requires n > 1, epsilon > 0, log_chi > 0")
    return math.log(math.sqrt(d + 1) / epsilon) * math.log(n) / (log_chi + math.log(n))


@dataclass
class WeightProfile:
    """Per-step weight distributions of a Heisenberg-evolved observable.

    ``p[s, w]`` is the Frobenius-squared mass on weight-w Paulis after step
    s, ``q[s, w] = sum_{w' > w} p[s, w']`` the cumulative tail, and
    ``j[s, w] = q[s, w-1] - q[s-1, w-1]`` the flow into weights >= w during
    step s (the continuity current at unitary steps).
    """

    n: int
    labels: list[tuple]
    p: np.ndarray
    q: np.ndarray
    j: np.ndarray

    @property
    def steps(self) -> int:
        return len(self.labels)


def weight_profile(circuit: Circuit, observable: PauliSum,
                   cap: int = oracle.DEFAULT_CAP) -> WeightProfile:
    """Exact gate-by-gate weight distribution via the dense oracle.

    Noise applications count as their own steps, so the weight-tail bound
    can be checked after every channel, not only at layer ends.
    """
    n = circuit.n
    weights = oracle.index_weights(n)
    labels = []
    rows = []
    for label, mat in oracle.heisenberg_noise_steps(circuit, observable, cap=cap):
        coeffs = oracle.pauli_coefficients(mat, n)
        mass = np.abs(coeffs) ** 2
        rows.append(np.bincount(weights, weights=mass, minlength=n + 1))
        labels.append(label)
    p = np.asarray(rows)
    # q[s, w] = sum_{w' >= w+1} p[s, w']; pad so q[s, n] = 0
    q = np.concatenate([np.cumsum(p[:, ::-1], axis=1)[:, ::-1][:, 1:],
                        np.zeros((len(labels), 1))], axis=1)
    j = np.zeros((len(labels), n + 2))
    j[1:, 1:n + 2] = q[1:, 0:n + 1] - q[:-1, 0:n + 1]
    return WeightProfile(n, labels, p, q, j)
