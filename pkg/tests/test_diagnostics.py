"""Threshold formulas, counting functions, weight profiles and currents."""

import itertools
import math

import numpy as np
import pytest

from corpus import random_circuit, random_observable
from paulipath import diagnostics, oracle
from paulipath.pauli import frobenius_norm


def test_c_gamma_fixed_point():
    c = diagnostics.solve_c_gamma(0.5)
    assert abs(c - 0.5 ** -1 * math.log(math.e * c)) < 1e-9
    assert abs(c - 5.3567) < 1e-3


def test_c_gamma_large_gamma_fallback():
    with pytest.warns(RuntimeWarning):
        assert diagnostics.solve_c_gamma(5.0) == 1.0


def test_choose_ell_uniform_examples():
    assert diagnostics.choose_ell_uniform(0.5, 2, 0.1) == 20
    c = diagnostics.solve_c_gamma(0.5)
    assert diagnostics.choose_ell_uniform(0.5, 3, 1.0) == math.ceil(c * 3)


def test_choose_ell_gate_examples():
    assert diagnostics.choose_ell_gate(0.1, 15, 0.01) == 59
    assert diagnostics.choose_ell_gate(0.5, 3, 10.0) == 1
    assert diagnostics.choose_ell_gate(1.0, 0, math.exp(-3)) == 2


def test_error_bound_uniform_examples():
    assert abs(diagnostics.error_bound_uniform(0.5, 2, 10)
               - math.sqrt(45) * math.exp(-5.5)) < 1e-12
    assert abs(diagnostics.error_bound_uniform(0.5, 2, 10) - 0.027417) < 1e-5
    assert diagnostics.error_bound_uniform(0.3, 0, 4) == pytest.approx(math.exp(-1.5))
    assert diagnostics.error_bound_uniform(0.3, 4, 4) == pytest.approx(math.exp(-1.5))


def test_error_bound_gate_examples():
    assert abs(diagnostics.error_bound_gate(0.1, 3, 9) - 2 * math.exp(-1)) < 1e-12
    assert diagnostics.error_bound_gate(0.0, 3, 5) == 2.0
    assert diagnostics.error_bound_gate(1.0, 0, 40) < 1e-15


def test_choose_ell_meets_bound():
    rng = np.random.default_rng(199)
    for _ in range(50):
        # the c_gamma fixed point is tangent at gamma = 1; stay clear of it
        gamma = float(rng.uniform(0.05, 0.9))
        d = int(rng.integers(0, 30))
        eps = float(rng.uniform(1e-4, 0.5))
        ell_u = diagnostics.choose_ell_uniform(gamma, d, eps)
        if ell_u >= d:
            assert diagnostics.error_bound_uniform(gamma, d, ell_u) <= eps * (1 + 1e-9)
        ell_g = diagnostics.choose_ell_gate(gamma, d, eps)
        if ell_g > math.log(math.sqrt(d + 1) / eps) / gamma - 1:
            assert diagnostics.error_bound_gate(gamma, d, ell_g) <= eps * (1 + 1e-9)


def test_dl_count_examples_and_exhaustive():
    assert diagnostics.dl_count(5, 2) == 106
    assert diagnostics.dl_count(7, 0) == 1
    assert diagnostics.dl_count(2, 2) == 16
    # exhaustive enumeration of Pauli labels for n <= 6
    for n in range(1, 7):
        for ell in range(n + 1):
            count = sum(1 for letters in itertools.product("IXYZ", repeat=n)
                        if sum(ch != "I" for ch in letters) <= ell)
            assert diagnostics.dl_count(n, ell) == count
    # support-level enumeration up to n = 12
    for n in (10, 12):
        for ell in (0, 3, n):
            count = 0
            for k in range(ell + 1):
                for _ in itertools.combinations(range(n), k):
                    count += 3**k
            assert diagnostics.dl_count(n, ell) == count


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def test_composition_count_examples_and_exhaustive():
    assert diagnostics.composition_count(3, 2) == 3
    assert set(_compositions(4, 3)) == {(1, 1, 2), (1, 2, 1), (2, 1, 1)}
    assert diagnostics.composition_count(9, 0) == 1
    assert diagnostics.composition_count(6, 6) == 1
    for ell in range(13):
        for d in range(ell + 1):
            assert diagnostics.composition_count(ell, d) == sum(
                1 for _ in _compositions(ell + 1, d + 1))


def test_depth_threshold_examples():
    assert diagnostics.depth_threshold(0.1, 0.01) == 46
    assert diagnostics.depth_threshold(0.7, math.exp(-0.7)) == 0
    assert diagnostics.depth_threshold(1.0, math.exp(-5)) == 4


def test_sensitivity_gamma_max():
    # round trip: log_chi built from a known gamma_0 inverts back to it
    n, d, eps, gamma0 = 50, 7, 0.02, 0.11
    log_chi = math.log(n) * (math.log(math.sqrt(d + 1) / eps) / gamma0 - 1)
    assert abs(diagnostics.sensitivity_gamma_max(n, d, eps, log_chi) - gamma0) < 1e-12
    # limit: infinite hardness forces gamma -> 0
    assert diagnostics.sensitivity_gamma_max(50, 7, 0.02, 1e12) < 1e-10
    # direct evaluation of the stated formula (the spec example's own
    # arithmetic used ln((d+1)/eps); the formula as stated gives 1.3778e-4)
    val = diagnostics.sensitivity_gamma_max(10**6, 100, 0.01, 10**6 * math.log(2))
    expected = math.log(math.sqrt(101) / 0.01) * math.log(10**6) / (10**6 * math.log(2) + math.log(10**6))
    assert abs(val - expected) < 1e-15
    assert abs(val - 1.3778e-4) < 1e-7


def test_nonunital_prefactor():
    # reduces to the unital bound at d = 0 and dominates it otherwise
    assert diagnostics.error_bound_nonunital_uniform(0.3, 0, 5) == pytest.approx(
        diagnostics.error_bound_uniform(0.3, 0, 5))
    assert (diagnostics.error_bound_nonunital_uniform(0.3, 3, 8)
            >= diagnostics.error_bound_uniform(0.3, 3, 8))


def test_weight_profile_single_damped_pauli():
    from paulipath.circuit import Circuit, NoiseSpec
    from paulipath.pauli import parse_observable

    gamma = 0.23
    c = Circuit(1, (), NoiseSpec("uniform", gamma))
    prof = diagnostics.weight_profile(c, parse_observable("1 Z"))
    assert prof.labels == [("init",), ("readout",)]
    assert abs(prof.p[1, 1] - math.exp(-2 * gamma)) < 1e-12
    assert abs(prof.q[1, 0] - math.exp(-2 * gamma)) < 1e-12
    assert prof.q[1, 0] <= math.exp(-2 * gamma * 1) + 1e-12


def test_weight_profile_noiseless_unitarity():
    rng = np.random.default_rng(211)
    c = random_circuit(rng, 3, 2, "uniform", 0.0)
    obs = random_observable(rng, 3)
    prof = diagnostics.weight_profile(c, obs)
    for s in range(prof.steps):
        assert abs(prof.p[s].sum() - 1.0) < 1e-10


def test_weight_profile_matches_oracle_final():
    rng = np.random.default_rng(223)
    c = random_circuit(rng, 3, 2, "gate_based", 0.25)
    obs = random_observable(rng, 3)
    prof = diagnostics.weight_profile(c, obs)
    h = oracle.exact_heisenberg(c, obs).mat
    coeffs = oracle.pauli_coefficients(h, 3)
    masses = np.bincount(oracle.index_weights(3), weights=np.abs(coeffs) ** 2, minlength=4)
    assert np.abs(prof.p[-1] - masses).max() < 1e-12


def _explicit_current(before: np.ndarray, gate, n: int, w: int) -> float:
    """J(w) from the paper's inner-product formula, via dense projections."""
    weights = oracle.index_weights(n)
    u = oracle.embed_unitary(gate.unitary(), gate.qubits, n)

    def project(mat, wsel):
        coeffs = oracle.pauli_coefficients(mat, n)
        kept = np.where(weights == wsel, coeffs, 0)
        # rebuild the dense operator from the kept coefficients
        out = np.zeros_like(mat)
        idxs = np.flatnonzero(kept)
        from paulipath.oracle import dense_pauli
        from paulipath.pauli import PauliString

        for idx in idxs:
            rest = int(idx)
            x = z = 0
            for site in range(n - 1, -1, -1):
                code = rest & 3
                rest >>= 2
                x |= (0, 1, 1, 0)[code] << site
                z |= (0, 0, 1, 1)[code] << site
            out = out + kept[idx] * dense_pauli(PauliString(n, x, z))
        return out

    def comp(w_from, w_to):
        moved = u.conj().T @ project(before, w_from) @ u
        return project(moved, w_to)

    def ip(a, b):
        return float(np.real(np.trace(a.conj().T @ b))) / 2**n

    o_wm1_w = comp(w - 1, w)
    o_w_w = comp(w, w)
    o_w_wm1 = comp(w, w - 1)
    return ip(o_wm1_w + o_w_w, o_wm1_w + o_w_w) - ip(o_w_w, o_w_w) - ip(o_w_wm1, o_w_wm1)


def test_continuity_current_matches_explicit_formula():
    """Cumulative-difference J equals the inner-product current at gate steps."""
    rng = np.random.default_rng(227)
    n = 3
    c = random_circuit(rng, n, 2, "gate_based", 0.3)
    obs = random_observable(rng, n)
    prof = diagnostics.weight_profile(c, obs)
    steps = list(oracle.heisenberg_noise_steps(c, obs))
    for s, (label, _) in enumerate(steps):
        if label[0] != "gate":
            continue
        before = steps[s - 1][1]
        t, gi = label[1], label[2]
        gate = c.layers[t - 1].gates[gi]
        for w in range(1, n + 1):
            explicit = _explicit_current(before, gate, n, w)
            assert abs(prof.j[s, w] - explicit) < 1e-10


def test_damped_flow_inequality_constants_one():
    """P^(g)(w) <= P^(g-1)(w) + J(w) - J(w+1) at every gate+noise composite."""
    rng = np.random.default_rng(229)
    n = 3
    c = random_circuit(rng, n, 2, "gate_based", 0.3)
    obs = random_observable(rng, n)
    prof = diagnostics.weight_profile(c, obs)
    labels = prof.labels
    for s in range(1, prof.steps):
        if labels[s][0] != "noise":
            continue
        # the composite step: unitary at s-1 (from s-2), then noise at s
        assert labels[s - 1][0] == "gate"
        for w in range(n + 1):
            lhs = prof.p[s, w]
            rhs = prof.p[s - 2, w] + prof.j[s - 1, w] - prof.j[s - 1, w + 1]
            assert lhs <= rhs + 1e-10


def test_lemma2_tail_bound_random_circuits():
    rng = np.random.default_rng(233)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        d = int(rng.integers(1, 4))
        gamma = float(rng.uniform(0.05, 0.6))
        c = random_circuit(rng, n, d, "gate_based", gamma)
        obs = random_observable(rng, n)
        norm_sq = frobenius_norm(obs) ** 2
        prof = diagnostics.weight_profile(c, obs)
        for s in range(1, prof.steps):
            if prof.labels[s][0] == "gate":
                # the lemma's O^(g) includes the gate's trailing noise channel;
                # bare unitaries may transiently exceed the bound
                continue
            for w in range(n + 1):
                assert prof.q[s, w] <= math.exp(-2 * gamma * (w + 1)) * norm_sq + 1e-10
