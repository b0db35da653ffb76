"""Path enumeration and the uniform-noise expectation algorithm."""

import math

import numpy as np
import pytest

from corpus import random_basis_state, random_circuit, random_observable
from paulipath.circuit import Circuit, Gate, Layer, NoiseSpec
from paulipath.ensembles import StateSpec
from paulipath.errors import NoiseModelError
from paulipath import oracle, path_sum
from paulipath.pauli import PauliString, PauliSum, frobenius_norm, parse_observable


def test_single_path_d0():
    c = Circuit(1, (), NoiseSpec("uniform", 0.0))
    obs = parse_observable("1 Z")
    paths = list(path_sum.enumerate_paths(c, obs, 1))
    assert len(paths) == 1
    assert paths[0].sequence[0].to_label() == "Z"
    assert paths[0].amplitude == 1.0 and paths[0].total_weight == 1


def test_traceless_below_min_weight_is_empty():
    rng = np.random.default_rng(61)
    c = random_circuit(rng, 3, 2, "uniform", 0.1)
    obs = random_observable(rng, 3)
    assert list(path_sum.enumerate_paths(c, obs, c.depth)) == []


def test_t_layer_two_paths():
    c = Circuit(1, (Layer((Gate("T", (0,)),)),), NoiseSpec("uniform", 0.0))
    obs = parse_observable("1 X")
    paths = list(path_sum.enumerate_paths(c, obs, 2))
    assert len(paths) == 2
    by_label = {p.sequence[-1].to_label(): p.amplitude for p in paths}
    assert abs(by_label["X"] - 1 / math.sqrt(2)) < 1e-15
    assert abs(by_label["Y"] + 1 / math.sqrt(2)) < 1e-15


def test_paths_unique_and_monotone_in_ell():
    rng = np.random.default_rng(67)
    c = random_circuit(rng, 3, 2, "uniform", 0.2)
    obs = random_observable(rng, 3)
    seen_prev: set = set()
    for ell in range(c.depth + 1, 9):
        paths = {tuple(p.to_label() for p in path.sequence)
                 for path in path_sum.enumerate_paths(c, obs, ell)}
        all_paths = list(path_sum.enumerate_paths(c, obs, ell))
        assert len(all_paths) == len(paths), "paths must be emitted exactly once"
        assert seen_prev <= paths, "raising ell must never remove paths"
        assert all(p.total_weight <= ell for p in all_paths)
        assert all(p.amplitude != 0 for p in all_paths)
        seen_prev = paths


def test_expectation_examples():
    c = Circuit(1, (), NoiseSpec("uniform", 0.1))
    obs = parse_observable("1 Z")
    val = path_sum.expectation_uniform(c, obs, StateSpec.basis("0"), 1)
    assert abs(val - math.exp(-0.1)) < 1e-12

    rng = np.random.default_rng(71)
    c2 = random_circuit(rng, 3, 2, "uniform", 0.3)
    ident = PauliSum(3, [(PauliString.from_label("III"), 1.0)])
    for ell in (0, 3, 9):
        assert abs(path_sum.expectation_uniform(c2, ident, StateSpec.basis("010"), ell) - 1.0) < 1e-12


def test_exact_at_full_ell_vs_oracle():
    rng = np.random.default_rng(73)
    for model in ("uniform", "readout_only"):
        for _ in range(6):
            n = int(rng.integers(1, 4))
            d = int(rng.integers(0, 3))
            c = random_circuit(rng, n, d, model, float(rng.choice([0.0, 0.1, 0.5])))
            obs = random_observable(rng, n)
            rho = random_basis_state(rng, n)
            approx = path_sum.expectation_uniform(c, obs, rho, n * (d + 1))
            exact = oracle.exact_expectation(c, rho, obs)
            assert abs(approx - exact) < 1e-9


def test_truncated_observable_matches_expectation():
    rng = np.random.default_rng(79)
    c = random_circuit(rng, 3, 2, "uniform", 0.25)
    obs = random_observable(rng, 3)
    for ell in (3, 4, 6):
        table = path_sum.truncated_observable(c, obs, ell)
        for _ in range(4):
            rho = random_basis_state(rng, 3)
            from paulipath.ensembles import expectation_of_table

            assert abs(expectation_of_table(table, rho)
                       - path_sum.expectation_uniform(c, obs, rho, ell)) < 1e-12


def test_truncation_bound_appendix_count():
    """||C^dag O - O_ell||_F <= sqrt(C(ell, d)) e^(-gamma(ell+1)) ||O||_F."""
    rng = np.random.default_rng(83)
    for _ in range(5):
        n = int(rng.integers(2, 4))
        d = int(rng.integers(1, 3))
        gamma = float(rng.uniform(0.1, 0.6))
        c = random_circuit(rng, n, d, "uniform", gamma)
        obs = random_observable(rng, n)
        exact = oracle.exact_heisenberg(c, obs).mat
        for ell in range(d + 1, n * (d + 1) + 1):
            table = path_sum.truncated_observable(c, obs, ell)
            delta = exact - oracle.dense_from_pauli_sum(table)
            bound = math.sqrt(math.comb(ell, d)) * math.exp(-gamma * (ell + 1))
            assert oracle.frobenius_dense(delta, n) <= bound * frobenius_norm(obs) + 1e-10


def test_threads_do_not_change_result():
    rng = np.random.default_rng(89)
    c = random_circuit(rng, 3, 2, "uniform", 0.2)
    obs = random_observable(rng, 3, max_terms=3)
    rho = random_basis_state(rng, 3)
    v1 = path_sum.expectation_uniform(c, obs, rho, 6, threads=1)
    v4 = path_sum.expectation_uniform(c, obs, rho, 6, threads=4)
    assert v1 == v4


def test_model_check():
    c = Circuit(2, (), NoiseSpec("gate_based", 0.1))
    with pytest.raises(NoiseModelError):
        path_sum.expectation_uniform(c, parse_observable("1 ZZ"), StateSpec.basis("00"), 2)


def test_count_paths_budget():
    rng = np.random.default_rng(97)
    c = random_circuit(rng, 2, 2, "uniform", 0.1)
    obs = random_observable(rng, 2)
    full = path_sum.count_paths(c, obs, 6)
    assert full is not None and full > 0
    assert path_sum.count_paths(c, obs, 6, budget=1) is None
