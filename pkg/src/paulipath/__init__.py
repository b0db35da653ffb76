"""Truncated Pauli-path simulation of noisy quantum circuits.

Computes observable expectation values by Heisenberg propagation in the
Pauli basis with weight truncation, samples output bitstrings under
anti-concentration, and verifies its own error bounds against a dense
brute-force oracle at small qubit counts.
"""

from .backend import HAVE_COMPILED, active_backend
from .pauli import (
    PauliString,
    PauliSum,
    Phase,
    anticommutes,
    format_observable,
    frobenius_norm,
    multiply,
    parse_observable,
    pauli_l1_norm,
    weight,
)
from .circuit import (
    Circuit,
    Gate,
    Layer,
    NoiseSpec,
    circuits_equal,
    format_circuit,
    gate_weight,
    light_cone,
    parse_circuit,
    validate,
)

__version__ = "0.1.0"
