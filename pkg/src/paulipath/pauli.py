"""Bit-packed Pauli strings and sparse real Pauli sums.

A Pauli string on ``n`` qubits is stored as two integer bit masks: bit ``i``
of ``x``/``z`` holds the X/Z component on qubit ``i``.  The per-site letter is
decoded as (x, z) = (0,0) -> I, (1,0) -> X, (1,1) -> Y, (0,1) -> Z, and the
canonical text form lists qubit 0 leftmost.

The product convention is fixed project-wide as X*Z = -i*Y per site, with
phases multiplying across sites.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .errors import DimensionMismatchError, ParseError

LETTERS = "IXYZ"

# letter code (index into LETTERS) from the 2-bit pattern x + 2z
_CODE_OF_BITS = (0, 1, 3, 2)
# (x, z) bits of each letter code
X_BIT = (0, 1, 1, 0)
Z_BIT = (0, 0, 1, 1)

# _PHASE_EXP[a][b] = k such that letter_a * letter_b = i^k * letter_(a xor b in bits)
_PHASE_EXP = (
    (0, 0, 0, 0),
    (0, 0, 1, 3),
    (0, 3, 0, 1),
    (0, 1, 3, 0),
)

COEFF_DROP_TOL = 1e-15


@dataclass(frozen=True, slots=True)
class PauliString:
    """An n-qubit Pauli operator as an (x, z) bit-mask pair."""

    n: int
    x: int
    z: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("qubit count must be non-negative")
        mask = (1 << self.n) - 1
        if (self.x & ~mask) or (self.z & ~mask):
            raise ValueError("mask bits set beyond qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse canonical text form, qubit 0 leftmost."""
        x = z = 0
        for i, ch in enumerate(label):
            try:
                code = LETTERS.index(ch.upper())
            except ValueError:
                raise ParseError(f"invalid Pauli letter {ch!r} in {label!r}") from None
            x |= X_BIT[code] << i
            z |= Z_BIT[code] << i
        return cls(len(label), x, z)

    @classmethod
    def single(cls, n: int, qubit: int, letter: str) -> "PauliString":
        """One non-identity letter at ``qubit``, identities elsewhere."""
        code = LETTERS.index(letter.upper())
        return cls(n, X_BIT[code] << qubit, Z_BIT[code] << qubit)

    def code(self, qubit: int) -> int:
        """Letter code (0..3 = I, X, Y, Z) at ``qubit``."""
        return _CODE_OF_BITS[((self.x >> qubit) & 1) | (((self.z >> qubit) & 1) << 1)]

    def to_label(self) -> str:
        return "".join(LETTERS[self.code(i)] for i in range(self.n))

    @property
    def support(self) -> int:
        """Bit mask of non-identity sites."""
        return self.x | self.z

    def __str__(self) -> str:
        return self.to_label()


def weight(p: PauliString) -> int:
    """Number of non-identity sites of ``p``."""
    return (p.x | p.z).bit_count()


def canonical_key(p: PauliString) -> int:
    """Integer whose ordering matches lexicographic order of ``to_label()``."""
    key = 0
    for i in range(p.n):
        key = (key << 2) | p.code(i)
    return key


@dataclass(frozen=True, slots=True)
class Phase:
    """A fourth root of unity i**k, closed under multiplication."""

    k: int

    def __post_init__(self):
        object.__setattr__(self, "k", self.k & 3)

    @property
    def value(self) -> complex:
        return (1, 1j, -1, -1j)[self.k]

    def __mul__(self, other: "Phase") -> "Phase":
        return Phase(self.k + other.k)

    def __repr__(self) -> str:
        return ("+1", "+i", "-1", "-i")[self.k]


def multiply(p: PauliString, q: PauliString) -> tuple[Phase, PauliString]:
    """Product p*q as (phase, Pauli) with the X*Z = -i*Y convention."""
    if p.n != q.n:
        raise DimensionMismatchError(f"qubit counts differ: {p.n} != {q.n}")
    k = 0
    both = (p.x | p.z) & (q.x | q.z)
    while both:
        i = (both & -both).bit_length() - 1
        k += _PHASE_EXP[p.code(i)][q.code(i)]
        both &= both - 1
    return Phase(k), PauliString(p.n, p.x ^ q.x, p.z ^ q.z)


def anticommutes(p: PauliString, q: PauliString) -> int:
    """1 if p and q anticommute, 0 if they commute."""
    if p.n != q.n:
        raise DimensionMismatchError(f"qubit counts differ: {p.n} != {q.n}")
    return ((p.x & q.z).bit_count() + (p.z & q.x).bit_count()) & 1


class PauliSum:
    """Sparse real linear combination of Pauli strings, O = sum_P c_P P.

    Represents Hermitian operators only; coefficients must be real and
    finite, and entries with |c| < 1e-15 are dropped.  Terms are kept in
    canonical text order so iteration is deterministic.
    """

    __slots__ = ("n", "terms")

    def __init__(self, n: int, terms: Mapping[PauliString, float] | Iterable[tuple[PauliString, float]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        cleaned = {}
        for p, c in items:
            if p.n != n:
                raise DimensionMismatchError(f"term on {p.n} qubits in {n}-qubit sum")
            if isinstance(c, complex):
                if abs(c.imag) > 1e-12:
                    raise ValueError(f"non-real coefficient {c} for {p}")
                c = c.real
            c = float(c)
            if c != c or c in (float("inf"), float("-inf")):
                raise ValueError(f"non-finite coefficient for {p}")
            if abs(c) < COEFF_DROP_TOL:
                continue
            cleaned[p] = cleaned.get(p, 0.0) + c
        self.n = n
        self.terms = dict(sorted(cleaned.items(), key=lambda kv: canonical_key(kv[0])))

    def __iter__(self) -> Iterator[tuple[PauliString, float]]:
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        return isinstance(other, PauliSum) and self.n == other.n and self.terms == other.terms

    def coefficient(self, p: PauliString) -> float:
        return self.terms.get(p, 0.0)

    def __repr__(self) -> str:
        body = " + ".join(f"{c:g}*{p}" for p, c in self) or "0"
        return f"PauliSum({self.n}: {body})"


def frobenius_norm(op: PauliSum) -> float:
    """Normalized Frobenius norm sqrt(tr(O^2)/2^n) = sqrt(sum c_P^2)."""
    return sum(c * c for _, c in op) ** 0.5


def pauli_l1_norm(op: PauliSum) -> float:
    """Pauli 1-norm, sum |c_P|."""
    return sum(abs(c) for _, c in op)


def parse_observable(text: str, n: int | None = None) -> PauliSum:
    """Parse the observable text format: one `<coefficient> <letters>` per line.

    Blank lines and ``#`` comments are ignored.  All terms must act on the
    same number of qubits; ``n`` pins the expected count when given.
    """
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise ParseError(f"line {lineno}: expected '<coefficient> <paulis>', got {raw!r}")
        try:
            coeff = float(fields[0])
        except ValueError:
            raise ParseError(f"line {lineno}: bad coefficient {fields[0]!r}") from None
        p = PauliString.from_label(fields[1])
        if n is not None and p.n != n:
            raise ParseError(f"line {lineno}: term on {p.n} qubits, expected {n}")
        if pairs and pairs[0][0].n != p.n:
            raise ParseError(f"line {lineno}: inconsistent qubit counts")
        pairs.append((p, coeff))
    if not pairs:
        if n is None:
            raise ParseError("empty observable and no qubit count given")
        return PauliSum(n)
    return PauliSum(pairs[0][0].n, pairs)


def format_observable(op: PauliSum) -> str:
    """Inverse of parse_observable; coefficients use repr round-tripping."""
    lines = [f"{c!r} {p}" for p, c in op]
    return "\n".join(lines) + ("\n" if lines else "")
