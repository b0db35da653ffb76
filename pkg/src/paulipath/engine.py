"""Sparse Pauli-table propagation engine shared by both algorithms.

A table holds the coefficients of a Heisenberg- (or Schrödinger-) evolved
operator on Pauli strings, kept in canonical text order.  One engine step
expands every stored Pauli through a layer's transition rows, merges the
contributions target-major, applies depolarizing damping to each merged
target, and truncates weights above the threshold while recording the
truncated Frobenius-squared mass.

The expansion inner loop is the package's hot kernel; it runs either in the
compiled Cython backend or in the pure-Python twin (see ``backend``).  The
merge sums contributions in canonical (target, source) order, so results are
bit-identical across backends, thread counts and chunkings.  Circuits on
more than 64 qubits take a separate big-integer code path.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _pykernels, backend as _backend
from .circuit import Layer
from .conjugation import gate_rows
from .pauli import COEFF_DROP_TOL, X_BIT, Z_BIT, PauliString, PauliSum

_U64_WORD = 64


@dataclass
class Table:
    """Sparse operator table in canonical order (numpy path, n <= 64)."""

    n: int
    xs: np.ndarray
    zs: np.ndarray
    cs: np.ndarray

    def __len__(self) -> int:
        return len(self.cs)

    def to_pauli_sum(self) -> PauliSum:
        return PauliSum(self.n, [(PauliString(self.n, int(x), int(z)), float(c))
                                 for x, z, c in zip(self.xs, self.zs, self.cs)])


class CompiledLayer:
    """Transition rows of one layer, positioned at the actual qubits.

    ``pygates`` feeds the pure backend; the flat arrays feed the kernel.
    Both are built from the same row data.
    """

    def __init__(self, n: int, gates: list[tuple[tuple[int, ...], list[list[tuple[int, int, float]]]]]):
        self.n = n
        self.pygates = []
        for qubits, rows in gates:
            support = 0
            for q in qubits:
                support |= 1 << q
            self.pygates.append((qubits, support, rows))
        if n > _U64_WORD:
            return
        gq0, gq1, gsup = [], [], []
        row_start = np.zeros((len(gates), 16), dtype=np.int64)
        row_len = np.zeros((len(gates), 16), dtype=np.int64)
        rt_x, rt_z, rt_amp = [], [], []
        for gi, (qubits, support, rows) in enumerate(self.pygates):
            gq0.append(qubits[0])
            gq1.append(qubits[1] if len(qubits) == 2 else -1)
            gsup.append(support)
            for local, row in enumerate(rows):
                row_start[gi, local] = len(rt_amp)
                row_len[gi, local] = len(row)
                for px, pz, a in row:
                    rt_x.append(px)
                    rt_z.append(pz)
                    rt_amp.append(a)
        self.gq0 = np.asarray(gq0, dtype=np.int32)
        self.gq1 = np.asarray(gq1, dtype=np.int32)
        self.gsup = np.asarray(gsup, dtype=np.uint64)
        self.row_start = row_start
        self.row_len = row_len
        self.rt_x = np.asarray(rt_x, dtype=np.uint64)
        self.rt_z = np.asarray(rt_z, dtype=np.uint64)
        self.rt_amp = np.asarray(rt_amp, dtype=np.float64)


def _positioned_rows(gate_qubits: tuple[int, ...], raw_rows) -> list[list[tuple[int, int, float]]]:
    """Turn local-code rows into rows of (x, z, amp) masks at real qubits."""
    arity = len(gate_qubits)
    rows = []
    for row in raw_rows:
        placed = []
        for local, amp in row:
            px = pz = 0
            codes = (local,) if arity == 1 else (local >> 2, local & 3)
            for q, code in zip(gate_qubits, codes):
                px |= X_BIT[code] << q
                pz |= Z_BIT[code] << q
            placed.append((px, pz, amp))
        rows.append(placed)
    return rows


def compile_layer(layer: Layer, n: int, schrodinger: bool = False) -> CompiledLayer:
    """Compile a circuit layer's unitary action into expansion rows."""
    gates = []
    for g in layer.gates:
        raw = gate_rows(g, schrodinger)
        gates.append((g.qubits, _positioned_rows(g.qubits, raw)))
    return CompiledLayer(n, gates)


def compile_emission(n: int, gamma_s: float, directions) -> CompiledLayer:
    """Per-qubit emission maps (the weight-lowering part of the channel).

    ``directions[q]`` is +1 or -1.  Z maps to ((1-gs)/(1-gs/2)) Z plus a
    signed identity leak; I, X, Y are fixed.
    """
    keep = (1.0 - gamma_s) / (1.0 - gamma_s / 2.0)
    leak = gamma_s / (1.0 - gamma_s / 2.0)
    gates = []
    for q in range(n):
        drop = leak if directions[q] > 0 else -leak
        rows = [
            [(0, 0, 1.0)],
            [(1 << q, 0, 1.0)],
            [(1 << q, 1 << q, 1.0)],
            [(0, 1 << q, keep), (0, 0, drop)] if gamma_s else [(0, 1 << q, 1.0)],
        ]
        gates.append(((q,), rows))
    return CompiledLayer(n, gates)


def _text_keys(xs: np.ndarray, zs: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Per-element integer keys ordered like the canonical text form."""
    hi = np.zeros(len(xs), dtype=np.uint64)
    lo = np.zeros(len(xs), dtype=np.uint64)
    one = np.uint64(1)
    two = np.uint64(2)
    for i in range(min(n, 32)):
        xb = (xs >> np.uint64(i)) & one
        zb = (zs >> np.uint64(i)) & one
        hi = (hi << two) | (zb << one) | (xb ^ zb)
    for i in range(32, n):
        xb = (xs >> np.uint64(i)) & one
        zb = (zs >> np.uint64(i)) & one
        lo = (lo << two) | (zb << one) | (xb ^ zb)
    return hi, lo


def merge_contributions(tx, tz, amp, src, n: int, gamma: float, damp_mask: int,
                        ell: int) -> tuple[Table, float]:
    """Sum contributions per target, damp, truncate above ``ell``.

    Contributions for one target are summed in canonical source order, so
    the result does not depend on the order they were produced in.
    """
    if len(amp) == 0:
        empty = np.empty(0)
        return Table(n, empty.astype(np.uint64), empty.astype(np.uint64), empty), 0.0
    hi, lo = _text_keys(tx, tz, n)
    order = np.lexsort((src, lo, hi))
    hi, lo, tx, tz, amp = hi[order], lo[order], tx[order], tz[order], amp[order]
    is_start = np.empty(len(amp), dtype=bool)
    is_start[0] = True
    np.logical_or(hi[1:] != hi[:-1], lo[1:] != lo[:-1], out=is_start[1:])
    starts = np.flatnonzero(is_start)
    sums = np.add.reduceat(amp, starts)
    ux, uz = tx[starts], tz[starts]
    usup = ux | uz
    w = np.bitwise_count(usup).astype(np.int64)
    if gamma != 0.0 and damp_mask != 0:
        wd = np.bitwise_count(usup & np.uint64(damp_mask)).astype(np.int64)
        sums = sums * np.exp(-gamma * wd)
    over = w > ell
    mass = float(np.dot(sums[over], sums[over]))
    keep = ~over & (np.abs(sums) >= COEFF_DROP_TOL)
    return Table(n, ux[keep], uz[keep], sums[keep]), mass


def _expand_chunk(table: Table, clayer: CompiledLayer, lo: int, hi: int, which: str):
    xs, zs, cs = table.xs[lo:hi], table.zs[lo:hi], table.cs[lo:hi]
    if which == "compiled":
        tx, tz, amp, src = _backend._kernels.expand(
            xs, zs, cs, clayer.gq0, clayer.gq1, clayer.gsup,
            clayer.row_start, clayer.row_len, clayer.rt_x, clayer.rt_z, clayer.rt_amp)
    else:
        px, pz, pa, ps = _pykernels.expand(xs, zs, cs, clayer.pygates)
        tx = np.asarray(px, dtype=np.uint64)
        tz = np.asarray(pz, dtype=np.uint64)
        amp = np.asarray(pa, dtype=np.float64)
        src = np.asarray(ps, dtype=np.int64)
    return tx, tz, amp, src + lo


def apply_layer(table: Table, clayer: CompiledLayer, gamma: float, damp_mask: int,
                ell: int, threads: int = 1, backend: str | None = None) -> tuple[Table, float]:
    """One engine step: expand, merge, damp, truncate.

    Returns the new table and the truncated Frobenius-squared mass recorded
    after damping.
    """
    which = _backend.active_backend(backend)
    n_src = len(table)
    if threads > 1 and n_src >= 2 * threads:
        bounds = np.linspace(0, n_src, threads + 1, dtype=int)
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda se: _expand_chunk(table, clayer, se[0], se[1], which),
                zip(bounds[:-1], bounds[1:])))
        tx = np.concatenate([p[0] for p in parts])
        tz = np.concatenate([p[1] for p in parts])
        amp = np.concatenate([p[2] for p in parts])
        src = np.concatenate([p[3] for p in parts])
    else:
        tx, tz, amp, src = _expand_chunk(table, clayer, 0, n_src, which)
    return merge_contributions(tx, tz, amp, src, table.n, gamma, damp_mask, ell)


def damp_weights(table: Table, gamma: float, damp_mask: int) -> Table:
    """Multiply every coefficient by exp(-gamma * restricted weight)."""
    if gamma == 0.0 or damp_mask == 0 or len(table) == 0:
        return table
    wd = np.bitwise_count((table.xs | table.zs) & np.uint64(damp_mask)).astype(np.int64)
    return Table(table.n, table.xs, table.zs, table.cs * np.exp(-gamma * wd))


def truncate_table(table: Table, ell: int) -> tuple[Table, float]:
    """Drop weights above ``ell``; returns the kept table and dropped mass."""
    if len(table) == 0:
        return table, 0.0
    w = np.bitwise_count(table.xs | table.zs).astype(np.int64)
    over = w > ell
    mass = float(np.dot(table.cs[over], table.cs[over]))
    keep = ~over & (np.abs(table.cs) >= COEFF_DROP_TOL)
    return Table(table.n, table.xs[keep], table.zs[keep], table.cs[keep]), mass


def table_from_pairs(n: int, pairs) -> Table:
    """Build a canonical-order table from (x, z, coeff) python tuples."""
    pairs = sorted(pairs, key=lambda t: _py_text_key(t[0], t[1], n))
    xs = np.asarray([p[0] for p in pairs], dtype=np.uint64)
    zs = np.asarray([p[1] for p in pairs], dtype=np.uint64)
    cs = np.asarray([p[2] for p in pairs], dtype=np.float64)
    return Table(n, xs, zs, cs)


def _py_text_key(x: int, z: int, n: int) -> int:
    key = 0
    for i in range(n):
        xb = (x >> i) & 1
        zb = (z >> i) & 1
        key = (key << 2) | (zb << 1) | (xb ^ zb)
    return key


# --- big-integer path for n > 64 ------------------------------------------

def apply_layer_big(terms: dict, pygates, n: int, gamma: float, damp_mask: int,
                    ell: int) -> tuple[dict, float]:
    """Dict-based engine step for circuits wider than 64 qubits."""
    contribs = []
    xs = [x for x, _ in terms]
    zs = [z for _, z in terms]
    cs = list(terms.values())
    px, pz, pa, ps = _pykernels.expand(xs, zs, cs, pygates)
    for x, z, a, s in zip(px, pz, pa, ps):
        contribs.append((_py_text_key(x, z, n), s, x, z, a))
    contribs.sort(key=lambda t: (t[0], t[1]))
    out: dict = {}
    mass = 0.0
    i = 0
    while i < len(contribs):
        key, _, x, z, a = contribs[i]
        total = a
        i += 1
        while i < len(contribs) and contribs[i][0] == key:
            total += contribs[i][4]
            i += 1
        sup = x | z
        if gamma != 0.0 and damp_mask != 0:
            total *= math.exp(-gamma * (sup & damp_mask).bit_count())
        if sup.bit_count() > ell:
            mass += total * total
        elif abs(total) >= COEFF_DROP_TOL:
            out[(x, z)] = total
    return out, mass
