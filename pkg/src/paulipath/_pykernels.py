"""Pure-Python twin of the compiled layer-expansion kernel.

Expands every stored Pauli through the transition rows of one circuit layer
and emits raw (unmerged, undamped) contributions.  The combination order and
the multiplication chain per contribution match ``_kernels.pyx`` exactly, so
the two backends produce bit-identical tables after the shared merge.
"""

from __future__ import annotations


def expand(xs, zs, cs, pygates):
    """Expand sources through a layer.

    Parameters are parallel lists/arrays of source masks and coefficients,
    plus the compiled layer's python-side gate list: ``(qubits, support,
    rows)`` with ``rows[local] = [(pat_x, pat_z, amp), ...]`` already
    positioned at the gate's qubits.

    Returns four python lists: target x/z masks, contribution amplitudes,
    and source indices.
    """
    out_x: list[int] = []
    out_z: list[int] = []
    out_a: list[float] = []
    out_s: list[int] = []
    for i in range(len(cs)):
        x = int(xs[i])
        z = int(zs[i])
        c = float(cs[i])
        sup = x | z
        active = []
        base_x, base_z = x, z
        for qubits, gsup, rows in pygates:
            if sup & gsup:
                local = 0
                for q in qubits:
                    bits = ((x >> q) & 1) | (((z >> q) & 1) << 1)
                    local = (local << 2) | (0, 1, 3, 2)[bits]
                active.append(rows[local])
                base_x &= ~gsup
                base_z &= ~gsup
        k = len(active)
        if k == 0:
            out_x.append(x)
            out_z.append(z)
            out_a.append(c)
            out_s.append(i)
            continue
        sel = [0] * k
        while True:
            tx, tz, amp = base_x, base_z, c
            for j in range(k):
                px, pz, a = active[j][sel[j]]
                tx |= px
                tz |= pz
                amp *= a
            out_x.append(tx)
            out_z.append(tz)
            out_a.append(amp)
            out_s.append(i)
            pos = k - 1
            while pos >= 0 and sel[pos] == len(active[pos]) - 1:
                sel[pos] = 0
                pos -= 1
            if pos < 0:
                break
            sel[pos] += 1
    return out_x, out_z, out_a, out_s
