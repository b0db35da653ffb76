"""Selection between the compiled expansion kernel and its pure-Python twin.

The compiled kernel (``paulipath._kernels``, built from Cython) handles the
hot per-layer table expansion for circuits with up to 64 qubits.  If the
extension is missing, or ``PAULIPATH_PURE`` is set to a non-empty value
other than "0", the pure-Python twin is used instead.  Both produce
bit-identical tables; ``paulipath bench`` compares their speed.
"""

from __future__ import annotations

import os

try:
    from . import _kernels  # type: ignore[attr-defined]

    HAVE_COMPILED = True
except ImportError:  # pragma: no cover - depends on the build
    _kernels = None
    HAVE_COMPILED = False


def _force_pure() -> bool:
    return os.environ.get("PAULIPATH_PURE", "0") not in ("", "0")


def active_backend(override: str | None = None) -> str:
    """Resolve the expansion backend: 'compiled' or 'pure'."""
    if override is not None:
        if override not in ("compiled", "pure"):
            raise ValueError(f"unknown backend {override!r}")
        if override == "compiled" and not HAVE_COMPILED:
            raise RuntimeError("compiled kernel requested but not built")
        return override
    if _force_pure() or not HAVE_COMPILED:
        return "pure"
    return "compiled"
