"""Counter-based random number generation.

Every random draw in the package is a pure function of ``(seed, index)``,
computed with the SplitMix64 finalizer.  This makes samplers reproducible
across platforms and trivially parallelizable: draw ``k`` of a stream never
depends on draws ``0..k-1`` having been consumed.
"""

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def raw64(seed: int, index: int) -> int:
    """SplitMix64 output for counter ``index`` of the stream ``seed``."""
    z = (seed + (index + 1) * _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
    return z ^ (z >> 31)


def uniform(seed: int, index: int) -> float:
    """Uniform variate in [0, 1) for draw ``index`` of stream ``seed``."""
    return raw64(seed, index) / 2.0**64
