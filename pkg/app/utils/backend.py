"""Integer backend selection.

Python ints carry every mantissa. When gmpy2 is importable its integer
square root is used for the certified roots, which dominate distance
evaluations at high precision.
"""
from __future__ import annotations

import math

try:
    import gmpy2
except ImportError:  # pragma: no cover - depends on the environment
    gmpy2 = None

BACKEND = "gmpy" if gmpy2 is not None else "python"


def isqrt(value: int) -> int:
    if value < 0:
        raise ValueError("isqrt of a negative integer")
    if gmpy2 is not None:
        return int(gmpy2.isqrt(value))
    return math.isqrt(value)
