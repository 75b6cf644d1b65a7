"""Small numeric helpers: exact/float number handling and seeded RNG derivation."""

from __future__ import annotations

import hashlib
import math
from fractions import Fraction
from typing import Union

import numpy as np

Number = Union[int, float, Fraction]


def as_exact(value: Number) -> Number:
    """Normalize a number: ints (and int-valued strings like "3/4") become
    Fraction, floats stay float. Exactness then propagates through arithmetic
    automatically (Fraction op float -> float)."""
    if isinstance(value, bool):
        raise TypeError("bool is not a model parameter")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return Fraction(value)
    raise TypeError(f"unsupported number type: {type(value).__name__}")


def is_exact(*values: Number) -> bool:
    return all(not isinstance(v, float) for v in values)


def close_rel(a: float, b: float, rel: float = 1e-9) -> bool:
    return math.isclose(a, b, rel_tol=rel, abs_tol=1e-12)


def values_equal(a: Number, b: Number, rel: float = 1e-9) -> bool:
    """Exact equality for exact values, relative tolerance otherwise."""
    if is_exact(a, b):
        return a == b
    return close_rel(float(a), float(b), rel)


def _tag_int(tag) -> int:
    if isinstance(tag, (int, np.integer)):
        return int(tag) & 0xFFFFFFFFFFFFFFFF
    digest = hashlib.sha256(str(tag).encode("utf8")).digest()
    return int.from_bytes(digest[:8], "big")


def derive_seed(seed: int, *tags) -> int:
    """Stable 63-bit seed derived from a master seed and hashable tags."""
    payload = repr((int(seed),) + tuple(_tag_int(t) for t in tags)).encode("utf8")
    return int.from_bytes(hashlib.sha256(payload).digest()[:8], "big") >> 1


def derive_rng(seed: int, *tags) -> np.random.Generator:
    """Counter-based generator keyed by (seed, tags); stable across runs."""
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [_tag_int(t) for t in tags]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
