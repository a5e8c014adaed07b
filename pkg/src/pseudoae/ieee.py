"""Binary32 bit-pattern conversion and a differential check against hardware.

Only zeros and normal numbers are handled; the engine has no infinities,
NaNs or subnormals. Hardware results come from numpy ``float32`` arithmetic,
which rounds to nearest-even.
"""

from __future__ import annotations

import gc
from contextlib import contextmanager
from dataclasses import dataclass
from functools import partial
from itertools import repeat
from typing import Iterator
from operator import ne

import numpy as np

from .softfloat import FloatFormat, FloatValue, add, make, mul, sub

BINARY32 = FloatFormat.binary32()

_OPS = {"add": (add, np.add), "sub": (sub, np.subtract), "mul": (mul, np.multiply)}


def from_binary32_bits(bits: int) -> FloatValue:
    sign = bits >> 31 & 1
    biased = bits >> 23 & 0xFF
    frac = bits & 0x7FFFFF
    if biased == 0:
        if frac:
            raise ValueError(f"subnormal binary32 {bits:#010x} is not supported")
        return make(False, 0, 0, BINARY32)
    if biased == 0xFF:
        raise ValueError(f"binary32 {bits:#010x} is infinite or NaN")
    return make(bool(sign), frac | 1 << 23, biased - 150, BINARY32)


def to_binary32_bits(v: FloatValue) -> int:
    if v.radix != 2:
        raise ValueError("binary32 needs radix 2")
    if not v.significand:
        return 0
    width = v.significand.bit_length()
    if width > 24:
        raise ValueError(f"{v!r} has more than 24 significant bits")
    biased = v.exponent + width - 1 + 127
    if not 1 <= biased <= 254:
        raise ValueError(f"{v!r} is outside the binary32 normal range")
    frac = (v.significand << (24 - width)) & 0x7FFFFF
    return (int(v.negative) << 31) | (biased << 23) | frac


def _decompose(bits: np.ndarray) -> Iterator[tuple[bool, int, int, int]]:
    """Vectorized :func:`from_binary32_bits` for zeros and normals."""
    bits = bits.astype(np.int64)
    biased = (bits >> 23) & 0xFF
    if np.any(biased == 0xFF) or np.any((biased == 0) & ((bits & 0x7FFFFF) != 0)):
        raise ValueError("array holds values outside the zero/normal range")
    zero = biased == 0
    sig = (bits & 0x7FFFFF) | (1 << 23)
    low = sig & -sig
    tz = np.log2(low.astype(np.float64)).astype(np.int64)
    sig = np.where(zero, 0, sig >> tz)
    exp = np.where(zero, 0, biased - 150 + tz)
    neg = ((bits >> 31) & 1).astype(bool) & ~zero
    return zip(neg.tolist(), sig.tolist(), exp.tolist(), repeat(2))


def random_normal_bits(rng: np.random.Generator, count: int, max_exponent: int = 60) -> np.ndarray:
    """Random binary32 patterns with unbiased exponent in ``[-max, max]``."""
    sign = rng.integers(0, 2, count, dtype=np.uint32)
    biased = rng.integers(127 - max_exponent, 127 + max_exponent + 1, count, dtype=np.uint32)
    frac = rng.integers(0, 1 << 23, count, dtype=np.uint32)
    return (sign << 31) | (biased << 23) | frac


@contextmanager
def _gc_paused():
    # millions of acyclic tuples; cyclic collection passes only cost time here
    enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if enabled:
            gc.enable()


@dataclass(frozen=True)
class DifferentialReport:
    count: int
    seed: int
    checked: int
    mismatches: int
    first_mismatch: tuple[str, int, int] | None = None  # (op, a bits, b bits)


def differential(count: int, seed: int, ops: tuple[str, ...] = ("add", "sub", "mul")) -> DifferentialReport:
    """Compare the engine at binary32/RNE with hardware on random operand pairs.

    Operand exponents are kept within +-60 so every sum, difference and
    product stays in the normal range.
    """
    with _gc_paused():
        return _differential(count, seed, ops)


def _differential(count: int, seed: int, ops: tuple[str, ...]) -> DifferentialReport:
    rng = np.random.default_rng(seed)
    a_bits = random_normal_bits(rng, count)
    b_bits = random_normal_bits(rng, count)
    a32 = a_bits.view(np.float32)
    b32 = b_bits.view(np.float32)
    as_value = partial(tuple.__new__, FloatValue)
    a_vals = list(map(as_value, _decompose(a_bits)))
    b_vals = list(map(as_value, _decompose(b_bits)))
    fmt = BINARY32
    checked = mismatches = 0
    first = None
    for name in ops:
        soft, hard = _OPS[name]
        expected = _decompose(hard(a32, b32).view(np.uint32))
        diffs = list(map(ne, map(soft, a_vals, b_vals, repeat(fmt, count)), expected))
        checked += count
        bad = diffs.count(True)
        if bad and first is None:
            i = diffs.index(True)
            first = (name, int(a_bits[i]), int(b_bits[i]))
        mismatches += bad
    return DifferentialReport(count, seed, checked, mismatches, first)
