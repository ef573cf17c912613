"""Seed derivation and uniform-draw sources.

Everything stochastic in this package consumes nothing but uniforms in
[0, 1); Poisson counts, channel choices, and flash coordinates are all
obtained from uniforms by inverse-CDF transforms.  That keeps the
generator-backed simulation path and the pre-committed bit-string path
(deterministic realizations) on a single code path producing the same law.

Per-run seeds are derived from a master seed with SplitMix64:

    seed_i = finalize(master_seed + (i + 1) * 0x9E3779B97F4A7C15  mod 2^64)

where ``finalize`` is the SplitMix64 finalizer (xor-shift/multiply chain).
This exact function is part of the reproducibility contract: archived runs
are replayable from (master_seed, i) alone.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1
_INV_2_32 = 1.0 / (1 << 32)

BITS_PER_UNIFORM = 32


class BitsExhausted(RuntimeError):
    """A bit-driven run asked for more uniforms than its budget holds."""

    def __init__(self, label: str, consumed: int, budget: int):
        self.draw_label = label
        self.consumed = consumed
        self.budget = budget
        super().__init__(
            f"bit budget exhausted at draw {label!r}: "
            f"{consumed} of {budget} bits already consumed"
        )


def splitmix64(value: int) -> int:
    """SplitMix64 finalizer: avalanche a 64-bit value."""
    z = value & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def mix_seed(master_seed: int, index: int) -> int:
    """Derive the seed for run ``index`` from a 64-bit master seed.

    The counter scheme is splittable: distinct indices map to
    statistically independent 64-bit seeds, and the mapping is fixed
    across releases.
    """
    return splitmix64(master_seed + (index + 1) * _GOLDEN)


class GeneratorSource:
    """Uniform source backed by numpy's PCG64, seeded once per run."""

    __slots__ = ("_next",)

    def __init__(self, seed: int):
        self._next = np.random.Generator(np.random.PCG64(seed)).random

    def uniform(self, label: str = "") -> float:
        return self._next()


class BitSource:
    """Uniform source that consumes a pre-committed bit string.

    Each uniform eats ``BITS_PER_UNIFORM`` = 32 bits, mapped MSB-first to
    u = word / 2^32, so resolution is 2^-32.  Once the string is spent,
    further draws raise :class:`BitsExhausted` naming the draw that
    starved.
    """

    __slots__ = ("_words", "_pos", "_n_bits")

    def __init__(self, bits: np.ndarray):
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 1:
            raise ValueError("bits must be a flat array of 0/1")
        if bits.size and bits.max() > 1:
            raise ValueError("bits must contain only 0 and 1")
        self._n_bits = bits.size
        n_words = bits.size // BITS_PER_UNIFORM
        packed = np.packbits(bits[: n_words * BITS_PER_UNIFORM])
        self._words = packed.view(">u4").astype(np.uint64)
        self._pos = 0

    @property
    def bits_consumed(self) -> int:
        return self._pos * BITS_PER_UNIFORM

    def uniform(self, label: str = "") -> float:
        if self._pos >= self._words.size:
            raise BitsExhausted(label, self.bits_consumed, self._n_bits)
        u = float(self._words[self._pos]) * _INV_2_32
        self._pos += 1
        return u


def random_bits(rng: np.random.Generator, n_bits: int) -> np.ndarray:
    """Draw a fair bit string of length ``n_bits`` as a uint8 0/1 array."""
    return rng.integers(0, 2, size=n_bits, dtype=np.uint8)
