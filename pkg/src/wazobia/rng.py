"""Deterministic pseudo-randomness for shuffles, splits, and weight init.

All stochastic behaviour in the toolkit flows through SplitMix64 (Steele,
Lea & Flood's 64-bit mixer, the same update/mix constants used by
``java.util.SplittableRandom``).  The algorithm is tiny, has no platform-
or library-dependent state, and is therefore reproducible bit-for-bit
anywhere, which the training determinism contract requires.

Stream definition, given seed ``s`` (any unsigned 64-bit integer):

    state_0 = s
    state_{n+1} = (state_n + 0x9E3779B97F4A7C15) mod 2^64
    output_n = mix(state_{n+1})  where mix is the two-round xor-shift
               multiply with constants 0xBF58476D1CE4E5B9, 0x94D049BB133111EB

Derived helpers:

  * ``next_below(n)``: unbiased integer in [0, n) via rejection sampling.
  * ``next_float()``: top 53 bits mapped to [0, 1).
  * ``shuffle(xs)``: in-place Fisher-Yates, iterating i = len-1 .. 1 and
    swapping with j = next_below(i + 1).
"""

from __future__ import annotations

from typing import Any, List

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream; see module docstring for the exact algorithm."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        """Unbiased draw from [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = _MASK64 + 1 - ((_MASK64 + 1) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def next_float(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * (2.0 ** -53)

    def next_uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.next_float()

    def shuffle(self, xs: List[Any]) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(xs) - 1, 0, -1):
            j = self.next_below(i + 1)
            xs[i], xs[j] = xs[j], xs[i]
