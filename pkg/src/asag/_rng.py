"""Deterministic random primitives used everywhere randomness is needed.

A single, fully written-out generator (SplitMix64) backs splitting,
weight initialization, dropout masks, bootstrap resampling and the hash
embedder, so every pipeline stage reproduces bit-for-bit from its seed on
any platform.
"""

from __future__ import annotations

import hashlib
import unicodedata

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """SplitMix64 sequence generator over 64-bit state."""

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_unit(self) -> float:
        """Uniform float in [0, 1) using the top 53 bits."""
        return (self.next_uint64() >> 11) * 2.0 ** -53

    def next_below(self, bound: int) -> int:
        """Integer in [0, bound). Modulo reduction; determinism matters here,
        the negligible modulo bias does not."""
        return self.next_uint64() % bound

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_below(i + 1)
            items[i], items[j] = items[j], items[i]


def hash64(text: str) -> int:
    """First 8 bytes (big-endian) of SHA-256 over the NFC-normalized text."""
    normalized = unicodedata.normalize("NFC", text)
    digest = hashlib.sha256(normalized.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")
