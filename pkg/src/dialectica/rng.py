"""Deterministic keyed 64-bit streams.

All randomness in the package flows through ``derive``, a SplitMix64
finalizer over a mixed (seed, stream_tag, index) key.  The same triple gives
the same output on every platform, which is what makes traces reproducible
and lets sender and receiver agree on per-message parameters from a shared
seed alone.
"""

from __future__ import annotations

from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15

# Stream tags reserved by the package; user code may use any other values.
DICE_TAG = 0x00D1CE00D1CE00D1
SCHED_TAG = 0x5C4ED0005C4ED000
ATTACKER_TAG = 0xA77AC4E2A77AC4E2
SAMPLE_TAG = 0x5A3B7E005A3B7E00
RATE_TAG = 0x2A7E2A7E2A7E2A7E


class BadBias(Exception):
    """Raised when a dice bias vector contains a zero weight."""


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def derive(seed: int, stream_tag: int, index: int) -> int:
    """SplitMix64 finalization of seed XOR rotl(stream_tag,17) XOR index*GOLDEN."""
    z = (seed ^ _rotl(stream_tag & MASK64, 17) ^ ((index * GOLDEN) & MASK64)) & MASK64
    z = (z + GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def uniform01(word: int) -> float:
    """Map a 64-bit word to [0, 1); the top 53 bits keep the result below 1."""
    return (word >> 11) / (1 << 53)


def fnv64(text: str) -> int:
    """FNV-1a over the UTF-8 bytes; used to key per-lingo parameter streams."""
    h = 0xCBF29CE484222325
    for b in text.encode("utf-8"):
        h = ((h ^ b) * 0x100000001B3) & MASK64
    return h


@dataclass
class Rng:
    """Stateful view on one derive stream: each call consumes the next index."""

    seed: int
    stream_tag: int
    index: int = 0

    def next_u64(self) -> int:
        word = derive(self.seed, self.stream_tag, self.index)
        self.index += 1
        return word

    def next_float(self) -> float:
        return uniform01(self.next_u64())

    def next_below(self, bound: int) -> int:
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def subkey(seed: int, stream_tag: int, index: int) -> int:
    """A fresh 64-bit key for a nested stream; equals derive itself."""
    return derive(seed, stream_tag, index)


def throw_biased(seed: int, n: int, bias: tuple[int, ...]) -> int:
    """Face (1-based) of the n-th throw of a k-face dice with weights ``bias``.

    Face j comes up with long-run frequency bias[j-1] / sum(bias).
    """
    if len(bias) < 2:
        raise BadBias("dice needs at least 2 faces")
    if any(b <= 0 for b in bias):
        raise BadBias(f"all bias weights must be >= 1, got {bias}")
    total = sum(bias)
    r = derive(seed, DICE_TAG, n) % total
    acc = 0
    for j, b in enumerate(bias, start=1):
        acc += b
        if acc > r:
            return j
    raise AssertionError("unreachable")
