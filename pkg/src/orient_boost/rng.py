"""Deterministic 64-bit splittable random streams.

The generator is SplitMix64: the state advances by a fixed odd constant and
each output is the avalanche mix of the new state.  A stream is fully
determined by a (master seed, stream index) pair, so sample index ``i`` of a
run produces bit-identical output no matter how samples are distributed
across workers, platforms, or Python builds.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_INDEX_SALT = 0x6A09E667F3BCC909


def mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford variant 13)."""
    z &= _MASK
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK
    z ^= z >> 31
    return z


class Stream:
    """One SplitMix64 output stream."""

    __slots__ = ("_state",)

    def __init__(self, state: int):
        self._state = state & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        return mix64(self._state)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n), unbiased via rejection."""
        if n <= 0:
            raise ValueError("below() requires n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def coin(self) -> int:
        """Fair bit (top bit of the next output)."""
        return self.next_u64() >> 63

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def permutation(self, n: int) -> list[int]:
        items = list(range(n))
        self.shuffle(items)
        return items


def stream_for(master: int, index: int = 0) -> Stream:
    """Independent stream for (master seed, stream index)."""
    state = mix64(mix64(master) ^ mix64((index & _MASK) ^ _INDEX_SALT))
    return Stream(state)
