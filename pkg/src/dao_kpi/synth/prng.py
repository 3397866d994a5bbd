"""SplitMix64: a small 64-bit generator whose output is identical on every platform."""
import hashlib
from typing import List, MutableSequence, Sequence, TypeVar


T = TypeVar('T')

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
MIX_1 = 0xBF58476D1CE4E5B9
MIX_2 = 0x94D049BB133111EB


def stable_seed(*parts: object) -> int:
    """ 64-bit seed derived from structured parts, stable across runs and interpreters. """
    digest = hashlib.sha256()
    for part in parts:
        digest.update(repr(part).encode('utf-8'))
        digest.update(b'\x1f')
    return int.from_bytes(digest.digest()[:8], 'little')


class SplitMix64:

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * MIX_1) & MASK64
        z = ((z ^ (z >> 27)) * MIX_2) & MASK64
        return z ^ (z >> 31)

    def fork(self, label: str) -> 'SplitMix64':
        """ Independent stream for one concern, so adding draws elsewhere leaves it unchanged. """
        return SplitMix64(stable_seed(self.state, label))

    def random(self) -> float:
        """ Uniform in [0, 1) with 53 bits of precision. """
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def below(self, n: int) -> int:
        """ Uniform integer in [0, n), unbiased by rejection. """
        if n <= 0:
            raise ValueError(f'below() needs a positive bound, got {n}')
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            value = self.next_u64()
            if value < limit:
                return value % n

    def randint(self, low: int, high: int) -> int:
        """ Uniform integer in [low, high]. """
        return low + self.below(high - low + 1)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def choice(self, items: Sequence[T]) -> T:
        return items[self.below(len(items))]

    def shuffle(self, items: MutableSequence[T]) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, items: Sequence[T], k: int) -> List[T]:
        pool = list(items)
        self.shuffle(pool)
        return pool[:k]
