"""xoshiro256** generator seeded through splitmix64.

Used instead of :mod:`random` so that generated corpora and SAA draws are
reproducible bit-for-bit by any implementation of the same generator.
"""

from __future__ import annotations

from fractions import Fraction

MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step; returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    def __init__(self, seed: int):
        self.seed = seed & MASK64
        sm = self.seed
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self.s = s

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` (rejection sampling, unbiased)."""
        if n <= 0:
            raise ValueError("bound must be positive")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        words = (bits + 63) // 64
        while True:
            r = 0
            for _ in range(words):
                r = (r << 64) | self.next_u64()
            r >>= words * 64 - bits
            if r < n:
                return r

    def bernoulli(self, p: Fraction) -> bool:
        """True with probability exactly ``p`` (rational)."""
        p = Fraction(p)
        if p <= 0:
            return False
        if p >= 1:
            return True
        return self.below(p.denominator) < p.numerator

    def coin(self) -> bool:
        return bool(self.next_u64() >> 63)

    def spawn(self, n: int) -> list["Xoshiro256"]:
        """``n`` child generators with seeds drawn from this stream."""
        return [Xoshiro256(self.next_u64()) for _ in range(n)]
