"""Seeded 64-bit PRNG used everywhere randomness matters.

All shuffles, synthetic data and weight initialisation draw from
xoshiro256** seeded through splitmix64, so that splits and experiments
are bit-reproducible across machines and across implementations in
other languages (the algorithms are pinned, unlike library RNGs).
"""

from __future__ import annotations

import math

import numpy as np

_MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64_stream(seed: int, count: int) -> list[int]:
    """First `count` outputs of splitmix64 starting from `seed`."""
    x = seed & _MASK64
    out = []
    for _ in range(count):
        x = (x + 0x9E3779B97F4A7C15) & _MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        out.append(z ^ (z >> 31))
    return out


class Xoshiro256StarStar:
    """xoshiro256** with its state seeded from splitmix64(seed).

    splitmix64 is a bijection per step, so at most one of the four
    state words can be zero; the forbidden all-zero state cannot occur.
    """

    def __init__(self, seed: int):
        self.seed = seed & _MASK64
        s = splitmix64_stream(seed, 4)
        self._s0, self._s1, self._s2, self._s3 = s

    def next_u64(self) -> int:
        s1 = self._s1
        x = (s1 * 5) & _MASK64
        result = (((x << 7) | (x >> 57)) & _MASK64) * 9 & _MASK64
        t = (s1 << 17) & _MASK64
        s2 = self._s2 ^ self._s0
        s3 = self._s3 ^ s1
        s1 ^= s2
        s0 = self._s0 ^ s3
        s2 ^= t
        self._s0 = s0
        self._s1 = s1
        self._s2 = s2
        self._s3 = ((s3 << 45) | (s3 >> 19)) & _MASK64
        return result

    def uniform(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * 1.1102230246251565e-16  # 2**-53

    def uniforms(self, count: int) -> np.ndarray:
        out = np.empty(count, dtype=np.float64)
        nxt = self.next_u64
        for i in range(count):
            out[i] = (nxt() >> 11) * 1.1102230246251565e-16
        return out

    def normals(self, count: int) -> np.ndarray:
        """`count` standard normals via Box-Muller.

        Each call is self-contained: it consumes ceil(count/2) uniform
        pairs and discards the unused spare of an odd draw, so streams
        are reproducible per array rather than per scalar.
        """
        npairs = (count + 1) // 2
        u = self.uniforms(2 * npairs)
        u1 = 1.0 - u[0::2]  # (0, 1]: keeps log() finite
        u2 = u[1::2]
        r = np.sqrt(-2.0 * np.log(u1))
        theta = (2.0 * math.pi) * u2
        out = np.empty(2 * npairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return out[:count]

    def below(self, bound: int) -> int:
        """Unbiased integer in [0, bound) by rejection sampling."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        threshold = (2**64 // bound) * bound
        while True:
            u = self.next_u64()
            if u < threshold:
                return u % bound

    def shuffled(self, items):
        """Fisher-Yates shuffled copy of `items` (input untouched)."""
        out = list(items)
        for i in range(len(out) - 1, 0, -1):
            j = self.below(i + 1)
            out[i], out[j] = out[j], out[i]
        return out
