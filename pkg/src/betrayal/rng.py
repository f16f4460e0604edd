"""xoshiro256** streams seeded through splitmix64.

The bootstrap draws every replicate from its own stream, so results do not
depend on how replicates are batched or parallelized.  Stream ``r`` of seed
``s`` starts from splitmix64 state ``s XOR (r * 0xD1B54A32D192ED03) mod 2**64``
and takes its four state words from four consecutive splitmix64 outputs.
Bounded integers use the multiply-shift map ``((x >> 32) * n) >> 32``.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_STREAM_MULT = 0xD1B54A32D192ED03


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (new_state, output)."""
    state = (state + _GOLDEN) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def stream_state(seed: int, stream: int = 0) -> list[int]:
    x = (seed & MASK64) ^ ((stream * _STREAM_MULT) & MASK64)
    words = []
    for _ in range(4):
        x, out = splitmix64(x)
        words.append(out)
    return words


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256:
    """Scalar xoshiro256** generator."""

    def __init__(self, seed: int = 0, stream: int = 0, state: list[int] | None = None):
        self.s = list(state) if state is not None else stream_state(seed, stream)
        if not any(self.s):
            raise ValueError("xoshiro256** state must not be all zero")

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return result

    def below(self, n: int) -> int:
        return ((self.next_u64() >> 32) * n) >> 32

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


class XoshiroStreams:
    """Many independent xoshiro256** streams stepped in lockstep."""

    def __init__(self, seed: int, streams):
        streams = list(streams)
        st = np.array([stream_state(seed, r) for r in streams], dtype=np.uint64)
        self.s0, self.s1, self.s2, self.s3 = (st[:, i].copy() for i in range(4))

    @staticmethod
    def _rotl(x: np.ndarray, k: int) -> np.ndarray:
        return (x << np.uint64(k)) | (x >> np.uint64(64 - k))

    def next_u64(self) -> np.ndarray:
        s0, s1, s2, s3 = self.s0, self.s1, self.s2, self.s3
        result = self._rotl(s1 * np.uint64(5), 7) * np.uint64(9)
        t = s1 << np.uint64(17)
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self.s3 = self._rotl(s3, 45)
        return result

    def below(self, n: int) -> np.ndarray:
        if not 0 < n < (1 << 32):
            raise ValueError("bound must be in (0, 2**32)")
        x = self.next_u64() >> np.uint64(32)
        return ((x * np.uint64(n)) >> np.uint64(32)).astype(np.int64)


def resample_indices(seed: int, n: int, replicates: range) -> np.ndarray:
    """Index matrix (len(replicates), n); row r uses stream ``replicates[r]``."""
    streams = XoshiroStreams(seed, replicates)
    out = np.empty((len(replicates), n), dtype=np.int64)
    for j in range(n):
        out[:, j] = streams.below(n)
    return out
