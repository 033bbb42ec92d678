"""Counter-based, splittable random number streams.

All randomness in this package flows through `RngStream`, a stateless-by-key
generator: every output is a pure function of (master_seed, stream_id, counter).
Two streams with distinct (master_seed, stream_id) are statistically
independent; identical triples reproduce bit-identical output.  This makes
parallel Monte Carlo fan-out reproducible without any sequencing between
replicates.

The core primitive is the splitmix64 finalizer applied to a Weyl sequence,
which passes standard statistical batteries and is trivially portable (the
compiled simulation kernels in `fastbrw` re-implement the exact same mixing
so that the pure-Python and compiled paths see the *same* trees).

Uniforms are produced strictly inside (0, 1): the 53-bit mantissa is offset
by half an ulp, so -log(u) and -log(1-u) are always finite.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import hashlib
import math

__all__ = [
    "RngStream",
    "mix64",
    "stream_key",
    "draw_u64",
    "child_key",
    "u64_to_open_unit",
    "hash_label",
]

_MASK = 0xFFFFFFFFFFFFFFFF
_PHI = 0x9E3779B97F4A7C15          # 2^64 / golden ratio, odd
_DRAW_SALT = 0xD1B54A32D192ED03    # separates per-node draw stream ...
_CHILD_SALT = 0x8BB84B93962EACC9   # ... from the child-key derivation stream


def mix64(z: int) -> int:
    """splitmix64 finalizer: a 64-bit permutation with full avalanche."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def stream_key(master_seed: int, stream_id: int) -> int:
    """Derive the 64-bit key of stream (master_seed, stream_id)."""
    k = mix64((master_seed + _PHI) & _MASK)
    return mix64(k ^ (stream_id & _MASK))


def draw_u64(key: int, counter: int) -> int:
    """counter-th 64-bit output of the stream with the given key."""
    return mix64(((key ^ _DRAW_SALT) + counter * _PHI) & _MASK)


def child_key(key: int, index: int) -> int:
    """Key of the index-th child stream; disjoint from the draw outputs."""
    return mix64(((key ^ _CHILD_SALT) + index * _PHI) & _MASK)


def u64_to_open_unit(x: int) -> float:
    """Map a 64-bit word to a uniform in the open interval (0, 1).

    Uses 52 mantissa bits so the half-ulp offset stays exactly
    representable; the maximum output is 1 - 2^-53, the minimum 2^-53.
    """
    return ((x >> 12) + 0.5) * (2.0 ** -52)


def hash_label(label: str, index: int = 0) -> int:
    """Stable 64-bit stream id from a text label plus an index.

    Used to derive per-replicate stream ids as hash(experiment id, replicate).
    """
    h = hashlib.blake2b(f"{label}\x00{index}".encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


@dataclass
class RngStream:
    """A single-consumer random stream identified by (master_seed, stream_id).

    The counter advances on every draw; `fork` and `child` derive fresh,
    statistically independent streams without touching this one's counter.
    """

    master_seed: int
    stream_id: int
    counter: int = 0
    _key: int = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self._key = stream_key(self.master_seed, self.stream_id)

    @property
    def key(self) -> int:
        return self._key

    def next_u64(self) -> int:
        self.counter += 1
        return draw_u64(self._key, self.counter)

    def uniform(self) -> float:
        """Uniform on (0, 1), endpoints excluded by construction."""
        return u64_to_open_unit(self.next_u64())

    def exponential(self) -> float:
        """Exponential(1) variate."""
        return -math.log(self.uniform())

    def uniform_at(self, counter: int) -> float:
        """Uniform on (0, 1) at a fixed counter; does not advance the stream.

        For algorithms whose i-th decision must be addressable by i (so a
        compiled kernel can replay them); do not mix with sequential draws
        on the same stream.
        """
        return u64_to_open_unit(draw_u64(self._key, counter))

    def integer(self, n: int) -> int:
        """Uniform integer in {0, ..., n-1} (Lemire-style rejection)."""
        if n <= 0:
            raise ValueError("n must be positive")
        # rejection keeps the distribution exactly uniform
        limit = _MASK - (_MASK + 1) % n
        while True:
            x = self.next_u64()
            if x <= limit:
                return x % n

    def child(self, index: int) -> "RngStream":
        """Derived stream for child `index`; independent of this stream."""
        return RngStream(self.master_seed, child_key(self._key, index))

    def fork(self, label: str, index: int = 0) -> "RngStream":
        """Derived stream keyed by a label and index (experiment fan-out)."""
        return RngStream(self.master_seed,
                         child_key(self._key, hash_label(label, index)))

    def numpy_generator(self):
        """A numpy Generator seeded by this stream's key (for bulk sampling).

        The Philox bit generator is itself counter-based; the returned
        generator is a pure function of (master_seed, stream_id).
        """
        import numpy as np

        return np.random.Generator(np.random.Philox(key=self._key))
