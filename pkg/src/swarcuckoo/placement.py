"""Key hashing, fingerprint derivation, and bucket-placement policies.

A key is hashed once into 64 bits: the upper 32 bits derive the fingerprint
and the lower 32 bits pick the primary bucket, so the two are decorrelated.
Two placement policies map a fingerprint at one bucket to its alternate:

``xor``
    Partial-key cuckoo hashing, ``i2 = (i1 ^ tag_hash(fp)) & (m - 1)``.
    Requires a power-of-two bucket count; the map is an involution, so the
    alternate of the alternate is the original bucket.

``offset``
    ``i2 = (i1 + offset(fp)) mod m`` going forward and
    ``i1 = (i2 - offset(fp)) mod m`` going back, with a residency ("choice")
    bit stored in the lane's top bit telling which direction applies. Works
    for any bucket count of at least 2 at the cost of one payload bit.

Everything here is pure integer math and doubles as the reference for the
jitted twins in ``_kernels``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

from .errors import ConfigError
from .wordops import LANE_WIDTHS, MASK64, check_lane_width

MASK32 = (1 << 32) - 1

# xxHash64 prime constants
_P1 = 0x9E3779B185EBCA87
_P2 = 0xC2B2AE3D27D4EB4F
_P3 = 0x165667B19E3779F9
_P4 = 0x85EBCA77C2B2AE63
_P5 = 0x27D4EB2F165667C5

#: odd Fibonacci-style multiplier used by tag_hash and the eviction PRNG
GOLDEN = 0x9E3779B97F4A7C15


class Policy(str, Enum):
    XOR = "xor"
    OFFSET = "offset"


class Eviction(str, Enum):
    DFS = "dfs"
    BFS = "bfs"


@dataclass(frozen=True)
class FilterConfig:
    """Static parameters of one filter instance.

    ``bucket_count`` is the number of buckets m; total slot capacity is
    ``bucket_count * bucket_slots``. Constraints enforced here:

    - fingerprint_bits in {8, 16, 32}
    - bucket_slots >= 1 and bucket_slots * fingerprint_bits a multiple of 64
      (each bucket is a whole number of words)
    - xor policy requires a power-of-two bucket_count
    - offset policy requires bucket_count >= 2
    - max_evictions >= 1
    """

    bucket_count: int
    fingerprint_bits: int = 16
    bucket_slots: int = 16
    policy: Policy = Policy.XOR
    eviction: Eviction = Eviction.DFS
    max_evictions: int = 500
    seed: int = 0

    def __post_init__(self):
        check_lane_width(self.fingerprint_bits)
        if self.bucket_slots < 1:
            raise ConfigError(f"bucket_slots must be >= 1, got {self.bucket_slots}")
        if (self.bucket_slots * self.fingerprint_bits) % 64 != 0:
            raise ConfigError(
                "bucket_slots * fingerprint_bits must be a multiple of 64, got "
                f"{self.bucket_slots} * {self.fingerprint_bits}"
            )
        if self.bucket_count < 1:
            raise ConfigError(f"bucket_count must be >= 1, got {self.bucket_count}")
        # coerce strings like "xor" so CLI and config files can pass plain text
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "eviction", Eviction(self.eviction))
        if self.policy is Policy.XOR and self.bucket_count & (self.bucket_count - 1):
            raise ConfigError(
                f"xor policy requires a power-of-two bucket_count, got {self.bucket_count}"
            )
        if self.policy is Policy.OFFSET and self.bucket_count < 2:
            raise ConfigError(
                f"offset policy requires bucket_count >= 2, got {self.bucket_count}"
            )
        if self.max_evictions < 1:
            raise ConfigError(f"max_evictions must be >= 1, got {self.max_evictions}")
        if not 0 <= self.seed <= MASK64:
            raise ConfigError("seed must fit in 64 bits")

    @property
    def tags_per_word(self) -> int:
        return 64 // self.fingerprint_bits

    @property
    def words_per_bucket(self) -> int:
        return (self.bucket_slots * self.fingerprint_bits) // 64

    @property
    def total_slots(self) -> int:
        return self.bucket_count * self.bucket_slots

    @property
    def total_words(self) -> int:
        return self.bucket_count * self.words_per_bucket

    @property
    def payload_bits(self) -> int:
        """Fingerprint payload width: full lane for xor, one less for offset."""
        if self.policy is Policy.OFFSET:
            return self.fingerprint_bits - 1
        return self.fingerprint_bits

    @property
    def choice_bit(self) -> int:
        """Stored-lane bit marking alternate-bucket residency (offset policy)."""
        return 1 << (self.fingerprint_bits - 1)

    @property
    def index_mask(self) -> int:
        """m - 1 when the bucket count is a power of two, else 0."""
        m = self.bucket_count
        return m - 1 if m & (m - 1) == 0 else 0


class Placement(NamedTuple):
    fp: int
    i1: int
    i2: int


def _rotl(x: int, r: int) -> int:
    return ((x << r) | (x >> (64 - r))) & MASK64


def hash_key(key: int, seed: int = 0) -> int:
    """xxHash64 of the key's 8-byte little-endian encoding."""
    key &= MASK64
    acc = (seed + _P5 + 8) & MASK64
    k1 = _rotl((key * _P2) & MASK64, 31)
    k1 = (k1 * _P1) & MASK64
    acc = (_rotl(acc ^ k1, 27) * _P1 + _P4) & MASK64
    acc ^= acc >> 33
    acc = (acc * _P2) & MASK64
    acc ^= acc >> 29
    acc = (acc * _P3) & MASK64
    acc ^= acc >> 32
    return acc


def tag_hash(fp: int) -> int:
    """Scramble a fingerprint into bucket-index space.

    One odd-constant multiply, keeping the high 32 bits of the product. The
    multiplicative lattice spreads small fingerprints far apart, so masking
    the result down to realistic bucket counts stays collision-light (the
    enumeration tests pin this).
    """
    return ((fp * GOLDEN) & MASK64) >> 32


def reduce_index(x: int, m: int) -> int:
    """Map a 32-bit hash part onto [0, m): mask when m is a power of two,
    multiply-shift otherwise (no modulo bias, no division)."""
    if m & (m - 1) == 0:
        return x & (m - 1)
    return (x * m) >> 32


def offset_delta(fp: int, m: int) -> int:
    """Bucket distance used by the offset policy, always in [1, m - 1]."""
    return 1 + tag_hash(fp) % (m - 1)


def alt_index(i: int, fp: int, choice: int, cfg: FilterConfig) -> tuple[int, int]:
    """Alternate bucket of a fingerprint residing in bucket ``i``.

    Returns ``(bucket, choice)`` for the destination. The xor policy ignores
    and returns choice 0; the offset policy applies the stored choice bit
    (0 means forward to the alternate, 1 means back to the primary) and flips
    it on the way.
    """
    m = cfg.bucket_count
    if cfg.policy is Policy.XOR:
        return (i ^ tag_hash(fp)) & (m - 1), 0
    delta = offset_delta(fp, m)
    if choice == 0:
        return (i + delta) % m, 1
    return (i - delta) % m, 0


def stored_tag(fp: int, choice: int, cfg: FilterConfig) -> int:
    """Lane value for a fingerprint with the given residency."""
    if cfg.policy is Policy.OFFSET and choice:
        return fp | cfg.choice_bit
    return fp


def split_tag(tag: int, cfg: FilterConfig) -> tuple[int, int]:
    """Inverse of stored_tag: (payload fingerprint, choice bit)."""
    if cfg.policy is Policy.OFFSET:
        return tag & (cfg.choice_bit - 1), 1 if tag & cfg.choice_bit else 0
    return tag, 0


def derive_placement(key: int, cfg: FilterConfig) -> Placement:
    """Fingerprint and candidate bucket pair for a key.

    The fingerprint is the low payload bits of the hash's upper half,
    remapped to 1 when zero (zero is the empty-slot sentinel); the primary
    bucket comes from the lower half.
    """
    h = hash_key(key, cfg.seed)
    fp = (h >> 32) & ((1 << cfg.payload_bits) - 1)
    if fp == 0:
        fp = 1
    i1 = reduce_index(h & MASK32, cfg.bucket_count)
    i2, _ = alt_index(i1, fp, 0, cfg)
    return Placement(fp, i1, i2)
