"""Closed-form false-positive-rate model and capacity sizing.

The membership FPR of a cuckoo filter with f-bit fingerprints, b slots per
bucket, and load factor alpha is

    epsilon = 1 - (1 - 2**-f) ** (2 * b * alpha)

(a negative query inspects 2b slots, each holding a colliding fingerprint
with probability 2**-f, diluted by occupancy alpha). Evaluation goes through
log1p/expm1 so the tiny 2**-f term is not lost to cancellation at f = 32.
"""

from __future__ import annotations

import math

from .placement import FilterConfig, Policy


def analytic_fpr(fingerprint_bits: int, bucket_slots: int, alpha: float) -> float:
    """Model FPR for f-bit fingerprints, b-slot buckets, load factor alpha."""
    if fingerprint_bits < 1:
        raise ValueError(f"fingerprint_bits must be >= 1, got {fingerprint_bits}")
    if bucket_slots < 1:
        raise ValueError(f"bucket_slots must be >= 1, got {bucket_slots}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    exponent = 2.0 * bucket_slots * alpha
    return -math.expm1(exponent * math.log1p(-(2.0 ** -fingerprint_bits)))


def effective_fingerprint_bits(cfg: FilterConfig) -> int:
    """Payload bits that actually discriminate keys: f, or f - 1 for offset."""
    return cfg.payload_bits


def size_for(
    n: int,
    alpha_target: float,
    bucket_slots: int = 16,
    policy: Policy = Policy.XOR,
) -> int:
    """Smallest bucket count m whose capacity covers n items at alpha_target.

    The xor policy rounds up to the next power of two (its alternate-index
    map needs one); offset returns the minimal integer.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if not 0.0 < alpha_target <= 1.0:
        raise ValueError(f"alpha_target must be in (0, 1], got {alpha_target}")
    m = max(1, int(n / (bucket_slots * alpha_target)))
    while m * bucket_slots * alpha_target < n:
        m += 1
    if Policy(policy) is Policy.XOR:
        return 1 << (m - 1).bit_length()
    # offset placement needs at least two buckets to have an alternate
    return max(m, 2)
