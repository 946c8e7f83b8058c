"""SWAR primitives over 64-bit words holding packed fingerprint lanes.

A 64-bit word stores ``64 // f`` lanes of ``f`` bits each, with lane 0 in the
least-significant bits. Supported lane widths are the hardware-friendly 8, 16,
and 32. All functions here are pure and operate on plain Python integers
masked to 64 bits; they are the reference semantics for the jitted kernels in
``_kernels`` and the two are cross-checked by the test suite.

Zero-lane detection uses the carry-out construction::

    ~(((w & ~H) + ~H) | w) & H

where ``H`` holds each lane's most significant bit. Unlike the subtractive
``(w - L) & ~w & H`` form, this variant produces no false indicator bits in
lanes above a genuine zero lane, so the returned mask is exact per lane and
safe to iterate slot by slot.
"""

from __future__ import annotations

from .errors import ConfigError

MASK64 = (1 << 64) - 1
LANE_WIDTHS = (8, 16, 32)


def _replicate(unit: int, f: int) -> int:
    word = 0
    for shift in range(0, 64, f):
        word |= unit << shift
    return word


#: per-lane most-significant-bit masks, keyed by lane width
HIGH_ONES = {f: _replicate(1 << (f - 1), f) for f in LANE_WIDTHS}
#: per-lane least-significant-bit masks, keyed by lane width
LOW_ONES = {f: _replicate(1, f) for f in LANE_WIDTHS}


def check_lane_width(f: int) -> None:
    """Reject lane widths other than 8, 16, or 32 bits."""
    if f not in HIGH_ONES:
        raise ConfigError(f"fingerprint_bits must be one of {LANE_WIDTHS}, got {f!r}")


def tags_per_word(f: int) -> int:
    check_lane_width(f)
    return 64 // f


def broadcast_tag(tag: int, f: int) -> int:
    """Replicate an f-bit tag into every lane of a word."""
    check_lane_width(f)
    if not 0 <= tag < (1 << f):
        raise ValueError(f"tag {tag:#x} does not fit in {f} bits")
    return _replicate(tag, f)


def zero_mask(w: int, f: int) -> int:
    """Mask whose lane-top bits flag exactly the all-zero lanes of ``w``."""
    check_lane_width(f)
    high = HIGH_ONES[f]
    not_high = ~high & MASK64
    return ~(((w & not_high) + not_high) | w) & high


def match_mask(w: int, tag: int, f: int) -> int:
    """Mask whose lane-top bits flag the lanes of ``w`` equal to ``tag``."""
    return zero_mask(w ^ broadcast_tag(tag, f), f)


def first_set_lane(mask: int, f: int) -> int | None:
    """Lowest lane index whose indicator bit is set, or None for an empty mask."""
    check_lane_width(f)
    if mask == 0:
        return None
    lowest_bit = (mask & -mask).bit_length() - 1
    return lowest_bit // f


def extract_tag(w: int, slot: int, f: int) -> int:
    """Read the f-bit lane at index ``slot``."""
    check_lane_width(f)
    if not 0 <= slot < 64 // f:
        raise ValueError(f"slot {slot} out of range for {f}-bit lanes")
    return (w >> (slot * f)) & ((1 << f) - 1)


def replace_tag(w: int, slot: int, tag: int, f: int) -> int:
    """Return ``w`` with the lane at ``slot`` overwritten by ``tag``."""
    check_lane_width(f)
    if not 0 <= slot < 64 // f:
        raise ValueError(f"slot {slot} out of range for {f}-bit lanes")
    if not 0 <= tag < (1 << f):
        raise ValueError(f"tag {tag:#x} does not fit in {f} bits")
    lane_mask = ((1 << f) - 1) << (slot * f)
    return (w & ~lane_mask & MASK64) | (tag << (slot * f))
