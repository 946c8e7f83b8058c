"""Word-level SWAR primitives against per-lane scalar loop oracles."""

import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swarcuckoo.errors import ConfigError
from swarcuckoo.wordops import (
    HIGH_ONES,
    LANE_WIDTHS,
    LOW_ONES,
    MASK64,
    broadcast_tag,
    extract_tag,
    first_set_lane,
    match_mask,
    replace_tag,
    tags_per_word,
    zero_mask,
)


# ---- oracles: definitional per-lane loops, no shared bit tricks ----

def oracle_lanes(w: int, f: int) -> list[int]:
    """Decompose a word into its lanes by repeated division."""
    base = 1 << f
    out = []
    for _ in range(64 // f):
        out.append(w % base)
        w //= base
    return out


def oracle_zero_mask(w: int, f: int) -> int:
    mask = 0
    for i, lane in enumerate(oracle_lanes(w, f)):
        if lane == 0:
            mask += (1 << (f - 1)) * (1 << (i * f))
    return mask


def oracle_match_mask(w: int, tag: int, f: int) -> int:
    mask = 0
    for i, lane in enumerate(oracle_lanes(w, f)):
        if lane == tag:
            mask += (1 << (f - 1)) * (1 << (i * f))
    return mask


def oracle_first_set_lane(mask: int, f: int):
    for i in range(64 // f):
        if oracle_lanes(mask, f)[i] != 0:
            return i
    return None


def random_words(n: int, seed: int) -> list[int]:
    rng = random.Random(seed)
    words = [rng.getrandbits(64) for _ in range(n)]
    # salt in words with planted zero / repeated lanes, which uniform
    # sampling at f=16 and f=32 would almost never produce
    for f in LANE_WIDTHS:
        for _ in range(n // 20):
            w = rng.getrandbits(64)
            lanes = 64 // f
            for _ in range(rng.randint(1, lanes)):
                slot = rng.randrange(lanes)
                w &= ~(((1 << f) - 1) << (slot * f))
            words.append(w)
    return words


# ---- pinned examples ----

def test_broadcast_examples():
    assert broadcast_tag(0xAB, 8) == 0xABABABABABABABAB
    assert broadcast_tag(0x0001, 16) == 0x0001000100010001
    assert broadcast_tag(0x00000000, 32) == 0


def test_zero_mask_examples():
    assert zero_mask(0x0011223344556600, 8) == oracle_zero_mask(0x0011223344556600, 8)
    assert zero_mask(0x0011223344556600, 8) == 0x8000000000000080
    for f in LANE_WIDTHS:
        assert zero_mask(MASK64, f) == 0
    assert zero_mask(0, 16) == 0x8000800080008000


def test_first_set_lane_examples():
    assert first_set_lane(0x8000000000000080, 8) == 0
    assert first_set_lane(0, 16) is None
    assert first_set_lane(0x8000000000000000, 8) == 7


def test_extract_replace_examples():
    assert extract_tag(0x1111222233334444, 0, 16) == 0x4444
    assert extract_tag(0x1111222233334444, 3, 16) == 0x1111
    assert replace_tag(0, 1, 0xAB, 8) == 0x000000000000AB00
    assert replace_tag(MASK64, 0, 0x0000, 16) == 0xFFFFFFFFFFFF0000


# ---- oracle sweeps ----

@pytest.mark.parametrize("f", LANE_WIDTHS)
def test_zero_mask_matches_oracle(f):
    for w in random_words(400, seed=101):
        assert zero_mask(w, f) == oracle_zero_mask(w, f), hex(w)


@pytest.mark.parametrize("f", LANE_WIDTHS)
def test_match_law(f):
    rng = random.Random(202)
    for w in random_words(200, seed=303):
        for tag in (0, 1, rng.getrandbits(f), *oracle_lanes(w, f)[:2]):
            got = zero_mask(w ^ broadcast_tag(tag, f), f)
            assert got == oracle_match_mask(w, tag, f)
            assert got == match_mask(w, tag, f)


@pytest.mark.parametrize("f", LANE_WIDTHS)
def test_lane_mask_invariant(f):
    # indicator bits may appear only at lane-top positions
    for w in random_words(300, seed=404):
        assert zero_mask(w, f) & ~HIGH_ONES[f] == 0


@pytest.mark.parametrize("f", LANE_WIDTHS)
def test_first_set_lane_matches_linear_scan(f):
    rng = random.Random(505)
    lanes = 64 // f
    masks = [0, HIGH_ONES[f]]
    for _ in range(300):
        m = 0
        for _ in range(rng.randint(1, lanes)):
            m |= (1 << (f - 1)) << (rng.randrange(lanes) * f)
        masks.append(m)
    for m in masks:
        assert first_set_lane(m, f) == oracle_first_set_lane(m, f)


@pytest.mark.parametrize("f", LANE_WIDTHS)
def test_replace_extract_round_trip(f):
    rng = random.Random(606)
    for w in random_words(100, seed=707):
        for slot in range(64 // f):
            tag = rng.getrandbits(f)
            w2 = replace_tag(w, slot, tag, f)
            assert extract_tag(w2, slot, f) == tag
            for other in range(64 // f):
                if other != slot:
                    assert extract_tag(w2, other, f) == extract_tag(w, other, f)


def test_replace_last_write_wins():
    rng = random.Random(808)
    for f in LANE_WIDTHS:
        for _ in range(50):
            w = rng.getrandbits(64)
            slot = rng.randrange(64 // f)
            a, b = rng.getrandbits(f), rng.getrandbits(f)
            assert replace_tag(replace_tag(w, slot, a, f), slot, b, f) == replace_tag(w, slot, b, f)


# ---- property tests ----

word_st = st.integers(min_value=0, max_value=MASK64)


@settings(max_examples=300)
@given(w=word_st, f=st.sampled_from(LANE_WIDTHS), data=st.data())
def test_round_trip_property(w, f, data):
    slot = data.draw(st.integers(0, 64 // f - 1))
    tag = data.draw(st.integers(0, (1 << f) - 1))
    w2 = replace_tag(w, slot, tag, f)
    assert extract_tag(w2, slot, f) == tag
    assert oracle_lanes(w2, f)[:slot] == oracle_lanes(w, f)[:slot]
    assert oracle_lanes(w2, f)[slot + 1:] == oracle_lanes(w, f)[slot + 1:]


@settings(max_examples=300)
@given(w=word_st, f=st.sampled_from(LANE_WIDTHS), data=st.data())
def test_match_law_property(w, f, data):
    tag = data.draw(st.integers(0, (1 << f) - 1))
    assert match_mask(w, tag, f) == oracle_match_mask(w, tag, f)


# ---- contract violations ----

def test_lane_width_validation():
    for f in (0, 1, 4, 12, 24, 64):
        with pytest.raises(ConfigError):
            broadcast_tag(0, f)
        with pytest.raises(ConfigError):
            zero_mask(0, f)
        with pytest.raises(ConfigError):
            tags_per_word(f)


def test_slot_and_tag_range_validation():
    with pytest.raises(ValueError):
        extract_tag(0, 8, 8)
    with pytest.raises(ValueError):
        replace_tag(0, -1, 0, 16)
    with pytest.raises(ValueError):
        replace_tag(0, 0, 1 << 16, 16)
    with pytest.raises(ValueError):
        broadcast_tag(1 << 8, 8)


def test_lane_constant_tables():
    assert LOW_ONES[8] == 0x0101010101010101
    assert LOW_ONES[16] == 0x0001000100010001
    assert LOW_ONES[32] == 0x0000000100000001
    assert HIGH_ONES[8] == 0x8080808080808080
    assert HIGH_ONES[16] == 0x8000800080008000
    assert HIGH_ONES[32] == 0x8000000080000000
