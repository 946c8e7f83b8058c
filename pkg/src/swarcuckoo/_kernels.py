"""Jitted kernels: SWAR word scans, bucket operations, and batch loops.

Everything here mirrors the pure-Python reference semantics in ``wordops``
and ``placement`` (the test suite cross-checks the two) but runs as compiled
code over a shared ``uint64`` word array.

Concurrency note. CPython holds the GIL for the entire duration of a default
``@njit`` call, so each helper below executes atomically with respect to
other Python threads. The pure-Python drivers in ``filter`` compose these
helpers into insert/delete operations whose cross-thread interleavings occur
between helper calls, at bucket-operation granularity; the compare-and-swap
loops inside the helpers keep the single-word-commit structure of the
algorithms. Mutating helpers must therefore never be compiled with
``nogil=True``. Read-only batch kernels (hashing, placement, query) are
``nogil`` so reader threads genuinely overlap.

Integer discipline: tags, hashes, masks, and words are uint64 throughout;
slot/bucket/word indexes are int64. Mixing the two in arithmetic would
promote to float64 under numba's numpy-derived rules, so lazily compiled
functions renormalize their scalar arguments on entry.
"""

from __future__ import annotations

import numpy as np
from numba import boolean, int64, njit, uint64

# xxHash64 primes
_P1 = np.uint64(0x9E3779B185EBCA87)
_P2 = np.uint64(0xC2B2AE3D27D4EB4F)
_P3 = np.uint64(0x165667B19E3779F9)
_P4 = np.uint64(0x85EBCA77C2B2AE63)
_P5 = np.uint64(0x27D4EB2F165667C5)

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_SM1 = np.uint64(0xBF58476D1CE4E5B9)
_SM2 = np.uint64(0x94D049BB133111EB)
MASK32 = np.uint64(0xFFFFFFFF)
EMPTY = np.uint64(0)

POLICY_XOR = 0
POLICY_OFFSET = 1
EVICT_DFS = 0
EVICT_BFS = 1


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _rotl(x, r):
    return (x << r) | (x >> (uint64(64) - r))


@njit(uint64(uint64, uint64), cache=True, inline="always")
def xxh64_u64(key, seed):
    acc = seed + _P5 + uint64(8)
    k1 = _rotl(key * _P2, uint64(31)) * _P1
    acc = _rotl(acc ^ k1, uint64(27)) * _P1 + _P4
    acc ^= acc >> uint64(33)
    acc *= _P2
    acc ^= acc >> uint64(29)
    acc *= _P3
    acc ^= acc >> uint64(32)
    return acc


@njit(uint64(uint64), cache=True, inline="always")
def _sm_mix(z):
    z = (z ^ (z >> uint64(30))) * _SM1
    z = (z ^ (z >> uint64(27))) * _SM2
    return z ^ (z >> uint64(31))


@njit(uint64(uint64, uint64, uint64), cache=True, inline="always")
def rng_init(seed, key_hash, worker):
    return _sm_mix((seed ^ key_hash) + GOLDEN * (worker + uint64(1)))


@njit(uint64(uint64), cache=True, inline="always")
def tag_hash_u(fp):
    return (fp * GOLDEN) >> uint64(32)


@njit(uint64(uint64, uint64, uint64), cache=True, inline="always")
def _reduce(x, m, mask):
    if mask != uint64(0):
        return x & mask
    return (x * m) >> uint64(32)


@njit(cache=True, inline="always")
def _alt(i, fp, choice, m, mask, policy):
    """Alternate bucket and flipped residency bit; all-uint64 callers only."""
    if policy == POLICY_XOR:
        return (i ^ tag_hash_u(fp)) & mask, uint64(0)
    delta = uint64(1) + tag_hash_u(fp) % (m - uint64(1))
    if choice == uint64(0):
        return (i + delta) % m, uint64(1)
    return (i + m - delta) % m, uint64(0)


@njit(uint64(uint64, uint64, uint64), cache=True, inline="always")
def _mk_tag(fp, choice, choice_bit):
    return fp | choice * choice_bit


@njit(cache=True, inline="always")
def _split_tag(tag, choice_bit):
    # choice_bit is 0 for the xor policy; the payload mask then wraps to all-ones
    payload = tag & (choice_bit - uint64(1))
    if tag & choice_bit != uint64(0):
        return payload, uint64(1)
    return payload, uint64(0)


# ---- SWAR word ops ----

@njit(uint64(uint64, uint64), cache=True, inline="always")
def _broadcast(tag, f):
    t = tag
    width = f
    while width < uint64(64):
        t |= t << width
        width <<= uint64(1)
    return t


@njit(uint64(uint64, uint64), cache=True, inline="always")
def _zmask(w, high):
    nh = ~high
    return (~(((w & nh) + nh) | w)) & high


@njit(int64(uint64, uint64), cache=True, inline="always")
def _first_lane(mask, f):
    if mask == uint64(0):
        return -1
    probe = uint64(1) << (f - uint64(1))
    lane = 0
    while mask & probe == uint64(0):
        probe <<= f
        lane += 1
    return lane


@njit(uint64(uint64, int64, uint64), cache=True, inline="always")
def _extract(w, slot, f):
    lane_mask = (uint64(1) << f) - uint64(1)
    return (w >> (uint64(slot) * f)) & lane_mask


@njit(uint64(uint64, int64, uint64, uint64), cache=True, inline="always")
def _replace(w, slot, tag, f):
    lane_mask = ((uint64(1) << f) - uint64(1)) << (uint64(slot) * f)
    return (w & ~lane_mask) | (tag << (uint64(slot) * f))


# ---- bucket operations (GIL-atomic sections; see module docstring) ----

@njit(int64(uint64[::1], int64, int64, int64, uint64, uint64, uint64, uint64), cache=True)
def try_insert(words, base, wpb, tpw, f, b, high, tag):
    """Place tag in the first empty lane; returns the slot index or -1.

    Scanning starts at the tag-derived word and wraps, committing through a
    single compare-and-swap; the word is reloaded and rescanned whenever the
    CAS loses.
    """
    start = int64(tag % b) // tpw
    for k in range(wpb):
        wi = base + (start + k) % wpb
        while True:
            w = words[wi]
            zm = _zmask(w, high)
            if zm == uint64(0):
                break
            slot = _first_lane(zm, f)
            desired = _replace(w, slot, tag, f)
            if words[wi] == w:  # CAS
                words[wi] = desired
                return ((start + k) % wpb) * tpw + slot
            # reload on CAS failure
    return -1


@njit(boolean(uint64[::1], int64, int64, int64, uint64, uint64, uint64, uint64, uint64),
      cache=True, nogil=True)
def find_tag(words, base, wpb, tpw, f, b, high, ignore, tag):
    """True when some lane matches tag after masking out the ignore bits.

    ``ignore`` is 0 for full-lane matching (xor policy) or the per-lane
    choice-bit mask (offset policy), whose membership test compares payload
    fingerprints only; empty lanes never match because payloads are nonzero.
    """
    pattern = _broadcast(tag, f)
    keep = ~ignore
    start = int64(tag % b) // tpw
    for k in range(wpb):
        w = words[base + (start + k) % wpb]
        if _zmask((w & keep) ^ pattern, high) != uint64(0):
            return True
    return False


@njit(int64(uint64[::1], int64, int64, int64, uint64, uint64, uint64, uint64, uint64), cache=True)
def remove_tag(words, base, wpb, tpw, f, b, high, ignore, tag):
    """CAS-clear the first lane matching tag (modulo ignore bits); slot or -1."""
    pattern = _broadcast(tag, f)
    keep = ~ignore
    start = int64(tag % b) // tpw
    for k in range(wpb):
        wi = base + (start + k) % wpb
        while True:
            w = words[wi]
            mm = _zmask((w & keep) ^ pattern, high)
            if mm == uint64(0):
                break
            slot = _first_lane(mm, f)
            desired = _replace(w, slot, EMPTY, f)
            if words[wi] == w:  # CAS
                words[wi] = desired
                return ((start + k) % wpb) * tpw + slot
            # reload on CAS failure
    return -1


@njit(boolean(uint64[::1], int64, int64, uint64), cache=True)
def bucket_has_empty(words, base, wpb, high):
    for k in range(wpb):
        if _zmask(words[base + k], high) != uint64(0):
            return True
    return False


@njit(uint64(uint64[::1], int64, int64, uint64, int64, uint64), cache=True)
def swap_slot(words, base, tpw, f, slot, tag):
    """Atomically exchange the lane at slot with tag; returns the old lane."""
    wi = base + slot // tpw
    lane = slot % tpw
    while True:
        w = words[wi]
        evicted = _extract(w, lane, f)
        desired = _replace(w, lane, tag, f)
        if words[wi] == w:  # CAS
            words[wi] = desired
            return evicted
        # reload on CAS failure


@njit(boolean(uint64[::1], int64, int64, uint64, uint64, uint64), cache=True)
def lane_cas(words, wi, lane, expected_tag, new_tag, f):
    """Replace the lane only if it still holds expected_tag."""
    w = words[wi]
    if _extract(w, lane, f) != expected_tag:
        return False
    words[wi] = _replace(w, lane, new_tag, f)
    return True


@njit(int64(uint64[::1], int64, int64, uint64, int64, int64, int64, int64[::1], uint64[::1]),
      cache=True)
def collect_candidates(words, base, tpw, f, b, start_slot, limit, out_slots, out_tags):
    """Snapshot up to ``limit`` occupied (slot, tag) pairs from start_slot on."""
    count = 0
    for j in range(b):
        slot = (start_slot + j) % b
        w = words[base + slot // tpw]
        tag = _extract(w, slot % tpw, f)
        if tag != EMPTY:
            out_slots[count] = slot
            out_tags[count] = tag
            count += 1
            if count == limit:
                break
    return count


# ---- whole-operation kernels ----

@njit(cache=True, inline="always")
def place_key(h, payload_bits, m, mask, policy):
    """(fp, i1, i2) from a key hash; fp is the nonzero payload fingerprint."""
    fp = (h >> uint64(32)) & ((uint64(1) << payload_bits) - uint64(1))
    if fp == uint64(0):
        fp = uint64(1)
    i1 = _reduce(h & MASK32, m, mask)
    i2, _ = _alt(i1, fp, uint64(0), m, mask, policy)
    return fp, i1, i2


@njit(cache=True, nogil=True)
def place_one(key, seed, payload_bits, m, mask, policy):
    """Scalar (fp, i1, i2) placement for the pure-Python drivers."""
    key = uint64(key)
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    m = uint64(m)
    mask = uint64(mask)
    h = xxh64_u64(key, seed)
    return place_key(h, payload_bits, m, mask, policy)


@njit(cache=True)
def insert_ready(words, key, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy):
    """Hash, place, and try both buckets directly in one atomic section.

    Returns (status, h, fp, i1, i2): status 1 means the tag was stored,
    0 means both buckets were full and an eviction chain is required. The
    hash is returned so the caller's eviction PRNG can be seeded without
    rehashing.
    """
    key = uint64(key)
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    f = uint64(f)
    bu = uint64(b)
    m = uint64(m)
    mask = uint64(mask)
    high = uint64(high)
    choice_bit = uint64(choice_bit)
    wpb = int64(wpb)
    tpw = int64(tpw)

    h = xxh64_u64(key, seed)
    fp, i1, i2 = place_key(h, payload_bits, m, mask, policy)
    if try_insert(words, int64(i1) * wpb, wpb, tpw, f, bu, high, fp) >= 0:
        return 1, h, fp, i1, i2
    tag2 = _mk_tag(fp, uint64(1) if policy == POLICY_OFFSET else uint64(0), choice_bit)
    if try_insert(words, int64(i2) * wpb, wpb, tpw, f, bu, high, tag2) >= 0:
        return 1, h, fp, i1, i2
    return 0, h, fp, i1, i2


@njit(cache=True)
def insert_one(
    words, key, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit,
    policy, strategy, max_evictions, worker, cand_slots, cand_tags,
):
    """Full insert: direct placement, then a DFS or BFS eviction chain.

    Returns (ok, eviction_rounds, lost_fp); lost_fp is the payload
    fingerprint dropped when the chain hits max_evictions, else 0.
    """
    key = uint64(key)
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    f = uint64(f)
    bu = uint64(b)
    m = uint64(m)
    mask = uint64(mask)
    high = uint64(high)
    choice_bit = uint64(choice_bit)
    worker = uint64(worker)
    bi = int64(b)
    wpb = int64(wpb)
    tpw = int64(tpw)

    h = xxh64_u64(key, seed)
    fp, i1, i2 = place_key(h, payload_bits, m, mask, policy)
    tag1 = fp
    tag2 = _mk_tag(fp, uint64(1) if policy == POLICY_OFFSET else uint64(0), choice_bit)
    if try_insert(words, int64(i1) * wpb, wpb, tpw, f, bu, high, tag1) >= 0:
        return 1, 0, EMPTY
    if try_insert(words, int64(i2) * wpb, wpb, tpw, f, bu, high, tag2) >= 0:
        return 1, 0, EMPTY

    state = rng_init(seed, h, worker)
    state += GOLDEN
    r = _sm_mix(state)
    if r & uint64(1) == uint64(0):
        cur_b = i1
        cur_tag = tag1
    else:
        cur_b = i2
        cur_tag = tag2

    if strategy == EVICT_DFS:
        for n in range(1, max_evictions + 1):
            state += GOLDEN
            r = _sm_mix(state)
            victim = int64(r % bu)
            evicted = swap_slot(words, int64(cur_b) * wpb, tpw, f, victim, cur_tag)
            if evicted == EMPTY:
                # a concurrent delete freed the slot; we just used it
                return 1, n, EMPTY
            efp, ec = _split_tag(evicted, choice_bit)
            cur_b, nc = _alt(cur_b, efp, ec, m, mask, policy)
            cur_tag = _mk_tag(efp, nc, choice_bit)
            if try_insert(words, int64(cur_b) * wpb, wpb, tpw, f, bu, high, cur_tag) >= 0:
                return 1, n, EMPTY
        lost, _ = _split_tag(cur_tag, choice_bit)
        return 0, max_evictions, lost

    # BFS: probe up to b//2 candidates for a free alternate before deepening
    limit = bi // 2
    for n in range(1, max_evictions + 1):
        state += GOLDEN
        r = _sm_mix(state)
        start_slot = int64(r % bu)
        base = int64(cur_b) * wpb
        cnt = collect_candidates(words, base, tpw, f, bi, start_slot, limit, cand_slots, cand_tags)
        if cnt == 0:
            # bucket drained by concurrent deletes: take a direct slot
            if try_insert(words, base, wpb, tpw, f, bu, high, cur_tag) >= 0:
                return 1, n, EMPTY
            continue
        chosen = -1
        alt_b = uint64(0)
        alt_tag = uint64(0)
        for j in range(cnt):
            cfp, cc = _split_tag(cand_tags[j], choice_bit)
            tb, tc = _alt(cur_b, cfp, cc, m, mask, policy)
            if bucket_has_empty(words, int64(tb) * wpb, wpb, high):
                chosen = j
                alt_b = tb
                alt_tag = _mk_tag(cfp, tc, choice_bit)
                break
        if chosen >= 0:
            # two-step relocation: copy the candidate out, then swap ourselves in
            alt_base = int64(alt_b) * wpb
            alt_slot = try_insert(words, alt_base, wpb, tpw, f, bu, high, alt_tag)
            if alt_slot < 0:
                continue  # the free slot raced away; retry the round
            oslot = cand_slots[chosen]
            if lane_cas(words, base + oslot // tpw, oslot % tpw, cand_tags[chosen], cur_tag, f):
                return 1, n, EMPTY
            # origin lane changed underfoot: remove the copy we just inserted
            lane_cas(words, alt_base + alt_slot // tpw, alt_slot % tpw, alt_tag, EMPTY, f)
            continue
        # no candidate has room: evict the last one checked and deepen
        oslot = cand_slots[cnt - 1]
        ctag = cand_tags[cnt - 1]
        if not lane_cas(words, base + oslot // tpw, oslot % tpw, ctag, cur_tag, f):
            continue  # slot changed underfoot; retry the round
        cfp, cc = _split_tag(ctag, choice_bit)
        cur_b, nc = _alt(cur_b, cfp, cc, m, mask, policy)
        cur_tag = _mk_tag(cfp, nc, choice_bit)
    lost, _ = _split_tag(cur_tag, choice_bit)
    return 0, max_evictions, lost


@njit(cache=True)
def query_one(words, key, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy):
    key = uint64(key)
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    f = uint64(f)
    bu = uint64(b)
    m = uint64(m)
    mask = uint64(mask)
    high = uint64(high)
    wpb = int64(wpb)
    tpw = int64(tpw)
    # offset policy matches payload bits only (the lane's top bit is residency
    # metadata, not fingerprint), so membership costs one effective bit
    ignore = high if policy == POLICY_OFFSET else uint64(0)
    h = xxh64_u64(key, seed)
    fp, i1, i2 = place_key(h, payload_bits, m, mask, policy)
    if find_tag(words, int64(i1) * wpb, wpb, tpw, f, bu, high, ignore, fp):
        return True
    return find_tag(words, int64(i2) * wpb, wpb, tpw, f, bu, high, ignore, fp)


@njit(cache=True)
def delete_one(words, key, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy):
    key = uint64(key)
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    f = uint64(f)
    bu = uint64(b)
    m = uint64(m)
    mask = uint64(mask)
    high = uint64(high)
    wpb = int64(wpb)
    tpw = int64(tpw)
    choice_bit = uint64(choice_bit)
    h = xxh64_u64(key, seed)
    fp, i1, i2 = place_key(h, payload_bits, m, mask, policy)
    # Unlike queries, deletes match the full lane. A copy of this key can
    # only sit in its primary bucket with the choice bit clear or in its
    # alternate with it set; requiring that keeps a delete from stealing a
    # same-payload copy that belongs to a key with a different bucket pair.
    tag2 = _mk_tag(fp, uint64(1), choice_bit) if policy == POLICY_OFFSET else fp
    zero = uint64(0)
    if remove_tag(words, int64(i1) * wpb, wpb, tpw, f, bu, high, zero, fp) >= 0:
        return True
    return remove_tag(words, int64(i2) * wpb, wpb, tpw, f, bu, high, zero, tag2) >= 0


# ---- batch loops ----

@njit(cache=True, nogil=True)
def hash_batch(keys, seed, out):
    seed = uint64(seed)
    for i in range(keys.shape[0]):
        out[i] = xxh64_u64(keys[i], seed)


@njit(cache=True, nogil=True)
def place_batch(keys, seed, payload_bits, m, mask, policy, out_fp, out_i1, out_i2):
    seed = uint64(seed)
    payload_bits = uint64(payload_bits)
    m = uint64(m)
    mask = uint64(mask)
    for i in range(keys.shape[0]):
        h = xxh64_u64(keys[i], seed)
        fp, i1, i2 = place_key(h, payload_bits, m, mask, policy)
        out_fp[i] = fp
        out_i1[i] = i1
        out_i2[i] = i2


@njit(cache=True)
def insert_batch(
    words, keys, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit,
    policy, strategy, max_evictions, worker, out_ok, out_evictions, out_lost,
):
    """Sequential fast path; the GIL is held for the whole batch."""
    cand_slots = np.empty(max(1, b // 2), dtype=np.int64)
    cand_tags = np.empty(max(1, b // 2), dtype=np.uint64)
    n_ok = 0
    for i in range(keys.shape[0]):
        ok, rounds, lost = insert_one(
            words, keys[i], seed, payload_bits, f, b, m, mask, wpb, tpw, high,
            choice_bit, policy, strategy, max_evictions, worker,
            cand_slots, cand_tags,
        )
        out_ok[i] = ok
        out_evictions[i] = rounds
        out_lost[i] = lost
        n_ok += ok
    return n_ok


@njit(cache=True, nogil=True)
def query_batch(words, keys, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy, out):
    for i in range(keys.shape[0]):
        out[i] = query_one(
            words, keys[i], seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy
        )


@njit(cache=True)
def delete_batch(words, keys, seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy, out):
    n_ok = 0
    for i in range(keys.shape[0]):
        ok = delete_one(
            words, keys[i], seed, payload_bits, f, b, m, mask, wpb, tpw, high, choice_bit, policy
        )
        out[i] = ok
        n_ok += ok
    return n_ok
