"""CuckooFilter behavior against an exact set-model oracle."""

import threading
from collections import Counter

import numpy as np
import pytest

from swarcuckoo import _kernels
from swarcuckoo import wordops
from swarcuckoo.errors import PhaseError
from swarcuckoo.filter import BatchInsertResult, CuckooFilter, EvictionStats, InsertResult
from swarcuckoo.placement import Eviction, FilterConfig, Policy, derive_placement

COMBOS = [
    ("xor", "dfs"), ("xor", "bfs"), ("offset", "dfs"), ("offset", "bfs"),
]


def make_cfg(policy="xor", eviction="dfs", m=None, **kw):
    if m is None:
        m = (1 << 8) if policy == "xor" else 3 * (1 << 6)
    return FilterConfig(bucket_count=m, policy=policy, eviction=eviction, **kw)


# ---- basic semantics ----

def test_new_filter_is_empty():
    filt = CuckooFilter(make_cfg())
    assert len(filt) == 0
    assert filt.load_factor == 0.0
    assert np.count_nonzero(filt.words) == 0
    assert not filt.query(123)
    assert not filt.delete(123)
    assert filt.words.shape == (filt.cfg.total_words,)


def test_insert_query_delete_round_trip():
    filt = CuckooFilter(make_cfg())
    res = filt.insert(42)
    assert res is not None and res.ok and bool(res)
    assert res.evictions == 0 and res.lost_fingerprint is None
    assert 42 in filt and len(filt) == 1
    assert filt.delete(42)
    assert 42 not in filt and len(filt) == 0


def test_duplicate_inserts_delete_one_copy_at_a_time():
    filt = CuckooFilter(make_cfg())
    for _ in range(5):
        assert filt.insert(7).ok
    assert len(filt) == 5
    assert filt.delete(7)
    assert filt.query(7), "remaining copies must stay visible"
    for _ in range(4):
        assert filt.delete(7)
    assert not filt.query(7)
    assert len(filt) == 0


def test_repr_mentions_geometry():
    filt = CuckooFilter(make_cfg())
    text = repr(filt)
    assert "f=16" in text and "b=16" in text and "xor" in text


def test_clear_resets_state():
    filt = CuckooFilter(make_cfg())
    filt.insert_batch(np.arange(100, dtype=np.uint64))
    filt.clear()
    assert len(filt) == 0 and np.count_nonzero(filt.words) == 0


def test_keys_must_be_one_dimensional():
    filt = CuckooFilter(make_cfg())
    with pytest.raises(ValueError):
        filt.insert_batch(np.zeros((2, 2), dtype=np.uint64))


# ---- set-model oracle ----

@pytest.mark.parametrize("policy,eviction", COMBOS)
def test_randomized_ops_match_set_model(policy, eviction):
    cfg = make_cfg(policy, eviction, seed=17)
    filt = CuckooFilter(cfg)
    model = Counter()
    rng = np.random.default_rng(hash((policy, eviction)) & 0xFFFF)
    pool = rng.integers(0, 1 << 32, size=30_000, dtype=np.uint64)
    live = []
    for step in range(25_000):
        do_insert = (rng.random() < 0.65) if filt.load_factor < 0.88 else (rng.random() < 0.35)
        if do_insert or not live:
            key = int(pool[step % len(pool)])
            assert filt.insert(key).ok, "insert failed below 0.9 load"
            model[key] += 1
            live.append(key)
        else:
            idx = int(rng.integers(0, len(live)))
            key = live[idx]
            assert filt.delete(key), "false negative on delete of a stored key"
            model[key] -= 1
            if model[key] == 0:
                del model[key]
            live[idx] = live[-1]
            live.pop()
        if step % 5000 == 4999:
            assert len(filt) == sum(model.values()), "occupancy drift"
    stored = np.fromiter(model.elements(), dtype=np.uint64)
    assert filt.query_batch(stored).all(), "false negative after randomized ops"
    assert len(filt) == len(stored)
    assert int(np.count_nonzero(filt.stored_tags())) == len(filt)
    # drain completely
    for key, count in model.items():
        for _ in range(count):
            assert filt.delete(key)
    assert len(filt) == 0
    assert np.count_nonzero(filt.words) == 0


def test_batch_equals_sequential_membership():
    cfg = make_cfg(seed=5)
    keys = np.random.default_rng(1).integers(0, 1 << 32, size=2000, dtype=np.uint64)
    a = CuckooFilter(cfg)
    ra = a.insert_batch(keys)
    b = CuckooFilter(cfg)
    for key in keys:
        b.insert(int(key))
    assert np.array_equal(a.words, b.words), "batch and per-key paths diverged"
    assert a.occupancy == b.occupancy == ra.n_ok
    assert a.query_batch(keys).all() and b.query_batch(keys).all()


@pytest.mark.parametrize("policy,eviction", COMBOS)
def test_driver_kernel_bit_identity_under_pressure(policy, eviction):
    cfg = make_cfg(policy, eviction, seed=11)
    n = int(0.97 * cfg.total_slots)
    keys = np.random.default_rng(3).integers(0, 1 << 32, size=n, dtype=np.uint64)
    a = CuckooFilter(cfg)
    ra = a.insert_batch(keys)
    assert ra.evictions.max() > 0, "test needs eviction chains to be meaningful"
    b = CuckooFilter(cfg)
    rb = [b.insert(int(k)) for k in keys]
    assert np.array_equal(a.words, b.words)
    assert np.array_equal(ra.evictions, np.array([r.evictions for r in rb]))
    lost = np.array(
        [0 if r.lost_fingerprint is None else r.lost_fingerprint for r in rb],
        dtype=np.uint64,
    )
    assert np.array_equal(ra.lost_fingerprints, lost)


# ---- engineered capacity failure ----

def test_overfilled_bucket_pair_fails_exactly_once():
    # brute-force keys sharing one candidate-bucket pair; the pair holds 2b
    # fingerprints, so inserting 2b+1 must fail exactly once, after the full
    # eviction budget, reporting the dropped fingerprint
    cfg = FilterConfig(bucket_count=16, bucket_slots=4, max_evictions=60, seed=0)
    pairs = {}
    key = 0
    target = None
    while target is None:
        place = derive_placement(key, cfg)
        pair = (min(place.i1, place.i2), max(place.i1, place.i2))
        if place.i1 != place.i2:
            pairs.setdefault(pair, []).append(key)
            if len(pairs[pair]) == 2 * cfg.bucket_slots + 1:
                target = pairs[pair]
        key += 1
    filt = CuckooFilter(cfg)
    results = [filt.insert(k) for k in target]
    fails = [r for r in results if not r.ok]
    assert len(fails) == 1
    assert fails[0].evictions == cfg.max_evictions
    assert fails[0].lost_fingerprint is not None and fails[0].lost_fingerprint > 0
    assert len(filt) == 2 * cfg.bucket_slots
    assert int(np.count_nonzero(filt.stored_tags())) == 2 * cfg.bucket_slots


def test_fill_to_95_percent_has_no_failures():
    cfg = make_cfg(m=1 << 10, seed=4)
    n = int(0.95 * cfg.total_slots)
    keys = np.random.default_rng(8).integers(0, 1 << 32, size=n, dtype=np.uint64)
    res = CuckooFilter(cfg).insert_batch(keys)
    assert res.n_failed == 0 and res.n_ok == n


# ---- eviction stats ----

def test_eviction_stats_percentiles():
    stats = EvictionStats(np.array([0, 0, 0, 0, 0, 0, 0, 0, 0, 7], dtype=np.int64))
    assert stats.percentile(50) == 0
    assert stats.p99 == 7
    assert stats.percentile(100) == 7
    assert stats.max == 7 and stats.mean == pytest.approx(0.7)
    ps = [stats.percentile(p) for p in range(0, 101, 5)]
    assert ps == sorted(ps), "percentile must be monotone in p"
    assert EvictionStats(np.zeros(100, dtype=np.int64)).p99 == 0
    assert EvictionStats(np.array([], dtype=np.int64)).p99 == 0


def test_collect_eviction_stats_measures_tail_only():
    cfg = make_cfg(m=1 << 9, seed=2)
    n = int(0.95 * cfg.total_slots)
    keys = np.random.default_rng(12).integers(0, 1 << 32, size=n, dtype=np.uint64)
    filt = CuckooFilter(cfg)
    stats = filt.collect_eviction_stats(keys, prefill_fraction=0.75)
    assert len(stats.samples) == n - int(0.75 * n)
    assert len(filt) == n
    assert stats.failures == 0
    with pytest.raises(ValueError):
        filt.collect_eviction_stats(keys, prefill_fraction=1.5)


def test_all_direct_inserts_sample_zero():
    cfg = make_cfg(m=1 << 10)
    keys = np.arange(100, dtype=np.uint64)
    stats = CuckooFilter(cfg).collect_eviction_stats(keys, prefill_fraction=0.0)
    assert stats.samples.max() == 0 and stats.p99 == 0


# ---- BFS two-step relocation rollback ----

def test_bfs_rollback_clears_inserted_copy(monkeypatch):
    cfg = FilterConfig(bucket_count=1 << 8, bucket_slots=16, eviction="bfs", seed=21)
    filt = CuckooFilter(cfg)
    rng = np.random.default_rng(31)
    filt.insert_batch(rng.integers(0, 1 << 32, size=int(0.90 * cfg.total_slots), dtype=np.uint64))
    # find a fresh key whose candidate buckets are both full
    tags = filt.stored_tags()
    full = {i for i in range(cfg.bucket_count) if np.count_nonzero(tags[i]) == cfg.bucket_slots}
    probe = 1 << 40
    while True:
        place = derive_placement(probe, cfg)
        if place.i1 in full and place.i2 in full:
            break
        probe += 1

    real_cas = _kernels.lane_cas
    state = {"armed": True, "sabotaged": False}

    def flaky_cas(words, wi, lane, expected, new, f):
        # simulate a concurrent writer racing the origin-bucket CAS once
        if state["armed"] and int(new) != 0 and int(expected) != 0:
            state["armed"] = False
            state["sabotaged"] = True
            stale = (int(expected) ^ 1) or 2
            words[wi] = np.uint64(wordops.replace_tag(int(words[wi]), int(lane), stale, 16))
        return real_cas(words, wi, lane, expected, new, f)

    monkeypatch.setattr(_kernels, "lane_cas", flaky_cas)
    before = int(np.count_nonzero(filt.stored_tags()))
    res = filt.insert(probe)
    monkeypatch.setattr(_kernels, "lane_cas", real_cas)
    assert state["sabotaged"], "test did not reach the two-step relocation"
    assert res.ok
    after = int(np.count_nonzero(filt.stored_tags()))
    assert after == before + 1, "failed relocation leaked a duplicate tag"
    assert len(filt) == after, "occupancy out of step with stored tags"


# ---- concurrency ----

@pytest.mark.parametrize("eviction", ["dfs", "bfs"])
def test_concurrent_inserts_then_query_phase(eviction):
    cfg = FilterConfig(bucket_count=1 << 11, eviction=eviction, seed=6)
    n = int(0.95 * cfg.total_slots)
    keys = np.random.default_rng(14).integers(0, 1 << 32, size=n, dtype=np.uint64)
    filt = CuckooFilter(cfg)
    res = filt.insert_batch(keys, workers=8)
    assert res.n_failed == 0
    assert filt.query_batch(keys, workers=8).all()
    assert len(filt) == n == int(np.count_nonzero(filt.stored_tags()))


def test_concurrent_mixed_insert_delete():
    cfg = FilterConfig(bucket_count=1 << 11, eviction="bfs", seed=7)
    slots = cfg.total_slots
    rng = np.random.default_rng(15)
    doomed = rng.integers(0, 1 << 31, size=slots // 2, dtype=np.uint64)
    fresh = rng.integers(1 << 31, 1 << 32, size=slots // 4, dtype=np.uint64)
    filt = CuckooFilter(cfg)
    assert filt.insert_batch(doomed).n_failed == 0

    def insert_part(w):
        for key in fresh[w::4]:
            filt.insert(int(key), worker=w)

    def delete_part(w):
        for key in doomed[w::4]:
            filt.delete(int(key), worker=4 + w)

    threads = [threading.Thread(target=insert_part, args=(w,)) for w in range(4)]
    threads += [threading.Thread(target=delete_part, args=(w,)) for w in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert filt.query_batch(fresh).all(), "false negative for surviving keys"
    assert len(filt) == int(np.count_nonzero(filt.stored_tags())), "occupancy drift"


def test_phase_guard_raises_in_debug_mode():
    filt = CuckooFilter(make_cfg(), debug_phase=True)
    filt.insert(1)  # phases entered and exited cleanly
    filt._enter_mutate()
    with pytest.raises(PhaseError):
        filt.query(1)
    with pytest.raises(PhaseError):
        filt.query_batch(np.array([1], dtype=np.uint64))
    filt._exit_mutate()
    filt._enter_read()
    with pytest.raises(PhaseError):
        filt.insert(2)
    with pytest.raises(PhaseError):
        filt.delete_batch(np.array([1], dtype=np.uint64))
    filt._exit_read()
    assert filt.query(1)


# ---- serialization ----

def roundtrip(filt):
    return CuckooFilter.from_bytes(filt.to_bytes())


@pytest.mark.parametrize("policy", ["xor", "offset"])
def test_serialization_round_trip(policy, tmp_path):
    cfg = make_cfg(policy, "bfs", seed=9)
    filt = CuckooFilter(cfg)
    keys = np.random.default_rng(2).integers(0, 1 << 32, size=int(0.9 * cfg.total_slots), dtype=np.uint64)
    filt.insert_batch(keys)
    path = tmp_path / "dump.ckgf"
    filt.save(path)
    back = CuckooFilter.load(path)
    assert np.array_equal(filt.words, back.words)
    assert back.occupancy == filt.occupancy
    assert back.cfg.policy is filt.cfg.policy
    assert back.to_bytes() == filt.to_bytes()
    probes = np.random.default_rng(3).integers(0, 1 << 64, size=20_000, dtype=np.uint64)
    assert np.array_equal(filt.query_batch(probes), back.query_batch(probes))


def test_load_respects_eviction_override():
    filt = CuckooFilter(make_cfg(eviction="bfs"))
    back = CuckooFilter.from_bytes(filt.to_bytes(), eviction="bfs", max_evictions=9)
    assert back.cfg.eviction is Eviction.BFS
    assert back.cfg.max_evictions == 9
    default = CuckooFilter.from_bytes(filt.to_bytes())
    assert default.cfg.eviction is Eviction.DFS


def test_from_bytes_rejects_corruption():
    blob = CuckooFilter(make_cfg()).to_bytes()
    with pytest.raises(ValueError, match="magic"):
        CuckooFilter.from_bytes(b"XXXX" + blob[4:])
    with pytest.raises(ValueError, match="version"):
        CuckooFilter.from_bytes(blob[:4] + b"\x63\x00\x00\x00" + blob[8:])
    with pytest.raises(ValueError, match="header"):
        CuckooFilter.from_bytes(blob[:10])
    with pytest.raises(ValueError, match="bytes"):
        CuckooFilter.from_bytes(blob[:-8])


def test_serialized_dumps_bit_identical_across_runs():
    for eviction in ("dfs", "bfs"):
        cfg = make_cfg(eviction=eviction, seed=33)
        keys = np.random.default_rng(44).integers(0, 1 << 32, size=int(0.96 * cfg.total_slots), dtype=np.uint64)
        dumps = set()
        for _ in range(3):
            filt = CuckooFilter(cfg)
            filt.insert_batch(keys)
            dumps.add(filt.to_bytes())
        assert len(dumps) == 1, f"{eviction} fill is not deterministic"


# ---- structural invariants ----

def test_stored_tags_reachability_offset_choice_bits():
    cfg = make_cfg("offset", "dfs", seed=10)
    filt = CuckooFilter(cfg)
    keys = np.random.default_rng(5).integers(0, 1 << 32, size=int(0.9 * cfg.total_slots), dtype=np.uint64)
    filt.insert_batch(keys)
    tags = filt.stored_tags()
    payload_mask = (1 << cfg.payload_bits) - 1
    occupied = tags[tags != 0]
    assert len(occupied) == len(filt)
    # a stored lane always carries a nonzero payload fingerprint
    assert (occupied.astype(np.int64) & payload_mask > 0).all()


def test_worker_ids_shard_the_occupancy_counter():
    filt = CuckooFilter(make_cfg())
    filt.insert(1, worker=0)
    filt.insert(2, worker=3)
    filt.insert(3, worker=9)
    assert len(filt) == 3
    assert filt.delete(2, worker=5)
    assert len(filt) == 2
