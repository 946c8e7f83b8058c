"""Cuckoo filter over packed fingerprint words.

The filter stores f-bit fingerprints of 64-bit keys in a flat array of
64-bit words, b slots per bucket and two candidate buckets per key. When
both candidates are full, inserts displace residents along an eviction
chain (depth-first or breadth-first); deletes clear one matching lane;
queries are read-only SWAR scans of both buckets.

Concurrency model: any number of worker threads may insert and delete
concurrently, every shared-word update committing through a single
compare-and-swap; queries may run concurrently with each other but must not
overlap mutations. The phase split is an API contract, not a runtime check;
construct with ``debug_phase=True`` to assert it. Each concurrently active
thread must use its own ``worker`` id: the id selects the eviction PRNG
stream and the occupancy shard.

With one worker and a fixed seed the filter is fully deterministic: the
batch kernels and the per-key driver produce bit-identical word arrays.
"""

from __future__ import annotations

import struct
import threading
from collections import defaultdict
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import _kernels as _k
from .errors import PhaseError
from .placement import Eviction, FilterConfig, Policy, alt_index
from .wordops import HIGH_ONES, MASK64

_GOLDEN = 0x9E3779B97F4A7C15

_MAGIC = b"CKGF"
_VERSION = 1
# magic, version, fingerprint_bits, bucket_slots, bucket_count, policy,
# occupancy, seed -- all little-endian fixed width
_HEADER = struct.Struct("<4sIIIQIQQ")


class InsertResult(NamedTuple):
    """Outcome of a single insert.

    ``lost_fingerprint`` is the payload fingerprint dropped when the
    eviction chain hit its budget (the failure reports the displaced tag it
    was carrying, which is generally not the requested key's own).
    """

    ok: bool
    evictions: int
    lost_fingerprint: Optional[int] = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass
class EvictionStats:
    """Per-insert eviction-round counts with percentile readout."""

    samples: np.ndarray
    failures: int = 0

    def percentile(self, p: float) -> int:
        """Eviction count at percentile ``p`` (an actual sample value)."""
        if len(self.samples) == 0:
            return 0
        return int(np.percentile(self.samples, p, method="inverted_cdf"))

    @property
    def p90(self) -> int:
        return self.percentile(90)

    @property
    def p95(self) -> int:
        return self.percentile(95)

    @property
    def p99(self) -> int:
        return self.percentile(99)

    @property
    def mean(self) -> float:
        return float(self.samples.mean()) if len(self.samples) else 0.0

    @property
    def max(self) -> int:
        return int(self.samples.max()) if len(self.samples) else 0


@dataclass
class BatchInsertResult:
    """Index-aligned per-key insert outcomes."""

    ok: np.ndarray
    evictions: np.ndarray
    lost_fingerprints: np.ndarray

    @property
    def n_ok(self) -> int:
        return int(self.ok.sum())

    @property
    def n_failed(self) -> int:
        return len(self.ok) - self.n_ok

    def eviction_stats(self) -> EvictionStats:
        return EvictionStats(self.evictions.copy(), failures=self.n_failed)


class CuckooFilter:
    """Concurrent cuckoo filter with packed SWAR buckets.

    >>> cfg = FilterConfig(bucket_count=1 << 10)
    >>> filt = CuckooFilter(cfg)
    >>> filt.insert(42).ok
    True
    >>> 42 in filt
    True
    >>> filt.delete(42)
    True
    """

    def __init__(self, cfg: FilterConfig, *, debug_phase: bool = False):
        self.cfg = cfg
        self.words = np.zeros(cfg.total_words, dtype=np.uint64)
        self._shards: defaultdict[int, int] = defaultdict(int)

        self._pol = 0 if cfg.policy is Policy.XOR else 1
        self._strat = 0 if cfg.eviction is Eviction.DFS else 1
        self._b = cfg.bucket_slots
        self._wpb = cfg.words_per_bucket
        self._tpw = cfg.tags_per_word
        self._payload_mask = (1 << cfg.payload_bits) - 1
        self._choice = cfg.choice_bit if self._pol else 0

        self._seed_u = np.uint64(cfg.seed)
        self._payload_u = np.uint64(cfg.payload_bits)
        self._f_u = np.uint64(cfg.fingerprint_bits)
        self._m_u = np.uint64(cfg.bucket_count)
        self._mask_u = np.uint64(cfg.index_mask)
        self._high_u = np.uint64(HIGH_ONES[cfg.fingerprint_bits])
        self._choice_u = np.uint64(self._choice)
        # offset membership compares payload bits only; the lane's top bit
        # is residency metadata, masked out of the SWAR comparison
        self._kargs = (
            self._seed_u, self._payload_u, self._f_u, self._b, self._m_u,
            self._mask_u, self._wpb, self._tpw, self._high_u, self._choice_u,
            self._pol,
        )

        self._debug = debug_phase
        self._mut_depth = 0
        self._read_depth = 0

    # ---- bookkeeping ----

    @property
    def occupancy(self) -> int:
        """Stored-item count: successful inserts minus successful deletes.

        Exact at quiescent points; shards may be mid-update while mutating
        workers are running.
        """
        return sum(self._shards.values())

    @property
    def load_factor(self) -> float:
        return self.occupancy / self.cfg.total_slots

    def __len__(self) -> int:
        return self.occupancy

    def __contains__(self, key: int) -> bool:
        return self.query(key)

    def __repr__(self) -> str:
        c = self.cfg
        return (
            f"CuckooFilter(f={c.fingerprint_bits}, b={c.bucket_slots}, "
            f"m={c.bucket_count}, policy={c.policy.value}, "
            f"eviction={c.eviction.value}, occupancy={self.occupancy})"
        )

    def clear(self) -> None:
        """Reset to the freshly constructed state."""
        self.words[:] = 0
        self._shards.clear()

    def stored_tags(self) -> np.ndarray:
        """Snapshot of every lane as an (m, b) uint64 array; 0 means empty.

        Intended for post-quiescence invariant checks (reachability, stored
        count vs occupancy), not for hot paths.
        """
        c = self.cfg
        w = self.words.reshape(c.bucket_count, c.words_per_bucket)
        lane_mask = np.uint64((1 << c.fingerprint_bits) - 1)
        out = np.empty((c.bucket_count, c.bucket_slots), dtype=np.uint64)
        for slot in range(c.bucket_slots):
            col = w[:, slot // self._tpw]
            shift = np.uint64(c.fingerprint_bits * (slot % self._tpw))
            out[:, slot] = (col >> shift) & lane_mask
        return out

    # ---- phase assertions (debug mode only) ----

    def _enter_mutate(self) -> None:
        if self._read_depth:
            raise PhaseError("mutation started while queries are in flight")
        self._mut_depth += 1

    def _exit_mutate(self) -> None:
        self._mut_depth -= 1

    def _enter_read(self) -> None:
        if self._mut_depth:
            raise PhaseError("query started while mutations are in flight")
        self._read_depth += 1

    def _exit_read(self) -> None:
        self._read_depth -= 1

    # ---- scalar operations ----

    def insert(self, key: int, worker: int = 0) -> InsertResult:
        """Store the key's fingerprint; evict residents if both buckets are
        full. On failure the filter keeps the requested key and reports the
        displaced tag that was dropped."""
        if self._debug:
            self._enter_mutate()
            try:
                return self._insert_driver(key, worker)
            finally:
                self._exit_mutate()
        return self._insert_driver(key, worker)

    def query(self, key: int) -> bool:
        """Membership test; never false for a currently stored key."""
        if self._debug:
            self._enter_read()
            try:
                return bool(_k.query_one(self.words, np.uint64(key & MASK64), *self._kargs))
            finally:
                self._exit_read()
        return bool(_k.query_one(self.words, np.uint64(key & MASK64), *self._kargs))

    def delete(self, key: int, worker: int = 0) -> bool:
        """Clear one lane matching the key's fingerprint; False if absent.

        Only delete keys that were inserted: removing a never-inserted key
        can clear a colliding resident's lane.
        """
        if self._debug:
            self._enter_mutate()
            try:
                return self._delete_driver(key, worker)
            finally:
                self._exit_mutate()
        return self._delete_driver(key, worker)

    # ---- per-key drivers (compose GIL-atomic kernel sections) ----

    def _insert_driver(self, key: int, worker: int) -> InsertResult:
        words = self.words
        status, h, fp, i1, i2 = _k.insert_ready(
            words, np.uint64(key & MASK64), *self._kargs
        )
        if status == 1:
            self._shards[worker] += 1
            return InsertResult(True, 0)

        cfg = self.cfg
        f_u, b, wpb, tpw = self._f_u, self._b, self._wpb, self._tpw
        high = self._high_u
        choice = self._choice
        fp = int(fp)
        tag1 = fp
        tag2 = fp | choice

        state = int(_k.rng_init(self._seed_u, h, np.uint64(worker)))
        state = (state + _GOLDEN) & MASK64
        r = int(_k._sm_mix(state))
        if r & 1 == 0:
            cur_b, cur_tag = int(i1), tag1
        else:
            cur_b, cur_tag = int(i2), tag2

        max_ev = cfg.max_evictions
        if self._strat == _k.EVICT_DFS:
            for n in range(1, max_ev + 1):
                state = (state + _GOLDEN) & MASK64
                victim = int(_k._sm_mix(state)) % b
                evicted = int(_k.swap_slot(words, cur_b * wpb, tpw, f_u, victim, cur_tag))
                if evicted == 0:
                    # a concurrent delete freed the slot; we just used it
                    self._shards[worker] += 1
                    return InsertResult(True, n)
                efp = evicted & self._payload_mask
                ec = 1 if evicted & choice else 0
                cur_b, nc = alt_index(cur_b, efp, ec, cfg)
                cur_tag = efp | (choice if nc else 0)
                if _k.try_insert(words, cur_b * wpb, wpb, tpw, f_u, b, high, cur_tag) >= 0:
                    self._shards[worker] += 1
                    return InsertResult(True, n)
            return InsertResult(False, max_ev, cur_tag & self._payload_mask)

        # BFS: probe up to b//2 candidates for a free alternate before deepening
        limit = b // 2
        cand_slots = np.empty(max(1, limit), dtype=np.int64)
        cand_tags = np.empty(max(1, limit), dtype=np.uint64)
        for n in range(1, max_ev + 1):
            state = (state + _GOLDEN) & MASK64
            start_slot = int(_k._sm_mix(state)) % b
            base = cur_b * wpb
            cnt = _k.collect_candidates(
                words, base, tpw, f_u, b, start_slot, limit, cand_slots, cand_tags
            )
            if cnt == 0:
                # bucket drained by concurrent deletes: take a direct slot
                if _k.try_insert(words, base, wpb, tpw, f_u, b, high, cur_tag) >= 0:
                    self._shards[worker] += 1
                    return InsertResult(True, n)
                continue
            chosen = -1
            alt_b = alt_tag = 0
            for j in range(cnt):
                ctag = int(cand_tags[j])
                cfp = ctag & self._payload_mask
                cc = 1 if ctag & choice else 0
                tb, tc = alt_index(cur_b, cfp, cc, cfg)
                if _k.bucket_has_empty(words, tb * wpb, wpb, high):
                    chosen, alt_b = j, tb
                    alt_tag = cfp | (choice if tc else 0)
                    break
            if chosen >= 0:
                # two-step relocation: copy the candidate out, then swap in
                alt_base = alt_b * wpb
                alt_slot = int(_k.try_insert(words, alt_base, wpb, tpw, f_u, b, high, alt_tag))
                if alt_slot < 0:
                    continue  # the free slot raced away; retry the round
                oslot = int(cand_slots[chosen])
                if _k.lane_cas(
                    words, base + oslot // tpw, oslot % tpw, cand_tags[chosen], cur_tag, f_u
                ):
                    self._shards[worker] += 1
                    return InsertResult(True, n)
                # origin lane changed underfoot: remove the copy just inserted
                _k.lane_cas(
                    words, alt_base + alt_slot // tpw, alt_slot % tpw, alt_tag, 0, f_u
                )
                continue
            # no candidate has room: evict the last one checked and deepen
            oslot = int(cand_slots[cnt - 1])
            ctag = int(cand_tags[cnt - 1])
            if not _k.lane_cas(words, base + oslot // tpw, oslot % tpw, ctag, cur_tag, f_u):
                continue  # slot changed underfoot; retry the round
            cfp = ctag & self._payload_mask
            cc = 1 if ctag & choice else 0
            cur_b, nc = alt_index(cur_b, cfp, cc, cfg)
            cur_tag = cfp | (choice if nc else 0)
        return InsertResult(False, max_ev, cur_tag & self._payload_mask)

    def _delete_driver(self, key: int, worker: int) -> bool:
        words = self.words
        fp, i1, i2 = _k.place_one(
            np.uint64(key & MASK64), self._seed_u, self._payload_u,
            self._m_u, self._mask_u, self._pol,
        )
        f_u, b, wpb, tpw = self._f_u, self._b, self._wpb, self._tpw
        zero = np.uint64(0)
        # full-lane matching: primary copies carry a clear choice bit, alternate
        # copies a set one, so a delete never strips a copy reachable only
        # through some other key's bucket pair
        probes = ((int(i1), fp), (int(i2), np.uint64(int(fp) | self._choice)))
        for bucket, tag in probes:
            if _k.remove_tag(
                words, bucket * wpb, wpb, tpw, f_u, b, self._high_u, zero, tag
            ) >= 0:
                self._shards[worker] -= 1
                return True
        return False

    # ---- batch operations ----

    def _chunks(self, n: int, workers: int) -> list[tuple[int, int]]:
        bounds = [(i * n) // workers for i in range(workers + 1)]
        return [(bounds[i], bounds[i + 1]) for i in range(workers)]

    @staticmethod
    def _as_keys(keys) -> np.ndarray:
        arr = np.ascontiguousarray(keys, dtype=np.uint64)
        if arr.ndim != 1:
            raise ValueError("keys must be one-dimensional")
        return arr

    def insert_batch(self, keys, workers: int = 1) -> BatchInsertResult:
        """Insert every key; results are index-aligned with the input.

        With ``workers=1`` the whole batch runs in one compiled loop (and is
        deterministic for a fixed seed); with more, the batch is split into
        contiguous chunks driven by one thread each.
        """
        keys = self._as_keys(keys)
        n = len(keys)
        ok = np.zeros(n, dtype=np.uint8)
        ev = np.zeros(n, dtype=np.int64)
        lost = np.zeros(n, dtype=np.uint64)
        if self._debug:
            self._enter_mutate()
        try:
            if workers <= 1 or n == 0:
                n_ok = _k.insert_batch(
                    self.words, keys, *self._kargs, self._strat,
                    self.cfg.max_evictions, np.uint64(0), ok, ev, lost,
                )
                self._shards[0] += int(n_ok)
            else:
                def run(lo: int, hi: int, w: int) -> None:
                    for idx in range(lo, hi):
                        res = self._insert_driver(int(keys[idx]), w)
                        ok[idx] = res.ok
                        ev[idx] = res.evictions
                        if res.lost_fingerprint is not None:
                            lost[idx] = res.lost_fingerprint

                threads = [
                    threading.Thread(target=run, args=(lo, hi, w))
                    for w, (lo, hi) in enumerate(self._chunks(n, workers))
                ]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        finally:
            if self._debug:
                self._exit_mutate()
        return BatchInsertResult(ok.view(np.bool_), ev, lost)

    def query_batch(self, keys, workers: int = 1) -> np.ndarray:
        """Boolean membership per key; read-only and safe to parallelize.

        The query kernel releases the GIL, so multi-worker reads genuinely
        overlap.
        """
        keys = self._as_keys(keys)
        n = len(keys)
        out = np.zeros(n, dtype=np.uint8)
        if self._debug:
            self._enter_read()
        try:
            if workers <= 1 or n == 0:
                _k.query_batch(self.words, keys, *self._kargs, out)
            else:
                threads = [
                    threading.Thread(
                        target=_k.query_batch,
                        args=(self.words, keys[lo:hi], *self._kargs, out[lo:hi]),
                    )
                    for lo, hi in self._chunks(n, workers)
                ]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        finally:
            if self._debug:
                self._exit_read()
        return out.view(np.bool_)

    def delete_batch(self, keys, workers: int = 1) -> np.ndarray:
        """Delete each key once; True where a matching lane was cleared."""
        keys = self._as_keys(keys)
        n = len(keys)
        out = np.zeros(n, dtype=np.uint8)
        if self._debug:
            self._enter_mutate()
        try:
            if workers <= 1 or n == 0:
                n_ok = _k.delete_batch(self.words, keys, *self._kargs, out)
                self._shards[0] -= int(n_ok)
            else:
                def run(lo: int, hi: int, w: int) -> None:
                    for idx in range(lo, hi):
                        out[idx] = self._delete_driver(int(keys[idx]), w)

                threads = [
                    threading.Thread(target=run, args=(lo, hi, w))
                    for w, (lo, hi) in enumerate(self._chunks(n, workers))
                ]
                for t in threads:
                    t.start()
                for t in threads:
                    t.join()
        finally:
            if self._debug:
                self._exit_mutate()
        return out.view(np.bool_)

    def collect_eviction_stats(
        self, keys, prefill_fraction: float = 0.75, workers: int = 1
    ) -> EvictionStats:
        """Insert all keys, sampling eviction counts only past the prefill.

        The first ``prefill_fraction`` of the keys brings the filter to the
        interesting load; the remainder is the measured tail.
        """
        if not 0.0 <= prefill_fraction < 1.0:
            raise ValueError("prefill_fraction must be in [0, 1)")
        keys = self._as_keys(keys)
        cut = int(len(keys) * prefill_fraction)
        if cut:
            self.insert_batch(keys[:cut], workers=workers)
        tail = self.insert_batch(keys[cut:], workers=workers)
        return tail.eviction_stats()

    # ---- serialization ----

    def to_bytes(self) -> bytes:
        """Header plus the raw little-endian word array."""
        c = self.cfg
        header = _HEADER.pack(
            _MAGIC, _VERSION, c.fingerprint_bits, c.bucket_slots,
            c.bucket_count, self._pol, self.occupancy, c.seed,
        )
        return header + self.words.astype("<u8", copy=False).tobytes()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_bytes(
        cls, data: bytes, *, eviction: str | Eviction = Eviction.DFS,
        max_evictions: int = 500,
    ) -> "CuckooFilter":
        """Rebuild a filter with bit-identical query behavior.

        The header carries placement state only; eviction strategy and
        budget are runtime knobs supplied by the caller (defaults apply).
        """
        if len(data) < _HEADER.size:
            raise ValueError("truncated filter dump: header incomplete")
        magic, version, f, b, m, pol, occupancy, seed = _HEADER.unpack_from(data)
        if magic != _MAGIC:
            raise ValueError(f"bad magic {magic!r}, expected {_MAGIC!r}")
        if version != _VERSION:
            raise ValueError(f"unsupported dump version {version}")
        if pol not in (0, 1):
            raise ValueError(f"unknown policy code {pol}")
        cfg = FilterConfig(
            bucket_count=m, fingerprint_bits=f, bucket_slots=b,
            policy=Policy.XOR if pol == 0 else Policy.OFFSET,
            eviction=eviction, max_evictions=max_evictions, seed=seed,
        )
        body = data[_HEADER.size:]
        expected = cfg.total_words * 8
        if len(body) != expected:
            raise ValueError(
                f"word array is {len(body)} bytes, expected {expected}"
            )
        filt = cls(cfg)
        filt.words[:] = np.frombuffer(body, dtype="<u8")
        filt._shards[0] = occupancy
        return filt

    @classmethod
    def load(cls, path, **kwargs) -> "CuckooFilter":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read(), **kwargs)
