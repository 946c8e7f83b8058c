"""
Cuckoo filter in five minutes
=============================

Build a filter sized for a workload, insert keys, test membership,
delete, and round-trip the whole structure through bytes.
"""

import numpy as np

from swarcuckoo import CuckooFilter, FilterConfig, analytic_fpr, size_for

# Size the table for 1.9 million keys at 95% occupancy. size_for rounds
# the bucket count up to a power of two because the default xor placement
# needs one; 16 slots per 16-bit fingerprint means 32 bytes per bucket.
n = 1_900_000
m = size_for(n, alpha_target=0.95)
cfg = FilterConfig(bucket_count=m, fingerprint_bits=16, bucket_slots=16)
filt = CuckooFilter(cfg)
print(f"{m} buckets, {cfg.total_slots} slots, "
      f"{m * cfg.words_per_bucket * 8 / 2**20:.1f} MiB of words")

# Insert a batch of keys. The result reports per-key success and how many
# displacements each insert needed; at this load almost all are zero.
rng = np.random.default_rng(7)
keys = rng.integers(0, 1 << 63, size=n, dtype=np.uint64)
res = filt.insert_batch(keys)
print(f"inserted {res.n_ok}/{n}, load factor {filt.load_factor:.3f}, "
      f"max eviction chain {res.evictions.max()}")

# Every inserted key is found: the structure never gives false negatives.
assert filt.query_batch(keys).all()

# Keys never inserted hit only at the false-positive rate, which the
# analytic model predicts from (fingerprint bits, slots, load) alone.
fresh = rng.integers(0, 1 << 63, size=2_000_000, dtype=np.uint64)
fpr = filt.query_batch(fresh).sum() / len(fresh)
model = analytic_fpr(16, 16, filt.load_factor)
print(f"empirical FPR {fpr:.2e}, model {model:.2e}")

# Deletion removes one stored copy per call, so duplicate inserts behave
# like a multiset.
filt.insert(1234)
filt.insert(1234)
assert filt.delete(1234) and 1234 in filt
assert filt.delete(1234) and 1234 not in filt

# The scalar API mirrors the batch one.
assert not filt.delete(1234)  # nothing left to remove
print(f"occupancy after deletes: {len(filt)}")

# The word array plus a small header round-trips losslessly, so a built
# filter can be shipped to another process and queried there.
blob = filt.to_bytes()
clone = CuckooFilter.from_bytes(blob)
assert clone.query_batch(keys).all()
print(f"serialized {len(blob) / 2**20:.1f} MiB, clone agrees on all keys")
