"""
Counting DNA k-mers through the filter
======================================

Each window of k bases packs into 2k bits (A=00, C=01, G=10, T=11), so a
31-mer fits a 64-bit key with room to spare. The streamer walks FASTA
records with a rolling window, restarting at record boundaries and at
ambiguous bases, and feeds packed keys straight into the filter.
"""

import tempfile
from collections import Counter
from pathlib import Path

import numpy as np

from swarcuckoo import CuckooFilter, FilterConfig
from swarcuckoo.bench import RunSpec
from swarcuckoo.kmer import kmer_bench, pack_kmer, stream_kmers

# The packing is positional: the first base lands in the highest bit pair.
print(f"ACGT -> {pack_kmer('ACGT')} (0b{pack_kmer('ACGT'):08b})")
print(f"ACGN -> {pack_kmer('ACGN')} (ambiguous bases have no code)")

# A small FASTA: two records, soft-masked lowercase, one N that splits the
# second record's windows into two separate runs.
fasta = b""">toy_contig_1
ACGTACGTACGTACGTACGTACGTACGTACGTACGT
>toy_contig_2
acgtacgtacgtacgtNACGTACGTACGTACGTACGTACGT
"""
tmp = Path(tempfile.mkstemp(suffix=".fasta")[1])
tmp.write_bytes(fasta)

# Stream all 11-mers. Lowercase packs like uppercase; windows never span
# the N or the record boundary.
k = 11
kmers = list(stream_kmers(tmp, k))
counts = Counter(kmers)
print(f"\n{len(kmers)} {k}-mers, {len(counts)} distinct, "
      f"most common appears {counts.most_common(1)[0][1]} times")

# Distinct membership: insert every window once, then query. Duplicated
# windows are fine too (the filter is a multiset), but presence testing
# only needs the distinct set.
distinct = np.fromiter(counts.keys(), dtype=np.uint64)
filt = CuckooFilter(FilterConfig(bucket_count=1 << 4, bucket_slots=4))
filt.insert_batch(distinct)
assert filt.query_batch(np.array(kmers, dtype=np.uint64)).all()
print(f"all streamed windows query positive "
      f"(load factor {filt.load_factor:.2f})")

# The bench wrapper times the full path per phase: parse+pack+insert, then
# query, then delete, reporting keys/s over the file's window count.
spec = RunSpec(bucket_count=1 << 4, bucket_slots=4, repetitions=1, warmup=0)
for rep in kmer_bench(tmp, k, spec):
    print(f"  {rep.op:>9}: {rep.n_keys} keys, {rep.throughput / 1e3:.0f} k/s")

tmp.unlink()
