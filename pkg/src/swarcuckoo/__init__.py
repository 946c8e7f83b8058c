"""swarcuckoo: a concurrent cuckoo filter with SWAR-packed fingerprints.

Approximate membership with deletions: f-bit key fingerprints packed into
64-bit words, scanned lane-parallel with plain integer arithmetic, updated
through single-word compare-and-swap. Ships two bucket-placement policies
(xor partial-key hashing and an offset scheme for non-power-of-two tables),
two eviction strategies (depth-first and breadth-first), an analytic
false-positive model, a benchmark harness, and a FASTA k-mer ingestion
pipeline.
"""

from .analytics import analytic_fpr, effective_fingerprint_bits, size_for
from .errors import ConfigError, FastaError, PhaseError
from .filter import BatchInsertResult, CuckooFilter, EvictionStats, InsertResult
from .kmer import kmer_bench, pack_kmer, stream_kmers
from .placement import Eviction, FilterConfig, Placement, Policy, derive_placement

__version__ = "0.1.0"

__all__ = [
    "BatchInsertResult",
    "ConfigError",
    "CuckooFilter",
    "Eviction",
    "EvictionStats",
    "FastaError",
    "FilterConfig",
    "InsertResult",
    "PhaseError",
    "Placement",
    "Policy",
    "analytic_fpr",
    "derive_placement",
    "effective_fingerprint_bits",
    "kmer_bench",
    "pack_kmer",
    "size_for",
    "stream_kmers",
    "__version__",
]
