"""FASTA k-mer ingestion: 2-bit base packing and sliding-window streaming.

Each k-mer (k <= 31) packs into one 64-bit key, two bits per base with the
leftmost base in the most significant used pair, so lexicographic k-mer
order equals numeric order. Windows containing ambiguous bases (anything
outside ACGT, e.g. N) are skipped, and windows never span FASTA records.

K-mers are streamed raw-strand with no reverse-complement canonicalization
and no distinctness pass: duplicates are handed to the filter as duplicates.
"""

from __future__ import annotations

import time
from dataclasses import replace
from typing import Iterable, Iterator, Optional

import numpy as np

from .bench import BenchReport, RunSpec, _report
from .errors import FastaError
from .filter import CuckooFilter

_BASE_CODES = {"A": 0, "C": 1, "G": 2, "T": 3}
_BASE_CODES.update({b.lower(): c for b, c in _BASE_CODES.items()})


def pack_kmer(bases: str) -> Optional[int]:
    """Pack a length-k base string into an integer, or None if ambiguous.

    >>> pack_kmer("ACGT")
    27
    >>> pack_kmer("AAAA")
    0
    >>> pack_kmer("ACGN") is None
    True
    """
    if not 1 <= len(bases) <= 31:
        raise ValueError(f"k must be in [1, 31], got {len(bases)}")
    value = 0
    for ch in bases:
        code = _BASE_CODES.get(ch)
        if code is None:
            return None
        value = (value << 2) | code
    return value


def _stream_lines(lines: Iterable[str], k: int) -> Iterator[int]:
    mask = (1 << (2 * k)) - 1
    value = 0
    fill = 0
    saw_header = False
    for line_number, line in enumerate(lines, 1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(">"):
            saw_header = True
            value = fill = 0  # windows never span records
            continue
        if not saw_header:
            raise FastaError(line_number, "sequence data before the first '>' header")
        for ch in stripped:
            code = _BASE_CODES.get(ch)
            if code is None:
                value = fill = 0  # ambiguous base voids every window crossing it
                continue
            value = ((value << 2) | code) & mask
            if fill < k:
                fill += 1
            if fill == k:
                yield value


def stream_kmers(source, k: int) -> Iterator[int]:
    """Yield every valid k-mer window of a FASTA source, packed.

    ``source`` is a path or an iterable of lines. Each record's sequence
    slides a length-k window by one base; a window is emitted iff all its
    bases are unambiguous. Structural problems raise FastaError with the
    offending line number.
    """
    if not 1 <= k <= 31:
        raise ValueError(f"k must be in [1, 31], got {k}")
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r") as fh:
            yield from _stream_lines(fh, k)
    else:
        yield from _stream_lines(source, k)


def kmer_bench(path, k: int, spec: RunSpec) -> list[BenchReport]:
    """Insert, positive-query, and delete throughput over a FASTA's k-mers.

    All streamed k-mers are collected once, then each phase is timed as a
    whole batch: insert them all, query them all (every one must hit), and
    delete them all. Returns one report per phase; ``n_keys`` echoes the
    window count.
    """
    keys = np.fromiter(stream_kmers(path, k), dtype=np.uint64)
    n = len(keys)
    reports = []
    cfg = spec.config()
    filt = CuckooFilter(cfg)
    for op in ("insert", "query_pos", "delete"):
        phase = replace(spec, op=op)
        failures = 0
        if op == "insert":
            t0 = time.perf_counter()
            res = filt.insert_batch(keys, workers=spec.workers)
            dt = time.perf_counter() - t0
            failures = res.n_failed
            stats = res.eviction_stats()
            reports.append(
                _report(phase, cfg, n, dt, n / dt if dt > 0 else float("inf"),
                        None, failures, stats,
                        load_factor=filt.load_factor, repetitions=1)
            )
        elif op == "query_pos":
            t0 = time.perf_counter()
            filt.query_batch(keys, workers=spec.workers)
            dt = time.perf_counter() - t0
            reports.append(
                _report(phase, cfg, n, dt, n / dt if dt > 0 else float("inf"),
                        None, 0, None,
                        load_factor=filt.load_factor, repetitions=1)
            )
        else:
            alpha = filt.load_factor
            t0 = time.perf_counter()
            filt.delete_batch(keys, workers=spec.workers)
            dt = time.perf_counter() - t0
            reports.append(
                _report(phase, cfg, n, dt, n / dt if dt > 0 else float("inf"),
                        None, 0, None, load_factor=alpha, repetitions=1)
            )
    return reports
