"""Benchmark harness: throughput, FPR sweeps, and eviction-tail studies.

The harness owns worker lifecycle: it spawns mutating workers for a phase
through the filter's batch methods, joins them (the phase boundary), then
runs read phases. Keys come from a counter-based PRNG (Philox) keyed by the
run seed; inserted keys are drawn from [0, 2^32) and negative-query keys
from [2^32, 2^64), so the two workloads never overlap.

Reports are flat records aggregated as the median across repetitions, and
round-trip losslessly through CSV or JSON.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import asdict, dataclass, fields, replace
from statistics import median
from typing import Iterable, Optional, Sequence

import numpy as np

from .analytics import analytic_fpr, effective_fingerprint_bits
from .filter import CuckooFilter, EvictionStats
from .placement import FilterConfig

OPS = ("insert", "query_pos", "query_neg", "delete")

_KEY_SPLIT = 1 << 32  # inserted keys below, negative-query keys at or above


@dataclass(frozen=True)
class RunSpec:
    """Parameters for one benchmark run."""

    bucket_count: int
    op: str = "insert"
    fingerprint_bits: int = 16
    bucket_slots: int = 16
    policy: str = "xor"
    eviction: str = "dfs"
    load_factor: float = 0.95
    workers: int = 1
    seed: int = 0
    repetitions: int = 5
    warmup: int = 2
    max_evictions: int = 500

    def __post_init__(self):
        if self.op not in OPS:
            raise ValueError(f"op must be one of {OPS}, got {self.op!r}")
        if not 0.0 <= self.load_factor <= 1.0:
            raise ValueError("load_factor must be in [0, 1]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if self.warmup < 0:
            raise ValueError("warmup must be >= 0")

    def config(self) -> FilterConfig:
        return FilterConfig(
            bucket_count=self.bucket_count,
            fingerprint_bits=self.fingerprint_bits,
            bucket_slots=self.bucket_slots,
            policy=self.policy,
            eviction=self.eviction,
            max_evictions=self.max_evictions,
            seed=self.seed,
        )


@dataclass
class BenchReport:
    """One benchmark outcome; flat so it maps 1:1 onto a CSV row."""

    op: str
    policy: str
    eviction: str
    fingerprint_bits: int
    bucket_slots: int
    bucket_count: int
    memory_bytes: int
    load_factor: float
    workers: int
    seed: int
    repetitions: int
    warmup: int
    n_keys: int
    wall_time: float
    throughput: float
    empirical_fpr: Optional[float]
    analytic_fpr: float
    insert_failures: int
    eviction_p90: Optional[int]
    eviction_p95: Optional[int]
    eviction_p99: Optional[int]


def gen_keys(n: int, seed: int, negative: bool = False) -> np.ndarray:
    """Uniform 64-bit keys; the negative stream uses the disjoint top range."""
    rng = np.random.Generator(np.random.Philox(key=[seed, int(negative)]))
    if negative:
        return rng.integers(_KEY_SPLIT, 1 << 64, size=n, dtype=np.uint64)
    return rng.integers(0, _KEY_SPLIT, size=n, dtype=np.uint64)


def _report(
    spec: RunSpec,
    cfg: FilterConfig,
    n_keys: int,
    wall_time: float,
    throughput: float,
    empirical_fpr: Optional[float] = None,
    insert_failures: int = 0,
    stats: Optional[EvictionStats] = None,
    load_factor: Optional[float] = None,
    repetitions: Optional[int] = None,
) -> BenchReport:
    alpha = spec.load_factor if load_factor is None else load_factor
    return BenchReport(
        op=spec.op,
        policy=cfg.policy.value,
        eviction=cfg.eviction.value,
        fingerprint_bits=cfg.fingerprint_bits,
        bucket_slots=cfg.bucket_slots,
        bucket_count=cfg.bucket_count,
        memory_bytes=cfg.total_words * 8,
        load_factor=alpha,
        workers=spec.workers,
        seed=spec.seed,
        repetitions=spec.repetitions if repetitions is None else repetitions,
        warmup=spec.warmup,
        n_keys=n_keys,
        wall_time=wall_time,
        throughput=throughput,
        empirical_fpr=empirical_fpr,
        analytic_fpr=analytic_fpr(
            effective_fingerprint_bits(cfg), cfg.bucket_slots, alpha
        ),
        insert_failures=insert_failures,
        eviction_p90=stats.p90 if stats is not None else None,
        eviction_p95=stats.p95 if stats is not None else None,
        eviction_p99=stats.p99 if stats is not None else None,
    )


def run_throughput(spec: RunSpec) -> BenchReport:
    """Time one operation kind at the target load factor.

    Mutating ops (insert, delete) rebuild their preconditions before every
    repetition and are timed on the full batch; query ops fill once and time
    repeated read passes. Warm-up repetitions (which also absorb JIT
    compilation) are discarded.
    """
    cfg = spec.config()
    filt = CuckooFilter(cfg)
    n = int(spec.load_factor * cfg.total_slots)
    keys = gen_keys(n, spec.seed)
    times: list[float] = []
    failures = 0
    stats: Optional[EvictionStats] = None
    empirical: Optional[float] = None

    if spec.op in ("query_pos", "query_neg"):
        res = filt.insert_batch(keys, workers=spec.workers)
        failures = res.n_failed
        probe = keys if spec.op == "query_pos" else gen_keys(n, spec.seed, negative=True)
        for rep in range(spec.warmup + spec.repetitions):
            t0 = time.perf_counter()
            hits = filt.query_batch(probe, workers=spec.workers)
            dt = time.perf_counter() - t0
            if rep >= spec.warmup:
                times.append(dt)
        if spec.op == "query_neg" and n:
            empirical = float(hits.mean())
    else:
        for rep in range(spec.warmup + spec.repetitions):
            filt.clear()
            if spec.op == "delete":
                filt.insert_batch(keys, workers=spec.workers)
                t0 = time.perf_counter()
                filt.delete_batch(keys, workers=spec.workers)
                dt = time.perf_counter() - t0
            else:
                t0 = time.perf_counter()
                res = filt.insert_batch(keys, workers=spec.workers)
                dt = time.perf_counter() - t0
                failures = res.n_failed
                stats = res.eviction_stats()
            if rep >= spec.warmup:
                times.append(dt)

    wall = median(times)
    throughput = n / wall if wall > 0 else float("inf")
    return _report(spec, cfg, n, wall, throughput, empirical, failures, stats)


def run_fpr_sweep(
    spec: RunSpec,
    memory_bytes: Optional[Sequence[int]] = None,
    negative_queries: int = 10_000_000,
) -> list[BenchReport]:
    """Empirical vs analytic FPR across filter sizes.

    Each size is filled to the target load factor with low-range keys and
    probed with high-range keys; the reported throughput and wall time are
    the negative-query pass's.
    """
    if memory_bytes is None:
        memory_bytes = [1 << p for p in range(15, 25)]
    lane_bytes = spec.fingerprint_bits // 8
    reports = []
    for size in memory_bytes:
        m = size // (spec.bucket_slots * lane_bytes)
        if m < 2:
            raise ValueError(f"memory size {size} too small for the geometry")
        sized = replace(spec, bucket_count=m, op="query_neg")
        cfg = sized.config()
        filt = CuckooFilter(cfg)
        n = int(sized.load_factor * cfg.total_slots)
        res = filt.insert_batch(gen_keys(n, sized.seed), workers=sized.workers)
        probe = gen_keys(negative_queries, sized.seed, negative=True)
        t0 = time.perf_counter()
        hits = filt.query_batch(probe, workers=sized.workers)
        dt = time.perf_counter() - t0
        empirical = float(hits.mean()) if negative_queries else 0.0
        reports.append(
            _report(
                sized, cfg, negative_queries, dt,
                negative_queries / dt if dt > 0 else float("inf"),
                empirical, res.n_failed, repetitions=1,
            )
        )
    return reports


def run_eviction_study(
    spec: RunSpec,
    load_factors: Optional[Sequence[float]] = None,
    strategies: Sequence[str] = ("dfs", "bfs"),
) -> list[BenchReport]:
    """Eviction-tail percentiles and tail-phase insert throughput.

    For each (target load factor, strategy): pre-fill with three quarters of
    the keys, then time and instrument inserting the final quarter. At a
    target of 1.0 insert failures are expected and simply reported.
    """
    if load_factors is None:
        load_factors = [round(0.75 + 0.01 * i, 2) for i in range(26)]
    reports = []
    for strategy in strategies:
        for alpha in load_factors:
            sized = replace(spec, op="insert", eviction=strategy, load_factor=alpha)
            cfg = sized.config()
            filt = CuckooFilter(cfg)
            n = int(alpha * cfg.total_slots)
            keys = gen_keys(n, sized.seed)
            cut = (3 * n) // 4
            pre = filt.insert_batch(keys[:cut], workers=sized.workers)
            t0 = time.perf_counter()
            tail = filt.insert_batch(keys[cut:], workers=sized.workers)
            dt = time.perf_counter() - t0
            reports.append(
                _report(
                    sized, cfg, n - cut, dt,
                    (n - cut) / dt if dt > 0 else float("inf"),
                    None, pre.n_failed + tail.n_failed,
                    tail.eviction_stats(), load_factor=alpha, repetitions=1,
                )
            )
    return reports


# ---- report serialization ----

_COLUMNS = [f.name for f in fields(BenchReport)]
_FLOAT_COLUMNS = {"load_factor", "wall_time", "throughput", "empirical_fpr", "analytic_fpr"}
_STR_COLUMNS = {"op", "policy", "eviction"}


def _row_to_report(row: dict) -> BenchReport:
    converted = {}
    for name in _COLUMNS:
        raw = row[name]
        if raw is None or raw == "":
            converted[name] = None
        elif name in _STR_COLUMNS:
            converted[name] = str(raw)
        elif name in _FLOAT_COLUMNS:
            converted[name] = float(raw)
        else:
            converted[name] = int(raw)
    return BenchReport(**converted)


def emit_report(reports: Iterable[BenchReport], format: str = "csv", destination=None) -> None:
    """Write reports as CSV rows (fixed column order) or a JSON array.

    ``destination`` is a path or a writable text file; CSV output always
    includes the header row, even for an empty report list.
    """
    reports = list(reports)
    own = isinstance(destination, (str, bytes)) or hasattr(destination, "__fspath__")
    try:
        fh = open(destination, "w", newline="") if own else destination
    except OSError as exc:
        raise OSError(f"cannot write report to {destination}: {exc}") from exc
    if fh is None:
        raise ValueError("destination is required")
    try:
        if format == "csv":
            writer = csv.DictWriter(fh, fieldnames=_COLUMNS)
            writer.writeheader()
            for rep in reports:
                row = asdict(rep)
                writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
        elif format == "json":
            json.dump([asdict(r) for r in reports], fh, indent=2)
            fh.write("\n")
        else:
            raise ValueError(f"unknown report format {format!r}")
    finally:
        if own:
            fh.close()


def read_reports(source, format: Optional[str] = None) -> list[BenchReport]:
    """Inverse of emit_report; infers the format from the extension."""
    own = isinstance(source, (str, bytes)) or hasattr(source, "__fspath__")
    if format is None:
        name = str(source) if own else getattr(source, "name", "")
        format = "json" if name.endswith(".json") else "csv"
    fh = open(source, "r", newline="") if own else source
    try:
        if format == "csv":
            return [_row_to_report(row) for row in csv.DictReader(fh)]
        if format == "json":
            return [_row_to_report(obj) for obj in json.load(fh)]
        raise ValueError(f"unknown report format {format!r}")
    finally:
        if own:
            fh.close()
