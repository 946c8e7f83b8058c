"""Command-line benchmark front end.

Subcommands: ``throughput`` (one timed op kind), ``fpr`` (empirical vs
analytic false-positive sweep over filter sizes), ``evictions`` (DFS/BFS
tail study over target load factors), and ``kmer`` (FASTA ingestion
pipeline). Reports go to ``--out`` or stdout as CSV or JSON.

Exit status: 0 on success, 2 on configuration errors, 1 on I/O errors.
Insert failures inside a run are data (reported in the output), never an
exit status.
"""

from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .bench import (
    OPS,
    RunSpec,
    emit_report,
    run_eviction_study,
    run_fpr_sweep,
    run_throughput,
)
from .errors import ConfigError, FastaError
from .kmer import kmer_bench


def _add_shared_flags(sub: argparse.ArgumentParser) -> None:
    geo = sub.add_mutually_exclusive_group()
    geo.add_argument("--log-slots", type=int, metavar="K",
                     help="total slot count as a power of two (default 16)")
    geo.add_argument("--buckets", type=int, metavar="M",
                     help="bucket count, overriding --log-slots")
    sub.add_argument("--fingerprint-bits", type=int, choices=(8, 16, 32), default=16)
    sub.add_argument("--bucket-slots", type=int, default=16, metavar="B")
    sub.add_argument("--policy", choices=("xor", "offset"), default="xor")
    sub.add_argument("--eviction", choices=("dfs", "bfs"), default=None,
                     help="eviction strategy (default dfs; the evictions "
                          "subcommand runs both unless this is given)")
    sub.add_argument("--load-factor", type=float, default=0.95, metavar="A")
    sub.add_argument("--threads", type=int, default=1, metavar="N")
    sub.add_argument("--seed", type=int, default=0, metavar="U64")
    sub.add_argument("--reps", type=int, default=5, metavar="N")
    sub.add_argument("--warmup", type=int, default=2, metavar="N")
    sub.add_argument("--max-evictions", type=int, default=500, metavar="N")
    sub.add_argument("--format", choices=("csv", "json"), default="csv")
    sub.add_argument("--out", default=None, metavar="PATH",
                     help="report destination (default stdout)")


def _bucket_count(args: argparse.Namespace) -> int:
    if args.buckets is not None:
        return args.buckets
    log_slots = 16 if args.log_slots is None else args.log_slots
    if not 1 <= log_slots <= 40:
        raise ConfigError(f"--log-slots must be in [1, 40], got {log_slots}")
    slots = 1 << log_slots
    if slots % args.bucket_slots:
        raise ConfigError(
            f"2^{log_slots} slots do not divide into buckets of {args.bucket_slots}"
        )
    return slots // args.bucket_slots


def _spec(args: argparse.Namespace, op: str = "insert",
          eviction: Optional[str] = None) -> RunSpec:
    return RunSpec(
        bucket_count=_bucket_count(args),
        op=op,
        fingerprint_bits=args.fingerprint_bits,
        bucket_slots=args.bucket_slots,
        policy=args.policy,
        eviction=eviction or args.eviction or "dfs",
        load_factor=args.load_factor,
        workers=args.threads,
        seed=args.seed,
        repetitions=args.reps,
        warmup=args.warmup,
        max_evictions=args.max_evictions,
    )


def _cmd_throughput(args: argparse.Namespace):
    return [run_throughput(_spec(args, op=args.op))]


def _cmd_fpr(args: argparse.Namespace):
    if args.min_log_bytes > args.max_log_bytes:
        raise ConfigError("--min-log-bytes exceeds --max-log-bytes")
    sizes = [1 << p for p in range(args.min_log_bytes, args.max_log_bytes + 1)]
    return run_fpr_sweep(_spec(args), memory_bytes=sizes,
                         negative_queries=args.neg_queries)


def _cmd_evictions(args: argparse.Namespace):
    alphas = []
    a = args.alpha_start
    while a <= args.alpha_stop + 1e-9:
        alphas.append(round(a, 4))
        a += args.alpha_step
    strategies = (args.eviction,) if args.eviction else ("dfs", "bfs")
    return run_eviction_study(_spec(args), load_factors=alphas,
                              strategies=strategies)


def _cmd_kmer(args: argparse.Namespace):
    return kmer_bench(args.input, args.k, _spec(args))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swarcuckoo",
        description="Cuckoo filter benchmarks: throughput, FPR, eviction tails, k-mers.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("throughput", help="time one operation kind")
    p.add_argument("--op", choices=OPS, default="insert")
    _add_shared_flags(p)
    p.set_defaults(func=_cmd_throughput)

    p = sub.add_parser("fpr", help="empirical vs analytic FPR across sizes")
    p.add_argument("--min-log-bytes", type=int, default=15)
    p.add_argument("--max-log-bytes", type=int, default=24)
    p.add_argument("--neg-queries", type=int, default=10_000_000)
    _add_shared_flags(p)
    p.set_defaults(func=_cmd_fpr)

    p = sub.add_parser("evictions", help="DFS/BFS eviction-tail study")
    p.add_argument("--alpha-start", type=float, default=0.75)
    p.add_argument("--alpha-stop", type=float, default=1.0)
    p.add_argument("--alpha-step", type=float, default=0.01)
    _add_shared_flags(p)
    p.set_defaults(func=_cmd_evictions)

    p = sub.add_parser("kmer", help="FASTA k-mer ingestion benchmark")
    p.add_argument("--input", required=True, metavar="FASTA")
    p.add_argument("--k", type=int, default=31)
    _add_shared_flags(p)
    p.set_defaults(func=_cmd_kmer)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        reports = args.func(args)
        emit_report(reports, args.format, args.out if args.out else sys.stdout)
    except (ConfigError, FastaError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
