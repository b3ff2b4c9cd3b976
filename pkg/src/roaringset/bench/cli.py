"""Command-line harness.

Subcommands:

* ``gen`` — synthesize a clustered dataset directory;
* ``bench memory|membership|iterate|pairwise|wideunion`` — run one benchmark
  over a dataset and emit a CSV or JSON report;
* ``validate`` — run every correctness cross-check, no timing;
* ``selftest`` — scalar-vs-accelerated kernel differential suite.

Exit codes: 0 success, 1 correctness failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .. import kernels
from ..kernels.selftest import run_selftest
from ..serde import DatasetError, gen_clusterdata, load_dataset, write_dataset
from . import harness


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="roaringset",
        description="Compressed integer-set benchmarks and self-checks.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate a clustered synthetic dataset")
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--sets", type=int, default=200)
    gen.add_argument("--size", type=int, default=10_000,
                     help="values per set")
    gen.add_argument("--universe", type=int, default=10_000_000)
    gen.add_argument("--out", required=True, help="output dataset directory")

    bench = sub.add_parser("bench", help="run one benchmark over a dataset")
    bench.add_argument("benchmark",
                       choices=("memory", "membership", "iterate",
                                "pairwise", "wideunion"))
    bench.add_argument("--dataset", required=True)
    bench.add_argument("--op", choices=harness.OPS, default="and",
                       help="operation for the pairwise benchmark")
    bench.add_argument("--count-only", action="store_true",
                       help="measure count-only variants (pairwise)")
    bench.add_argument("--structures", default=",".join(harness.STRUCTURES),
                       help="comma-separated subset of "
                            f"{','.join(harness.STRUCTURES)}")
    bench.add_argument("--format", choices=("csv", "json"), default="csv")
    bench.add_argument("--runs", type=int, default=5)
    bench.add_argument("--out", default=None, help="report path (default stdout)")

    val = sub.add_parser("validate",
                         help="run all correctness cross-checks, no timing")
    val.add_argument("--dataset", required=True)
    val.add_argument("--structures", default=",".join(harness.STRUCTURES))

    st = sub.add_parser("selftest",
                        help="scalar vs accelerated kernel differential suite")
    st.add_argument("--cases", type=int, default=2000,
                    help="randomized inputs per kernel")
    st.add_argument("--seed", type=int, default=2024)
    st.add_argument("--quiet", action="store_true")
    return parser


def _parse_structures(arg: str, parser: argparse.ArgumentParser) -> tuple[str, ...]:
    names = tuple(s.strip() for s in arg.split(",") if s.strip())
    for n in names:
        if n not in harness.STRUCTURES:
            parser.error(f"unknown structure {n!r}")
    if not names:
        parser.error("no structures selected")
    return names


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)

    if args.command == "gen":
        try:
            ds = gen_clusterdata(args.seed, args.sets, args.size, args.universe)
        except DatasetError as e:
            print(f"error: {e}", file=sys.stderr)
            return 1
        write_dataset(ds, args.out)
        print(f"wrote {len(ds.sets)} sets ({ds.total_cardinality()} values, "
              f"universe {ds.universe}) to {args.out}")
        return 0

    if args.command == "selftest":
        say = (lambda m: None) if args.quiet else \
            (lambda m: print(f"selftest: {m}", file=sys.stderr))
        print(f"kernel backend selected at startup: {kernels.backend_name()}",
              file=sys.stderr)
        failures = run_selftest(cases=args.cases, seed=args.seed, progress=say)
        if failures:
            for f in failures:
                print(f"FAIL {f}", file=sys.stderr)
            print(f"selftest: {len(failures)} mismatches", file=sys.stderr)
            return 1
        print(f"selftest: backends agree on {args.cases} cases per kernel")
        return 0

    if not Path(args.dataset).is_dir():
        parser.error(f"dataset directory not found: {args.dataset}")
    try:
        dataset = load_dataset(args.dataset)
    except DatasetError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1

    if args.command == "validate":
        structures = _parse_structures(args.structures, parser)
        failures = harness.validate_dataset(dataset, structures)
        if failures:
            for f in failures:
                print(f"FAIL {f}", file=sys.stderr)
            print(f"validate: {len(failures)} failures on {dataset.name}",
                  file=sys.stderr)
            return 1
        print(f"validate: all cross-checks passed on {dataset.name}")
        return 0

    # bench
    structures = _parse_structures(args.structures, parser)
    try:
        built = harness.build_structures(dataset, structures)
        if args.benchmark == "memory":
            rows = harness.bench_memory(dataset, structures, built=built)
        elif args.benchmark == "membership":
            rows = harness.bench_membership(dataset, structures,
                                            runs=args.runs, built=built)
        elif args.benchmark == "iterate":
            rows = harness.bench_iterate(dataset, structures,
                                         runs=args.runs, built=built)
        elif args.benchmark == "wideunion":
            rows = harness.bench_wide_union(dataset, structures,
                                            runs=args.runs, built=built)
        else:
            rows = harness.bench_pairwise(dataset, args.op,
                                          count_only=args.count_only,
                                          structures=structures,
                                          runs=args.runs, built=built)
    except harness.CorrectnessError as e:
        print(f"correctness failure: {e}", file=sys.stderr)
        return 1

    report = harness.BenchReport(rows)
    if args.out:
        with open(args.out, "w", newline="") as fh:
            report.to_csv(fh) if args.format == "csv" else report.to_json(fh)
    else:
        if args.format == "csv":
            report.to_csv(sys.stdout)
        else:
            report.to_json(sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
