"""Benchmark harness, baselines, and CLI."""

from .baselines import (BaselineBitset, BaselineHashSet, BaselineSortedArray,
                        oracle_pairwise)
from .harness import (BenchReport, BenchRow, CorrectnessError, STRUCTURES,
                      bench_iterate, bench_membership, bench_memory,
                      bench_pairwise, bench_wide_union, build_structures,
                      validate_dataset)

__all__ = [
    "BaselineBitset", "BaselineHashSet", "BaselineSortedArray",
    "oracle_pairwise", "BenchReport", "BenchRow", "CorrectnessError",
    "STRUCTURES", "bench_iterate", "bench_membership", "bench_memory",
    "bench_pairwise", "bench_wide_union", "build_structures",
    "validate_dataset",
]
