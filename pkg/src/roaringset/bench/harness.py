"""Benchmark harness.

Reproduces the measurement protocol over four structures (roaring, sorted
array, uncompressed bitset, hash set): memory accounting in bits per value,
membership probes at n/4, n/2 and 3n/4 of the universe, full iteration,
the successive pairwise operations between neighbouring sets (materalizing
or count-only), and the wide union of all sets.

Every timed benchmark first runs untimed and has its result checked against
the sorted-array oracle; a disagreement raises CorrectnessError and nothing
is measured.  Reported values are the median of at least five repetitions
with dispersion as the max/min ratio; a dispersion above 1.10 gets the row
flagged on stderr.
"""

from __future__ import annotations

import csv
import json
import statistics
import sys
import time
from dataclasses import asdict, dataclass

import numpy as np

from ..bitmap import RoaringBitmap
from ..serde import Dataset, deserialize, serialize
from .baselines import (BaselineBitset, BaselineHashSet, BaselineSortedArray,
                        oracle_pairwise)

STRUCTURES = ("roaring", "array", "bitset", "hashset")
OPS = ("and", "or", "andnot", "xor")
CSV_COLUMNS = ("dataset", "structure", "benchmark", "metric", "value",
               "units", "runs", "dispersion")
DISPERSION_FLAG = 1.10


class CorrectnessError(RuntimeError):
    """A structure disagreed with the oracle; timing was aborted."""


@dataclass
class BenchRow:
    dataset: str
    structure: str
    benchmark: str
    metric: str
    value: float
    units: str
    runs: int
    dispersion: float


class BenchReport:
    def __init__(self, rows=None):
        self.rows: list[BenchRow] = list(rows or [])

    def extend(self, rows) -> None:
        self.rows.extend(rows)

    def to_csv(self, fh) -> None:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            w.writerow([r.dataset, r.structure, r.benchmark, r.metric,
                        f"{r.value:.6g}", r.units, r.runs, f"{r.dispersion:.4g}"])

    def to_json(self, fh) -> None:
        json.dump([asdict(r) for r in self.rows], fh, indent=2)
        fh.write("\n")


def build_structures(dataset: Dataset, names=STRUCTURES) -> dict[str, list]:
    """Instantiate every requested structure for every set of the dataset.

    Roaring bitmaps are built with run_optimize and shrink_to_fit applied,
    matching how the memory numbers are meant to be read.
    """
    universe = dataset.universe
    built: dict[str, list] = {}
    for name in names:
        if name == "roaring":
            bms = []
            for s in dataset.sets:
                bm = RoaringBitmap.from_values(s)
                bm.run_optimize()
                bm.shrink_to_fit()
                bms.append(bm)
            built[name] = bms
        elif name == "array":
            built[name] = [BaselineSortedArray(s) for s in dataset.sets]
        elif name == "bitset":
            built[name] = [BaselineBitset(s, universe) for s in dataset.sets]
        elif name == "hashset":
            built[name] = [BaselineHashSet(s) for s in dataset.sets]
        else:
            raise ValueError(f"unknown structure {name!r}")
    return built


def _contains(obj, v: int) -> bool:
    if isinstance(obj, RoaringBitmap):
        return v in obj
    return obj.contains(v)


def _iterate_count(obj) -> int:
    if isinstance(obj, RoaringBitmap):
        return obj.for_each(lambda _v: True)
    return obj.iterate_count()


def _measure(work, runs: int) -> tuple[float, float, int]:
    reps = max(int(runs), 5)
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        work()
        times.append(time.perf_counter_ns() - t0)
    med = float(statistics.median(times))
    disp = max(times) / max(min(times), 1)
    return med, disp, reps


def _row(dataset: Dataset, structure: str, benchmark: str, metric: str,
         med_ns: float, denom: int, units: str, reps: int,
         disp: float) -> BenchRow:
    if disp > DISPERSION_FLAG:
        print(f"warning: {dataset.name}/{structure}/{metric} dispersion "
              f"{disp:.3f} exceeds {DISPERSION_FLAG}", file=sys.stderr)
    return BenchRow(dataset.name, structure, benchmark, metric,
                    med_ns / max(denom, 1), units, reps, disp)


# ------------------------------------------------------------------ memory

def bench_memory(dataset: Dataset, structures=STRUCTURES,
                 built: dict | None = None) -> list[BenchRow]:
    built = built if built is not None else build_structures(dataset, structures)
    total = dataset.total_cardinality()
    rows = []
    for name in structures:
        objs = built[name]

        def bits_per_value(kind: int = 0) -> float:
            if name == "roaring":
                return 8 * sum(bm.memory_bytes()[kind] for bm in objs) / total
            return 8 * sum(o.bytes_used() for o in objs) / total

        samples = [bits_per_value() for _ in range(5)]
        rows.append(BenchRow(dataset.name, name, "memory", "bits_per_value",
                             statistics.median(samples), "bits/value", 5,
                             max(samples) / min(samples)))
        if name == "roaring":
            samples = [bits_per_value(1) for _ in range(5)]
            rows.append(BenchRow(dataset.name, name, "memory",
                                 "bits_per_value_serialized",
                                 statistics.median(samples), "bits/value", 5,
                                 max(samples) / min(samples)))
    return rows


# -------------------------------------------------------------- membership

def _membership_probes(dataset: Dataset) -> tuple[int, ...]:
    n = dataset.universe
    return (n // 4, n // 2, (3 * n) // 4)


def bench_membership(dataset: Dataset, structures=STRUCTURES, runs: int = 5,
                     built: dict | None = None) -> list[BenchRow]:
    built = built if built is not None else build_structures(dataset, structures)
    probes = _membership_probes(dataset)
    expected = [[bool(np.isin(p, s, assume_unique=True)) for p in probes]
                for s in dataset.sets]
    for name in structures:
        for si, obj in enumerate(built[name]):
            got = [_contains(obj, p) for p in probes]
            if got != expected[si]:
                raise CorrectnessError(
                    f"membership disagreement: {name} set {si}: "
                    f"{got} != {expected[si]}")
    rows = []
    denom = 3 * len(dataset.sets)
    for name in structures:
        objs = built[name]

        def work():
            hits = 0
            for obj in objs:
                for p in probes:
                    hits += _contains(obj, p)
            return hits

        work()  # warm-up
        med, disp, reps = _measure(work, runs)
        rows.append(_row(dataset, name, "membership", "membership",
                         med, denom, "ns/query", reps, disp))
    return rows


# ---------------------------------------------------------------- pairwise

def bench_pairwise(dataset: Dataset, op: str, count_only: bool = False,
                   structures=STRUCTURES, runs: int = 5,
                   built: dict | None = None) -> list[BenchRow]:
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    if len(dataset.sets) < 2:
        raise CorrectnessError("pairwise benchmark needs at least two sets")
    built = built if built is not None else build_structures(dataset, structures)
    pairs = list(zip(dataset.sets, dataset.sets[1:]))
    expected = [oracle_pairwise(op, a, b, count_only=True) for a, b in pairs]
    denom = sum(len(a) + len(b) for a, b in pairs)
    metric = f"{op}_count" if count_only else op
    rows = []
    for name in structures:
        objs = built[name]

        def work():
            cards = []
            for x, y in zip(objs, objs[1:]):
                if count_only:
                    cards.append(x.op_cardinality(op, y))
                else:
                    cards.append(len(x.op(op, y)))
            return cards

        got = work()  # warm-up pass, checked against the oracle
        if got != expected:
            bad = next(k for k, (g, e) in enumerate(zip(got, expected)) if g != e)
            raise CorrectnessError(
                f"{name} {metric}: pair {bad} cardinality {got[bad]} != "
                f"oracle {expected[bad]}")
        med, disp, reps = _measure(work, runs)
        rows.append(_row(dataset, name, "pairwise", metric,
                         med, denom, "ns/value", reps, disp))
    return rows


# -------------------------------------------------------------- wide union

def _oracle_fold_union(sets: list[np.ndarray]) -> np.ndarray:
    acc = sets[0]
    for s in sets[1:]:
        acc = oracle_pairwise("or", acc, s)
    return acc


def bench_wide_union(dataset: Dataset, structures=STRUCTURES, runs: int = 5,
                     built: dict | None = None) -> list[BenchRow]:
    built = built if built is not None else build_structures(dataset, structures)
    expected = len(_oracle_fold_union(dataset.sets))
    denom = dataset.total_cardinality()
    rows = []
    for name in structures:
        objs = built[name]
        work = _wide_union_work(name, objs, dataset.universe)
        got = work()  # warm-up + check
        if got != expected:
            raise CorrectnessError(
                f"{name} wide union cardinality {got} != oracle {expected}")
        med, disp, reps = _measure(work, runs)
        rows.append(_row(dataset, name, "wideunion", "wideunion",
                         med, denom, "ns/value", reps, disp))
    return rows


def _wide_union_work(name: str, objs: list, universe: int):
    if name == "roaring":
        def work():
            return len(RoaringBitmap.union_many(objs))
    elif name == "array":
        def work():
            acc = objs[0].values
            for o in objs[1:]:
                acc = oracle_pairwise("or", acc, o.values)
            return len(acc)
    elif name == "bitset":
        def work():
            acc = BaselineBitset(None, universe, _words=objs[0].words.copy())
            for o in objs[1:]:
                acc.ior(o)
            acc.refresh()
            return acc.cardinality
    else:
        def work():
            acc = set(objs[0].values)
            for o in objs[1:]:
                acc |= o.values
            return len(acc)
    return work


# ---------------------------------------------------------------- iterate

def bench_iterate(dataset: Dataset, structures=STRUCTURES, runs: int = 5,
                  built: dict | None = None) -> list[BenchRow]:
    built = built if built is not None else build_structures(dataset, structures)
    expected = dataset.total_cardinality()
    rows = []
    for name in structures:
        objs = built[name]

        def work():
            return sum(_iterate_count(o) for o in objs)

        got = work()
        if got != expected:
            raise CorrectnessError(
                f"{name} iteration visited {got} values, expected {expected}")
        med, disp, reps = _measure(work, runs)
        rows.append(_row(dataset, name, "iterate", "iterate",
                         med, expected, "ns/value", reps, disp))
    return rows


# --------------------------------------------------------------- validation

def validate_dataset(dataset: Dataset, structures=STRUCTURES) -> list[str]:
    """Run every correctness cross-check without timing; returns failures."""
    failures: list[str] = []
    built = build_structures(dataset, structures)
    sets = dataset.sets

    if "roaring" in structures:
        for i, bm in enumerate(built["roaring"]):
            try:
                bm.validate()
            except AssertionError as e:
                failures.append(f"set {i}: invariant: {e}")
            if not np.array_equal(bm.to_array(), sets[i]):
                failures.append(f"set {i}: roaring iteration != source values")
            img = serialize(bm)
            back = deserialize(img)
            if back != bm:
                failures.append(f"set {i}: serialize/deserialize round trip")
            elif serialize(back) != img:
                failures.append(f"set {i}: reserialization not byte-exact")
            mem, ser = bm.memory_bytes()
            if ser != len(img):
                failures.append(f"set {i}: serialized size {len(img)} != "
                                f"accounted {ser}")

    probes = _membership_probes(dataset)
    expected_member = [[bool(np.isin(p, s, assume_unique=True)) for p in probes]
                       for s in sets]
    for name in structures:
        for si, obj in enumerate(built[name]):
            got = [_contains(obj, p) for p in probes]
            if got != expected_member[si]:
                failures.append(f"{name} set {si}: membership {got} "
                                f"!= {expected_member[si]}")

    for idx, (a, b) in enumerate(zip(sets, sets[1:])):
        for op in OPS:
            exp = oracle_pairwise(op, a, b)
            if "roaring" in structures:
                x, y = built["roaring"][idx], built["roaring"][idx + 1]
                r = x.op(op, y)
                try:
                    r.validate()
                except AssertionError as e:
                    failures.append(f"pair {idx} {op}: result invariant: {e}")
                if not np.array_equal(r.to_array(), exp):
                    failures.append(f"pair {idx} {op}: roaring values != oracle")
                if x.op_cardinality(op, y) != len(exp):
                    failures.append(f"pair {idx} {op}: roaring count-only "
                                    f"!= oracle")
            for name in ("bitset", "hashset"):
                if name in structures:
                    got = built[name][idx].op_cardinality(op, built[name][idx + 1])
                    if got != len(exp):
                        failures.append(f"pair {idx} {op}: {name} cardinality "
                                        f"{got} != {len(exp)}")

    union_all = _oracle_fold_union(sets)
    if "roaring" in structures:
        wide = RoaringBitmap.union_many(built["roaring"])
        try:
            wide.validate()
        except AssertionError as e:
            failures.append(f"wide union invariant: {e}")
        if not np.array_equal(wide.to_array(), union_all):
            failures.append("wide union values != oracle fold")
    return failures
