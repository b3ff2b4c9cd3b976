"""Acceptance suite.

One test per criterion, each printing a single pass/fail line (visible with
``pytest -v -s tests/test_acceptance.py``).  Criterion 7 needs the real
corpora on disk (ROARINGSET_REALDATA); criterion 8 is informational and never
gates.
"""

import os
import time
from pathlib import Path

import numpy as np
import pytest

from roaringset import (RoaringBitmap, deserialize, gen_clusterdata,
                        load_dataset, serialize)
import roaringset.containers as ct
from roaringset.bench import harness
from roaringset.bench.baselines import oracle_pairwise
from roaringset.bench.cli import main as cli_main
from roaringset.kernels import accelerated, scalar
from roaringset.kernels.selftest import run_selftest

OPS = ("and", "or", "andnot", "xor")
CHUNK = 1 << 16


def _line(num: int, name: str, status: str, extra: str = "") -> None:
    print(f"criterion {num:2d} [{name}]: {status}" + (f" {extra}" if extra else ""))


def _report(num: int, name: str, ok: bool, extra: str = "") -> None:
    _line(num, name, "PASS" if ok else "FAIL", extra)
    assert ok, f"criterion {num} ({name}) failed: {extra}"


# --------------------------------------------------------------- criterion 1

def _draw_values(rng, universe: int, n: int) -> np.ndarray:
    return np.unique(rng.integers(0, universe, size=max(n, 1))).astype(np.uint32)


def _related_values(rng, base: np.ndarray, universe: int, n: int) -> np.ndarray:
    """Second set of a pair; often shares values with the first."""
    if len(base) and rng.random() < 0.4:
        take = rng.random(len(base)) < 0.5
        fresh = rng.integers(0, universe, size=max(n // 2, 1))
        return np.unique(np.concatenate((base[take].astype(np.int64),
                                         fresh))).astype(np.uint32)
    return _draw_values(rng, universe, n)


def _check_pair(a_vals: np.ndarray, b_vals: np.ndarray) -> None:
    a = RoaringBitmap.from_values(a_vals)
    b = RoaringBitmap.from_values(b_vals)
    for op in OPS:
        expected = oracle_pairwise(op, a_vals, b_vals)
        got = a.op(op, b)
        assert np.array_equal(got.to_array(), expected), op
        assert a.op_cardinality(op, b) == len(expected), op


def test_criterion_01_oracle_equivalence():
    t0 = time.monotonic()
    rng = np.random.default_rng(20240101)
    pairs = 0
    # bulk of the sweep: universes 2^8..2^16, log-uniform densities 1e-4..0.5
    for _ in range(9920):
        universe = 1 << int(rng.integers(8, 17))
        density = float(np.exp(rng.uniform(np.log(1e-4), np.log(0.5))))
        n = min(max(int(universe * density), 1), 2000)
        a_vals = _draw_values(rng, universe, n)
        b_vals = _related_values(rng, a_vals, universe, n)
        _check_pair(a_vals, b_vals)
        pairs += 1
    # multi-chunk universes
    for _ in range(60):
        universe = 1 << int(rng.integers(17, 21))
        density = float(np.exp(rng.uniform(np.log(1e-4), np.log(0.05))))
        n = min(max(int(universe * density), 1), 8000)
        a_vals = _draw_values(rng, universe, n)
        b_vals = _related_values(rng, a_vals, universe, n)
        _check_pair(a_vals, b_vals)
        pairs += 1
    for _ in range(16):
        universe = 1 << int(rng.integers(21, 23))
        density = float(np.exp(rng.uniform(np.log(1e-4), np.log(5e-3))))
        n = min(max(int(universe * density), 1), 20000)
        a_vals = _draw_values(rng, universe, n)
        b_vals = _related_values(rng, a_vals, universe, n)
        _check_pair(a_vals, b_vals)
        pairs += 1
    # corners: the largest universe sparse and half-full dense chunks
    for universe, density in ((1 << 22, 1e-4), (1 << 22, 3e-3),
                              (1 << 20, 0.5), (1 << 16, 0.5)):
        n = max(int(universe * density), 1)
        a_vals = _draw_values(rng, universe, n)
        b_vals = _related_values(rng, a_vals, universe, n)
        _check_pair(a_vals, b_vals)
        pairs += 1
    assert pairs == 10_000

    # exhaustive enumeration over the universe [0, 64): every ordered pair of
    # a structured family, verified value by value against the membership
    # predicate
    family = [frozenset(), frozenset(range(64))]
    family += [frozenset([i]) for i in range(64)]
    family += [frozenset(range(0, 64, 2)), frozenset(range(1, 64, 2)),
               frozenset(range(32)), frozenset(range(32, 64)),
               frozenset(range(0, 64, 3))]
    for _ in range(6):
        size = int(rng.integers(1, 64))
        family.append(frozenset(rng.integers(0, 64, size=size).tolist()))
    built = [(s, RoaringBitmap.from_values(sorted(s))) for s in family]
    preds = {"and": lambda x, y: x and y, "or": lambda x, y: x or y,
             "andnot": lambda x, y: x and not y, "xor": lambda x, y: x != y}
    for sa, rba in built:
        for sb, rbb in built:
            for op in OPS:
                got = set(rba.op(op, rbb).to_array().tolist())
                pred = preds[op]
                for v in range(64):
                    assert (v in got) == pred(v in sa, v in sb), (op, v)
                assert rba.op_cardinality(op, rbb) == len(got)

    elapsed = time.monotonic() - t0
    _report(1, "oracle equivalence", elapsed < 90,
            f"(10000 pairs + exhaustive [0,64), {elapsed:.1f}s < 90s)")


# --------------------------------------------------------------- criterion 2

def test_criterion_02_backend_differential():
    t0 = time.monotonic()
    failures = run_selftest(cases=10_000, seed=424242)
    elapsed = time.monotonic() - t0
    ok = failures == [] and elapsed < 60
    _report(2, "scalar/accelerated differential", ok,
            f"({len(failures)} mismatches, {elapsed:.1f}s < 60s)")


# --------------------------------------------------------------- criterion 3

def test_criterion_03_threshold_conformance():
    rb = RoaringBitmap()
    for v in range(4097):
        rb.add(v)
    conts = [c for _, c in rb.chunks()]
    ok = isinstance(conts[0], ct.BitsetContainer)
    for victim in (0, 17, 4096):
        rb2 = rb.copy()
        rb2.remove(victim)
        c = next(c for _, c in rb2.chunks())
        ok = ok and isinstance(c, ct.ArrayContainer) and len(c) == 4096

    intervals = RoaringBitmap.from_values(
        list(range(CHUNK, CHUNK + 100)) + list(range(CHUNK + 101, CHUNK + 201))
        + list(range(CHUNK + 300, CHUNK + 400)))
    intervals.run_optimize()
    rc = next(c for _, c in intervals.chunks())
    ok = ok and isinstance(rc, ct.RunContainer) and len(rc.runs) == 3
    ok = ok and rc.runs.tolist() == [[0, 99], [101, 99], [300, 99]]

    evens = RoaringBitmap.from_values(range(2 * CHUNK, 3 * CHUNK, 2))
    evens.run_optimize()
    bc = next(c for _, c in evens.chunks())
    ok = ok and isinstance(bc, ct.BitsetContainer) and len(bc) == 32768

    multiples = RoaringBitmap.from_values(range(0, 62 * 1000, 62))
    multiples.run_optimize()
    ac = next(c for _, c in multiples.chunks())
    ok = ok and isinstance(ac, ct.ArrayContainer) and len(ac) == 1000
    _report(3, "container type thresholds", ok)


# --------------------------------------------------------------- criterion 4

def test_criterion_04_harley_seal():
    rng = np.random.default_rng(4)
    ok = accelerated.popcount_block(np.zeros(1024, dtype=np.uint64)) == 0
    ok = ok and accelerated.popcount_block(
        np.full(1024, np.uint64(0xFFFFFFFFFFFFFFFF))) == 65536
    checked = 0
    batch = 2500
    while checked < 100_000:
        blocks = rng.integers(0, 1 << 64, size=(batch, 1024), dtype=np.uint64)
        if (checked // batch) % 3 == 1:  # sparser blocks every third batch
            blocks &= rng.integers(0, 1 << 64, size=(batch, 1024), dtype=np.uint64)
        naive = np.bitwise_count(blocks).sum(axis=1, dtype=np.int64)
        for r in range(batch):
            if accelerated.popcount_block(blocks[r]) != int(naive[r]):
                _report(4, "vectorized popcount", False, f"block {checked + r}")
        checked += batch
    _report(4, "vectorized popcount", ok, f"({checked} random blocks + extremes)")


# --------------------------------------------------------------- criterion 5

def _random_bitmap(rng) -> RoaringBitmap:
    n_chunks = int(rng.integers(1, 4))
    vals = []
    for _ in range(n_chunks):
        key = int(rng.integers(0, 40))
        style = rng.random()
        if style < 0.45:
            n = int(rng.integers(1, 2500))
            vals.append(rng.integers(0, CHUNK, size=n).astype(np.int64)
                        + key * CHUNK)
        elif style < 0.75:
            n = int(rng.integers(4097, 9000))
            vals.append(rng.integers(0, CHUNK, size=n).astype(np.int64)
                        + key * CHUNK)
        else:
            start = int(rng.integers(0, 60000))
            width = int(rng.integers(1, 4000))
            vals.append(np.arange(start, min(start + width, CHUNK),
                                  dtype=np.int64) + key * CHUNK)
    rb = RoaringBitmap.from_values(np.unique(np.concatenate(vals)))
    if rng.random() < 0.5:
        rb.run_optimize()
    return rb


def test_criterion_05_serialization():
    rng = np.random.default_rng(5)
    for i in range(1000):
        rb = _random_bitmap(rng)
        img = serialize(rb)
        back = deserialize(img)
        assert back == rb, f"bitmap {i} round trip"
        assert serialize(back) == img, f"bitmap {i} reserialization"
        assert len(img) == rb.memory_bytes()[1], f"bitmap {i} length accounting"

    array_only = RoaringBitmap.from_values(range(0, 62 * 1000, 62))
    run_only = RoaringBitmap.from_values(
        list(range(CHUNK, CHUNK + 100)) + list(range(CHUNK + 101, CHUNK + 201))
        + list(range(CHUNK + 300, CHUNK + 400)))
    run_only.run_optimize()
    bitset_only = RoaringBitmap.from_values(range(2 * CHUNK, 3 * CHUNK, 2))
    payloads = (len(serialize(array_only)) - 16,
                len(serialize(run_only)) - 16,
                len(serialize(bitset_only)) - 16)
    ok = payloads == (2000, 14, 8192)
    _report(5, "serialization", ok,
            f"(1000 round trips; payload bytes {payloads} == (2000, 14, 8192))")


# --------------------------------------------------------------- criterion 6

def test_criterion_06_memory_ordering_on_synthetic_data():
    ds = gen_clusterdata(1, 100, 100_000, 10_000_000)
    rows = harness.bench_memory(ds, ("roaring", "array", "bitset"))
    bits = {(r.structure, r.metric): r.value for r in rows}
    roaring = bits[("roaring", "bits_per_value")]
    array = bits[("array", "bits_per_value")]
    bitset = bits[("bitset", "bits_per_value")]
    ok = roaring < 32.0 and roaring < bitset and array == 32.0
    _report(6, "memory ordering", ok,
            f"(roaring {roaring:.2f} < array {array:.1f}, "
            f"bitset {bitset:.1f} bits/value)")


# --------------------------------------------------------------- criterion 7

def test_criterion_07_real_data_spot_check():
    root = os.environ.get("ROARINGSET_REALDATA")
    if not root:
        _line(7, "real-data spot check", "SKIP",
              "(set ROARINGSET_REALDATA to a directory with census1881/ "
              "and wikileaks-noquotes/ to enable)")
        pytest.skip("real corpora not available offline")
    census = load_dataset(Path(root) / "census1881")
    rows = harness.bench_memory(census, ("roaring",))
    in_mem = next(r.value for r in rows if r.metric == "bits_per_value")
    wiki = load_dataset(Path(root) / "wikileaks-noquotes")
    rows = harness.bench_memory(wiki, ("roaring",))
    ser = next(r.value for r in rows if r.metric == "bits_per_value_serialized")
    ok = abs(in_mem - 15.1) <= 1.51 and abs(ser - 1.63) <= 0.163
    _report(7, "real-data spot check", ok,
            f"(census1881 {in_mem:.2f} vs 15.1, wikileaks {ser:.3f} vs 1.63)")


# --------------------------------------------------------------- criterion 8

def _median_time(fn, reps: int = 15) -> float:
    times = []
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        fn()
        times.append(time.perf_counter_ns() - t0)
    times.sort()
    return times[len(times) // 2]


def test_criterion_08_accelerated_intersection_throughput():
    a = np.arange(0, 8192, 2, dtype=np.uint16)      # 4096 dense values
    b = np.arange(2, 8194, 2, dtype=np.uint16)      # 4096 dense values
    assert scalar.array_intersect(a, b, True) == \
        accelerated.array_intersect(a, b, True) == 4095
    accelerated.array_intersect(a, b, True)  # warm-up
    t_scalar = _median_time(lambda: scalar.array_intersect(a, b, True))
    t_accel = _median_time(lambda: accelerated.array_intersect(a, b, True))
    ratio = t_scalar / max(t_accel, 1)
    status = "PASS" if ratio >= 1.5 else "INFO"
    _line(8, "accelerated intersection throughput", status,
          f"(ratio {ratio:.2f}x, informational target >=1.5x, non-gating)")
    assert ratio > 0


# --------------------------------------------------------------- criterion 9

def test_criterion_09_count_only_identities():
    rng = np.random.default_rng(9)
    for _ in range(1000):
        universe = 1 << int(rng.integers(8, 19))
        n = min(max(int(universe * float(np.exp(
            rng.uniform(np.log(1e-3), np.log(0.4))))), 1), 1500)
        a_vals = _draw_values(rng, universe, n)
        b_vals = _related_values(rng, a_vals, universe, n)
        a = RoaringBitmap.from_values(a_vals)
        b = RoaringBitmap.from_values(b_vals)
        # left sides materialize through the full kernels; right sides use
        # only sizes plus the count-only intersection
        and_c = len(a.op("and", b))
        or_c = len(a.op("or", b))
        diff_c = len(a.op("andnot", b))
        xor_c = len(a.op("xor", b))
        assert or_c == len(a) + len(b) - and_c
        assert diff_c == len(a) - and_c
        assert xor_c == len(a) + len(b) - 2 * and_c
        assert a.op_cardinality("or", b) == or_c
        assert a.op_cardinality("andnot", b) == diff_c
        assert a.op_cardinality("xor", b) == xor_c
    _report(9, "count-only identities", True, "(1000 pairs)")


# -------------------------------------------------------------- criterion 10

def test_criterion_10_cli_end_to_end(tmp_path):
    ds_dir = tmp_path / "seed1"
    ok = cli_main(["gen", "--seed", "1", "--sets", "20", "--size", "2500",
                   "--universe", "1000000", "--out", str(ds_dir)]) == 0
    ok = ok and cli_main(["validate", "--dataset", str(ds_dir)]) == 0
    reports = []
    for name in ("r1.csv", "r2.csv"):
        out = tmp_path / name
        ok = ok and cli_main(["bench", "pairwise", "--op", "and",
                              "--count-only", "--dataset", str(ds_dir),
                              "--out", str(out)]) == 0
        import csv
        with open(out) as fh:
            rows = list(csv.DictReader(fh))
        assert rows and set(rows[0]) == set(harness.CSV_COLUMNS)
        assert all(r["metric"] == "and_count" for r in rows)
        assert all(r["benchmark"] == "pairwise" for r in rows)
        assert all(float(r["value"]) > 0 for r in rows)
        reports.append([{k: v for k, v in r.items()
                         if k not in ("value", "dispersion")} for r in rows])
    ok = ok and reports[0] == reports[1]
    _report(10, "CLI end-to-end", ok,
            "(gen -> validate -> bench, schema + determinism)")
