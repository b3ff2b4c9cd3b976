"""Harness tests: the oracle itself, report schema, correctness gating."""

import numpy as np
import pytest

from roaringset import gen_clusterdata
from roaringset.bench import harness
from roaringset.bench.baselines import (BaselineBitset, BaselineHashSet,
                                        BaselineSortedArray, oracle_pairwise)
from roaringset.serde import Dataset


def _mask_to_array(mask, width):
    return np.array([i for i in range(width) if mask >> i & 1], dtype=np.uint32)


def test_oracle_by_exhaustive_enumeration():
    # every subset pair of a 6-value universe, all four operations
    width = 6
    for ma in range(1 << width):
        a = _mask_to_array(ma, width)
        sa = set(a.tolist())
        for mb in range(1 << width):
            b = _mask_to_array(mb, width)
            sb = set(b.tolist())
            assert oracle_pairwise("and", a, b).tolist() == sorted(sa & sb)
            assert oracle_pairwise("or", a, b).tolist() == sorted(sa | sb)
            assert oracle_pairwise("andnot", a, b).tolist() == sorted(sa - sb)
            assert oracle_pairwise("xor", a, b).tolist() == sorted(sa ^ sb)
            assert oracle_pairwise("xor", a, b, count_only=True) == len(sa ^ sb)


def test_oracle_trivial_identities():
    x = np.array([4, 9, 100], dtype=np.uint32)
    empty = np.empty(0, dtype=np.uint32)
    assert oracle_pairwise("and", x, x).tolist() == x.tolist()
    assert oracle_pairwise("or", x, empty).tolist() == x.tolist()
    assert oracle_pairwise("xor", x, x).tolist() == []
    assert oracle_pairwise("and", x, b=np.array([1, 2, 3, 4, 6, 7, 8, 9],
                                                dtype=np.uint32)).tolist() == [4, 9]


def test_baseline_structures_agree():
    rng = np.random.default_rng(1)
    universe = 100_000
    a = np.unique(rng.integers(0, universe, 4000)).astype(np.uint32)
    b = np.unique(rng.integers(0, universe, 4000)).astype(np.uint32)
    sa, sb = BaselineSortedArray(a), BaselineSortedArray(b)
    ba, bb = BaselineBitset(a, universe), BaselineBitset(b, universe)
    ha, hb = BaselineHashSet(a), BaselineHashSet(b)
    for op in harness.OPS:
        expected = oracle_pairwise(op, a, b)
        assert np.array_equal(sa.op(op, sb).to_array(), expected)
        assert np.array_equal(ba.op(op, bb).to_array(), expected)
        assert np.array_equal(ha.op(op, hb).to_array(), expected)
        assert sa.op_cardinality(op, sb) == len(expected)
        assert ba.op_cardinality(op, bb) == len(expected)
        assert ha.op_cardinality(op, hb) == len(expected)
    assert ba.iterate_count() == len(a) == sa.iterate_count() == ha.iterate_count()
    for v in (int(a[0]), universe - 1, int(a[-1])):
        expect = bool(np.isin(v, a))
        assert sa.contains(v) == ba.contains(v) == ha.contains(v) == expect


def test_membership_probe_positions():
    # universe from a real corpus listing: floor(n/4), floor(n/2), floor(3n/4)
    ds = Dataset("census", [np.array([0, 4_277_805], dtype=np.uint32)])
    assert ds.universe == 4_277_806
    assert harness._membership_probes(ds) == (1_069_451, 2_138_903, 3_208_354)


@pytest.fixture(scope="module")
def small_dataset():
    return gen_clusterdata(5, 10, 1500, 400_000)


def test_bench_rows_schema(small_dataset):
    ds = small_dataset
    built = harness.build_structures(ds, harness.STRUCTURES)
    rows = harness.bench_pairwise(ds, "and", structures=harness.STRUCTURES,
                                  built=built)
    assert [r.structure for r in rows] == list(harness.STRUCTURES)
    for r in rows:
        assert r.dataset == ds.name
        assert r.benchmark == "pairwise" and r.metric == "and"
        assert r.units == "ns/value" and r.runs >= 5
        assert r.value > 0 and r.dispersion >= 1.0
    rows = harness.bench_pairwise(ds, "and", count_only=True,
                                  structures=("roaring",), built=built)
    assert rows[0].metric == "and_count"
    mem = harness.bench_memory(ds, ("roaring", "array"), built=built)
    metrics = {(r.structure, r.metric) for r in mem}
    assert ("roaring", "bits_per_value") in metrics
    assert ("roaring", "bits_per_value_serialized") in metrics
    arr_row = next(r for r in mem if r.structure == "array")
    assert arr_row.value == 32.0


def test_bench_iterate_and_membership_and_wideunion(small_dataset):
    ds = small_dataset
    structures = ("roaring", "array", "bitset", "hashset")
    built = harness.build_structures(ds, structures)
    for rows in (harness.bench_iterate(ds, structures, built=built),
                 harness.bench_membership(ds, structures, built=built),
                 harness.bench_wide_union(ds, structures, built=built)):
        assert len(rows) == len(structures)
        assert all(r.value > 0 for r in rows)


def test_pairwise_count_matches_materialized(small_dataset):
    ds = small_dataset
    built = harness.build_structures(ds, ("roaring",))
    bms = built["roaring"]
    for op in harness.OPS:
        for x, y in zip(bms, bms[1:]):
            assert x.op_cardinality(op, y) == len(x.op(op, y))


def test_pairwise_measures_199_ops_for_200_sets(monkeypatch):
    sets = [np.array([i, i + 1000], dtype=np.uint32) for i in range(200)]
    ds = Dataset("d200", sets)
    calls = []
    orig = harness.oracle_pairwise

    def counting(op, a, b, count_only=False):
        calls.append(op)
        return orig(op, a, b, count_only)

    monkeypatch.setattr(harness, "oracle_pairwise", counting)
    rows = harness.bench_pairwise(ds, "and", structures=("array",), runs=5)
    assert len(calls) == 199  # the oracle precomputes one result per pair
    assert len(rows) == 1


def test_xor_of_duplicated_sets_is_all_zero():
    same = np.array([7, 9, 4096, 70000], dtype=np.uint32)
    ds = Dataset("dup", [same.copy() for _ in range(6)])
    built = harness.build_structures(ds, ("roaring",))
    bms = built["roaring"]
    assert all(x.op_cardinality("xor", y) == 0 for x, y in zip(bms, bms[1:]))
    rows = harness.bench_pairwise(ds, "xor", count_only=True,
                                  structures=("roaring",), built=built)
    assert rows[0].metric == "xor_count"


def test_wide_union_trivial_shapes():
    same = np.array([1, 5, 100000], dtype=np.uint32)
    dup = Dataset("dup", [same.copy() for _ in range(10)])
    rows = harness.bench_wide_union(dup, ("roaring", "array"))
    assert len(rows) == 2
    single = Dataset("one", [same.copy()])
    rows = harness.bench_wide_union(single, ("roaring", "bitset"))
    assert len(rows) == 2


def test_correctness_gate_aborts_timing(small_dataset, monkeypatch):
    ds = small_dataset
    built = harness.build_structures(ds, ("roaring", "hashset"))
    monkeypatch.setattr(BaselineHashSet, "op_cardinality",
                        lambda self, op, other: 0)
    with pytest.raises(harness.CorrectnessError):
        harness.bench_pairwise(ds, "and", count_only=True,
                               structures=("roaring", "hashset"), built=built)


def test_validate_dataset_clean_and_dirty(small_dataset, monkeypatch):
    assert harness.validate_dataset(small_dataset) == []
    monkeypatch.setattr(BaselineHashSet, "op_cardinality",
                        lambda self, op, other: 1)
    failures = harness.validate_dataset(small_dataset,
                                        ("roaring", "hashset"))
    assert failures and any("hashset" in f for f in failures)


def test_report_csv_and_json(small_dataset, tmp_path):
    import csv
    import json
    rows = harness.bench_memory(small_dataset, ("roaring", "array"))
    report = harness.BenchReport(rows)
    csv_path = tmp_path / "r.csv"
    with open(csv_path, "w", newline="") as fh:
        report.to_csv(fh)
    with open(csv_path) as fh:
        parsed = list(csv.reader(fh))
    assert parsed[0] == list(harness.CSV_COLUMNS)
    assert len(parsed) == 1 + len(rows)
    json_path = tmp_path / "r.json"
    with open(json_path, "w") as fh:
        report.to_json(fh)
    loaded = json.loads(json_path.read_text())
    assert {r["structure"] for r in loaded} == {"roaring", "array"}
