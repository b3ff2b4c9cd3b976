"""Scalar-vs-accelerated differential suite.

Feeds every kernel randomized inputs and demands byte-identical outputs and
identical counts from both backends.  Exposed to users through the CLI
``selftest`` subcommand; the acceptance tests run it at full size.

Inputs deliberately cover the awkward spots: empty arrays, lengths not
divisible by the block width, arrays whose first element is 0, duplicate and
unsorted position lists, all-zero and all-one word blocks.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from . import accelerated, scalar

_MAX_FAILURES = 20


def _same(x, y) -> bool:
    if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
        return (isinstance(x, np.ndarray) and isinstance(y, np.ndarray)
                and x.dtype == y.dtype and np.array_equal(x, y))
    if isinstance(x, tuple):
        return isinstance(y, tuple) and len(x) == len(y) and all(
            _same(a, b) for a, b in zip(x, y))
    return type(x) is type(y) and x == y


class _Recorder:
    def __init__(self) -> None:
        self.failures: list[str] = []
        self.cases = 0

    def check(self, kernel: str, idx: int, got_scalar, got_accel) -> None:
        self.cases += 1
        if len(self.failures) >= _MAX_FAILURES:
            return
        if not _same(got_scalar, got_accel):
            self.failures.append(
                f"{kernel}[case {idx}]: scalar={got_scalar!r} accelerated={got_accel!r}")


def _rand_sorted_u16(rng: np.random.Generator, zero_first: bool) -> np.ndarray:
    """Sorted distinct uint16 array; mixed lengths, mixed densities."""
    r = rng.random()
    if r < 0.05:
        n = 0
    elif r < 0.80:
        n = int(rng.integers(1, 65))
    elif r < 0.95:
        n = int(rng.integers(65, 1025))
    else:
        n = int(rng.integers(1025, 8193))
    if n == 0:
        return np.empty(0, dtype=np.uint16)
    # log-uniform span in [n, 65536] sweeps densities from ~1 down to n/2^16
    span = int(np.exp(rng.uniform(np.log(n), np.log(65537))))
    span = min(max(span, n), 65536)
    vals = np.unique(rng.integers(0, span, size=n))
    if zero_first and (len(vals) == 0 or vals[0] != 0):
        vals = np.union1d(vals, np.array([0], dtype=vals.dtype))
    return vals.astype(np.uint16)


def _rand_words(rng: np.random.Generator, n: int) -> np.ndarray:
    style = rng.random()
    if style < 0.1:
        return np.zeros(n, dtype=np.uint64)
    if style < 0.2:
        return np.full(n, np.uint64(0xFFFFFFFFFFFFFFFF))
    w = rng.integers(0, 1 << 64, size=n, dtype=np.uint64)
    if style < 0.5:
        w &= rng.integers(0, 1 << 64, size=n, dtype=np.uint64)  # sparsen
    return w


def _ops_cycle(rng: np.random.Generator) -> str:
    return ("and", "or", "andnot", "xor")[int(rng.integers(0, 4))]


def run_selftest(cases: int = 10_000, seed: int = 2024,
                 progress: Callable[[str], None] | None = None) -> list[str]:
    """Run ``cases`` randomized inputs through each kernel on both backends.

    Returns a list of mismatch descriptions; empty means the backends agree.
    """
    rec = _Recorder()
    say = progress or (lambda msg: None)
    root = np.random.SeedSequence(seed)

    def _spawn() -> np.random.Generator:
        return np.random.Generator(np.random.PCG64(root.spawn(1)[0]))

    # csa: scalar formula on ints versus vector formula on u64 lanes
    rng = _spawn()
    a = rng.integers(0, 1 << 64, size=cases, dtype=np.uint64)
    b = rng.integers(0, 1 << 64, size=cases, dtype=np.uint64)
    c = rng.integers(0, 1 << 64, size=cases, dtype=np.uint64)
    vh, vl = accelerated.csa(a, b, c)
    for i in range(cases):
        sh, sl = scalar.csa(int(a[i]), int(b[i]), int(c[i]))
        rec.check("csa", i, (sh, sl), (int(vh[i]), int(vl[i])))
    say("csa done")

    rng = _spawn()
    for i in range(cases):
        style = rng.random()
        if style < 0.3:
            n = 1024  # one exact block
        elif style < 0.6:
            n = int(rng.integers(0, 128))  # tail only, often not 16-aligned
        else:
            n = int(rng.integers(0, 2049))
        words = _rand_words(rng, n)
        rec.check("popcount_block", i,
                  scalar.popcount_block(words), accelerated.popcount_block(words))
    say("popcount_block done")

    rng = _spawn()
    for i in range(cases):
        wa = _rand_words(rng, 1024)
        wb = _rand_words(rng, 1024)
        op = _ops_cycle(rng)
        rec.check("bitset_op_with_count", i,
                  scalar.bitset_op_with_count(wa, wb, op),
                  accelerated.bitset_op_with_count(wa, wb, op))
        rec.check("bitset_op_count_only", i,
                  scalar.bitset_op_count_only(wa, wb, op),
                  accelerated.bitset_op_count_only(wa, wb, op))
    say("bitset ops done")

    rng = _spawn()
    for i in range(cases):
        n = int(rng.integers(0, 33))
        words = _rand_words(rng, n)
        base = int(rng.integers(0, 128))
        rec.check("extract_set_bits", i,
                  scalar.extract_set_bits(words, base),
                  accelerated.extract_set_bits(words, base))
    say("extract_set_bits done")

    rng = _spawn()
    modes = ("set", "clear", "flip")
    for i in range(cases):
        words = _rand_words(rng, 1024)
        npos = int(rng.integers(0, 257))
        positions = rng.integers(0, 65536, size=npos, dtype=np.uint16)
        if npos and rng.random() < 0.3:
            positions[npos // 2] = positions[0]  # guarantee duplicates
        mode = modes[int(rng.integers(0, 3))]
        track = bool(rng.integers(0, 2))
        rec.check("bitset_apply_array", i,
                  scalar.bitset_apply_array(words, positions, mode, track),
                  accelerated.bitset_apply_array(words, positions, mode, track))
    say("bitset_apply_array done")

    rng = _spawn()
    for i in range(cases):
        zero_first = i % 10 == 0
        a16 = _rand_sorted_u16(rng, zero_first)
        b16 = _rand_sorted_u16(rng, zero_first and i % 20 == 0)
        for name, fn_s, fn_a in (
            ("array_intersect", scalar.array_intersect, accelerated.array_intersect),
            ("array_union", scalar.array_union, accelerated.array_union),
            ("array_difference", scalar.array_difference, accelerated.array_difference),
            ("array_xor", scalar.array_xor, accelerated.array_xor),
        ):
            rec.check(name, i, fn_s(a16, b16), fn_a(a16, b16))
            rec.check(name + "_count", i,
                      fn_s(a16, b16, True), fn_a(a16, b16, True))
    say("array set ops done")

    rng = _spawn()
    for i in range(cases):
        small = _rand_sorted_u16(rng, i % 7 == 0)
        if len(small) > 64:
            small = small[:64]
        large = _rand_sorted_u16(rng, i % 11 == 0)
        if len(small) > len(large):
            small, large = large, small
        rec.check("array_intersect_galloping", i,
                  scalar.array_intersect_galloping(small, large),
                  accelerated.array_intersect_galloping(small, large))
        rec.check("array_intersect_galloping_count", i,
                  scalar.array_intersect_galloping(small, large, True),
                  accelerated.array_intersect_galloping(small, large, True))
    say("galloping done")

    rng = _spawn()
    for i in range(cases):
        b1 = np.sort(rng.integers(0, 64, size=8).astype(np.uint16))
        b2 = np.sort(rng.integers(0, 64, size=8).astype(np.uint16))
        rec.check("merge_blocks", i,
                  scalar.merge_blocks(b1, b2), accelerated.merge_blocks(b1, b2))
        blk = np.sort(rng.integers(0, 16, size=8).astype(np.uint16))
        prev = int(rng.integers(-1, 16))
        rec.check("dedup_store", i,
                  scalar.dedup_store(prev, blk), accelerated.dedup_store(prev, blk))
    say("merge_blocks/dedup_store done")

    return rec.failures
