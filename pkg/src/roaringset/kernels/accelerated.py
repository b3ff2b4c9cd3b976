"""Vector-accelerated kernels built on numpy.

Outputs are byte-identical to the scalar backend.  The bitset routines run a
carry-save-adder (Harley-Seal) circuit over wide word lanes; the sorted-array
routines process fixed-width blocks: intersection and difference compare every
block pair that the max-based advance rule would visit, union and symmetric
difference run the sequential block merge with duplicate removal.  Tails that
do not fill a block are finished with scalar code.
"""

from __future__ import annotations

import heapq

import numpy as np

from . import scalar
from ._shared import BLOCK_K, BLOCK_WORDS, GALLOP_RATIO, OPS, empty_u16

BACKEND_NAME = "accelerated"

_HS_INPUTS = 16
_HS_LANES = BLOCK_WORDS // _HS_INPUTS

if hasattr(np, "bitwise_count"):
    def _popcount_words(arr: np.ndarray) -> int:
        return int(np.bitwise_count(arr).sum(dtype=np.int64))
else:  # numpy < 2.0
    _BYTE_POP = np.array([bin(i).count("1") for i in range(256)], dtype=np.uint8)

    def _popcount_words(arr: np.ndarray) -> int:
        by = np.frombuffer(arr.astype("<u8").tobytes(), dtype=np.uint8)
        return int(_BYTE_POP[by].sum(dtype=np.int64))


def csa(a, b, c):
    """Carry-save add three bit vectors: returns (high, low) with 2*h + l == a + b + c per lane."""
    u = a ^ b
    return (a & b) | (u & c), u ^ c


class HarleySealAccumulator:
    """Bit-sliced adder state: ones/twos/fours/eights lanes plus a spill total.

    Each consume_block() folds sixteen lane-groups through a carry-save adder
    tree, then counts and drops the produced ``sixteens`` so no 5-bit counter
    can overflow on the next block.
    """

    __slots__ = ("ones", "twos", "fours", "eights", "spill")

    def __init__(self) -> None:
        self.ones = np.zeros(_HS_LANES, dtype=np.uint64)
        self.twos = np.zeros(_HS_LANES, dtype=np.uint64)
        self.fours = np.zeros(_HS_LANES, dtype=np.uint64)
        self.eights = np.zeros(_HS_LANES, dtype=np.uint64)
        self.spill = 0

    def consume_block(self, words: np.ndarray) -> None:
        d = words.reshape(_HS_INPUTS, _HS_LANES)
        ones, twos, fours, eights = self.ones, self.twos, self.fours, self.eights
        twos_a, ones = csa(ones, d[0], d[1])
        twos_b, ones = csa(ones, d[2], d[3])
        fours_a, twos = csa(twos, twos_a, twos_b)
        twos_a, ones = csa(ones, d[4], d[5])
        twos_b, ones = csa(ones, d[6], d[7])
        fours_b, twos = csa(twos, twos_a, twos_b)
        eights_a, fours = csa(fours, fours_a, fours_b)
        twos_a, ones = csa(ones, d[8], d[9])
        twos_b, ones = csa(ones, d[10], d[11])
        fours_a, twos = csa(twos, twos_a, twos_b)
        twos_a, ones = csa(ones, d[12], d[13])
        twos_b, ones = csa(ones, d[14], d[15])
        fours_b, twos = csa(twos, twos_a, twos_b)
        eights_b, fours = csa(fours, fours_a, fours_b)
        sixteens, eights = csa(eights, eights_a, eights_b)
        self.ones, self.twos, self.fours, self.eights = ones, twos, fours, eights
        self.spill += _popcount_words(sixteens)

    def total(self) -> int:
        return (16 * self.spill
                + 8 * _popcount_words(self.eights)
                + 4 * _popcount_words(self.fours)
                + 2 * _popcount_words(self.twos)
                + _popcount_words(self.ones))


def popcount_block(words: np.ndarray) -> int:
    """Total number of 1-bits; full 1024-word blocks go through the adder circuit."""
    n = len(words)
    nblocks = n // BLOCK_WORDS
    total = 0
    if nblocks:
        acc = HarleySealAccumulator()
        for k in range(nblocks):
            acc.consume_block(words[k * BLOCK_WORDS:(k + 1) * BLOCK_WORDS])
        total = acc.total()
    tail = words[nblocks * BLOCK_WORDS:]
    if len(tail):
        total += _popcount_words(tail)
    return total


def _np_op(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "xor":
        return a ^ b
    if op == "andnot":
        return a & ~b
    raise ValueError(f"unknown op {op!r}")


def bitset_op_with_count(a: np.ndarray, b: np.ndarray, op: str):
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    out = _np_op(op, a, b)
    return out, popcount_block(out)


def bitset_op_count_only(a: np.ndarray, b: np.ndarray, op: str) -> int:
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    return popcount_block(_np_op(op, a, b))


def extract_set_bits(words: np.ndarray, base: int = 0) -> np.ndarray:
    if len(words) == 0:
        return empty_u16()
    raw = np.frombuffer(words.astype("<u8").tobytes(), dtype=np.uint8)
    pos = np.flatnonzero(np.unpackbits(raw, bitorder="little"))
    return (pos + base).astype(np.uint16)


def bitset_apply_array(words: np.ndarray, positions: np.ndarray, mode: str, track: bool):
    out = words.copy()
    if len(positions):
        p = positions.astype(np.uint64)
        idx = (p >> np.uint64(6)).astype(np.intp)
        bit = np.uint64(1) << (p & np.uint64(63))
        if mode == "set":
            np.bitwise_or.at(out, idx, bit)
        elif mode == "clear":
            np.bitwise_and.at(out, idx, ~bit)
        elif mode == "flip":
            np.bitwise_xor.at(out, idx, bit)
        else:
            raise ValueError(f"unknown mode {mode!r}")
    delta = 0
    if track:
        delta = popcount_block(out) - popcount_block(words)
    return out, delta


def _member_mask(vals: np.ndarray, arr: np.ndarray) -> np.ndarray:
    """Boolean mask: vals[i] present in sorted array arr (binary search)."""
    if len(vals) == 0 or len(arr) == 0:
        return np.zeros(len(vals), dtype=bool)
    pos = np.searchsorted(arr, vals)
    inb = pos < len(arr)
    return inb & (arr[np.where(inb, pos, 0)] == vals)


def _visited_block_pairs(max_a: np.ndarray, max_b: np.ndarray):
    """Block pairs visited by the advance rule, closed form.

    A pair (i, j) is compared exactly when max_a[i-1] < max_b[j] and
    max_b[j-1] < max_a[i] (out-of-range maxima read as -1); that is the set of
    pairs the sequential load-the-block-with-the-smaller-max walk touches.
    Returns (ii, jj, counts-per-i), with pairs in walk order.
    """
    n_a, n_b = len(max_a), len(max_b)
    prev_a = np.empty(n_a, dtype=np.int64)
    prev_a[0] = -1
    prev_a[1:] = max_a[:-1]
    jlo = np.searchsorted(max_b, prev_a, side="right")
    jhi = np.minimum(np.searchsorted(max_b, max_a, side="left"), n_b - 1)
    cnt = np.maximum(jhi - jlo + 1, 0)
    total = int(cnt.sum())
    ii = np.repeat(np.arange(n_a), cnt)
    starts = np.cumsum(cnt) - cnt
    offs = np.arange(total) - np.repeat(starts, cnt)
    jj = np.repeat(jlo, cnt) + offs
    return ii, jj, cnt


def array_intersect(a: np.ndarray, b: np.ndarray, count_only: bool = False):
    if len(a) > len(b):
        a, b = b, a
    n_a, n_b = len(a), len(b)
    if n_a == 0:
        return 0 if count_only else empty_u16()
    if GALLOP_RATIO * n_a < n_b:
        return array_intersect_galloping(a, b, count_only)
    k = BLOCK_K
    blocks_a, blocks_b = n_a // k, n_b // k
    parts = []
    count = 0
    if blocks_a and blocks_b:
        fa = a[:blocks_a * k].reshape(blocks_a, k)
        fb = b[:blocks_b * k].reshape(blocks_b, k)
        ii, jj, cnt = _visited_block_pairs(fa[:, -1].astype(np.int64),
                                           fb[:, -1].astype(np.int64))
        if len(ii):
            # all-pairs 16-bit equality inside every visited block pair
            eq = (fa[ii][:, :, None] == fb[jj][:, None, :]).any(axis=2)
            if count_only:
                count += int(eq.sum())
            else:
                sel = np.flatnonzero(cnt > 0)
                group_starts = (np.cumsum(cnt) - cnt)[sel]
                gmask = np.logical_or.reduceat(eq, group_starts, axis=0)
                parts.append(fa[sel][gmask])
    # scalar-tail equivalents, done with binary-search membership:
    # full blocks of a against b's tail, then a's tail against all of b
    full_a = a[:blocks_a * k]
    tail_b = b[blocks_b * k:]
    if len(full_a) and len(tail_b):
        m = _member_mask(full_a, tail_b)
        if count_only:
            count += int(m.sum())
        else:
            parts.append(full_a[m])
    tail_a = a[blocks_a * k:]
    if len(tail_a):
        m = _member_mask(tail_a, b)
        if count_only:
            count += int(m.sum())
        else:
            parts.append(tail_a[m])
    if count_only:
        return count
    return np.concatenate(parts) if parts else empty_u16()


def array_intersect_galloping(small: np.ndarray, large: np.ndarray,
                              count_only: bool = False):
    m = _member_mask(small, large)
    if count_only:
        return int(m.sum())
    return small[m]


def merge_blocks(b1: np.ndarray, b2: np.ndarray):
    k = len(b1)
    merged = np.sort(np.concatenate((b1, b2)))
    return merged[:k], merged[k:]


def dedup_store(prev_last: int, block: np.ndarray):
    n = len(block)
    if n == 0:
        return empty_u16(), 0
    keep = np.empty(n, dtype=bool)
    keep[0] = int(block[0]) != prev_last
    np.not_equal(block[1:], block[:-1], out=keep[1:])
    out = block[keep]
    return out, len(out)


def array_union(a: np.ndarray, b: np.ndarray, count_only: bool = False):
    n_a, n_b = len(a), len(b)
    k = BLOCK_K
    if n_a == 0:
        return n_b if count_only else b.copy()
    if n_b == 0:
        return n_a if count_only else a.copy()
    if n_a < k or n_b < k:
        return scalar.array_union(a, b, count_only)
    lo, hi = merge_blocks(a[:k], b[:k])
    i = j = k
    parts = []
    uniq, count = dedup_store(-1, lo)
    if not count_only:
        parts.append(uniq)
    prev_last = int(lo[-1])
    while i + k <= n_a and j + k <= n_b:
        # load the block whose next value is smallest
        if int(a[i]) < int(b[j]):
            blk = a[i:i + k]
            i += k
        else:
            blk = b[j:j + k]
            j += k
        lo, hi = merge_blocks(blk, hi)
        uniq, c = dedup_store(prev_last, lo)
        count += c
        if not count_only:
            parts.append(uniq)
        prev_last = int(lo[-1])
    tail = []
    for v in heapq.merge(hi.tolist(), a[i:].tolist(), b[j:].tolist()):
        if v != prev_last:
            tail.append(v)
            prev_last = v
    count += len(tail)
    if count_only:
        return count
    parts.append(np.array(tail, dtype=np.uint16))
    return np.concatenate(parts)


def array_difference(a: np.ndarray, b: np.ndarray, count_only: bool = False):
    n_a, n_b = len(a), len(b)
    if n_a == 0:
        return 0 if count_only else empty_u16()
    if n_b == 0:
        return n_a if count_only else a.copy()
    k = BLOCK_K
    blocks_a, blocks_b = n_a // k, n_b // k
    marks = None
    if blocks_a:
        fa = a[:blocks_a * k].reshape(blocks_a, k)
        marks = np.zeros((blocks_a, k), dtype=bool)
        if blocks_b:
            fb = b[:blocks_b * k].reshape(blocks_b, k)
            ii, jj, cnt = _visited_block_pairs(fa[:, -1].astype(np.int64),
                                               fb[:, -1].astype(np.int64))
            if len(ii):
                # deletion masks, ORed across every b-block a block was held against
                eq = (fa[ii][:, :, None] == fb[jj][:, None, :]).any(axis=2)
                sel = np.flatnonzero(cnt > 0)
                group_starts = (np.cumsum(cnt) - cnt)[sel]
                marks[sel] = np.logical_or.reduceat(eq, group_starts, axis=0)
        tail_b = b[blocks_b * k:]
        if len(tail_b):
            marks |= _member_mask(fa.ravel(), tail_b).reshape(blocks_a, k)
    tail_a = a[blocks_a * k:]
    tail_marks = _member_mask(tail_a, b) if len(tail_a) else np.zeros(0, dtype=bool)
    if count_only:
        kept = blocks_a * k - int(marks.sum()) if blocks_a else 0
        return kept + len(tail_a) - int(tail_marks.sum())
    parts = []
    if blocks_a:
        parts.append(a[:blocks_a * k].reshape(blocks_a, k)[~marks])
    if len(tail_a):
        parts.append(tail_a[~tail_marks])
    return np.concatenate(parts) if parts else empty_u16()


def array_xor(a: np.ndarray, b: np.ndarray, count_only: bool = False):
    n_a, n_b = len(a), len(b)
    k = BLOCK_K
    if n_a == 0:
        return n_b if count_only else b.copy()
    if n_b == 0:
        return n_a if count_only else a.copy()
    if n_a < k or n_b < k:
        return scalar.array_xor(a, b, count_only)

    parts = []
    count = 0
    # The largest value of each merged low block is never written immediately:
    # it is carried and decided against the next block's smallest values.
    carry = -1
    carry_dead = False

    def flush(lo: np.ndarray) -> None:
        nonlocal carry, carry_dead, count
        if carry < 0:
            eq = lo[1:] == lo[:-1]
            dead = eq.copy()
            dead[1:] |= eq[:-1]
            emit = lo[:-1][~dead]
        else:
            seq = np.empty(len(lo) + 1, dtype=lo.dtype)
            seq[0] = carry
            seq[1:] = lo
            eq = seq[1:] == seq[:-1]
            dead = eq.copy()
            dead[0] |= carry_dead
            dead[1:] |= eq[:-1]
            emit = seq[:-1][~dead]
        count += len(emit)
        if not count_only:
            parts.append(emit)
        carry = int(lo[-1])
        carry_dead = bool(lo[-1] == lo[-2])

    lo, hi = merge_blocks(a[:k], b[:k])
    i = j = k
    flush(lo)
    while i + k <= n_a and j + k <= n_b:
        if int(a[i]) < int(b[j]):
            blk = a[i:i + k]
            i += k
        else:
            blk = b[j:j + k]
            j += k
        lo, hi = merge_blocks(blk, hi)
        flush(lo)
    tail = []
    for v in heapq.merge(hi.tolist(), a[i:].tolist(), b[j:].tolist()):
        if carry < 0:
            carry = v
            carry_dead = False
        elif v == carry:
            carry = -1  # repeated value: both occurrences drop
        else:
            if not carry_dead:
                tail.append(carry)
            carry = v
            carry_dead = False
    if carry >= 0 and not carry_dead:
        tail.append(carry)
    count += len(tail)
    if count_only:
        return count
    parts.append(np.array(tail, dtype=np.uint16))
    return np.concatenate(parts)
