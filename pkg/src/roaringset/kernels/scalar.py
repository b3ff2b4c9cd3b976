"""Portable scalar kernels.

Every function here is a plain-Python loop over the same storage the
accelerated backend uses (numpy arrays in, numpy arrays out), so the two
backends can be compared byte for byte.  These are the reference
implementations: simple, branchy, obviously correct.
"""

from __future__ import annotations

import numpy as np

from ._shared import GALLOP_RATIO, OPS, empty_u16

BACKEND_NAME = "scalar"


def csa(a, b, c):
    """Carry-save add three bit vectors: returns (high, low) with 2*h + l == a + b + c per lane.

    Works on plain ints and on numpy arrays alike; the five logical
    operations are the same either way.
    """
    u = a ^ b
    return (a & b) | (u & c), u ^ c


def popcount_block(words) -> int:
    """Total number of 1-bits across a sequence of 64-bit words."""
    return sum(int(w).bit_count() for w in words)


def _word_op(op: str, x: int, y: int) -> int:
    if op == "and":
        return x & y
    if op == "or":
        return x | y
    if op == "xor":
        return x ^ y
    if op == "andnot":
        return x & ~y
    raise ValueError(f"unknown op {op!r}")


def bitset_op_with_count(a, b, op: str):
    """Wordwise logical op between two equal-length word blocks, counting as it goes."""
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    out = [0] * len(a)
    card = 0
    for i, (x, y) in enumerate(zip(a.tolist(), b.tolist())):
        w = _word_op(op, x, y)
        out[i] = w
        card += w.bit_count()
    return np.array(out, dtype=np.uint64), card


def bitset_op_count_only(a, b, op: str) -> int:
    """Cardinality of the wordwise logical op without keeping the result."""
    if op not in OPS:
        raise ValueError(f"unknown op {op!r}")
    card = 0
    for x, y in zip(a.tolist(), b.tolist()):
        card += _word_op(op, x, y).bit_count()
    return card


def extract_set_bits(words, base: int = 0) -> np.ndarray:
    """Positions of all 1-bits, ascending, offset by ``base``.

    Per word: isolate the lowest set bit (w & -w), read its index as a
    trailing-zero count, clear it, repeat.
    """
    out = []
    offset = base
    for w in words:
        w = int(w)
        while w:
            t = w & -w
            out.append(offset + t.bit_length() - 1)
            w ^= t
        offset += 64
    return np.array(out, dtype=np.uint16)


def bitset_apply_array(words, positions, mode: str, track: bool):
    """Set/clear/flip the bits named by ``positions``; branch-free cardinality delta.

    Positions may repeat and need not be sorted.  Returns a new word block
    and the popcount delta (0 when ``track`` is false).
    """
    w = [int(x) for x in words]
    delta = 0
    if mode == "set":
        for p in positions.tolist():
            i, sh = p >> 6, p & 63
            old = w[i]
            new = old | (1 << sh)
            if track:
                delta += (old ^ new) >> sh
            w[i] = new
    elif mode == "clear":
        for p in positions.tolist():
            i, sh = p >> 6, p & 63
            old = w[i]
            new = old & ~(1 << sh)
            if track:
                delta -= (old ^ new) >> sh
            w[i] = new
    elif mode == "flip":
        for p in positions.tolist():
            i, sh = p >> 6, p & 63
            old = w[i]
            w[i] = old ^ (1 << sh)
            if track:
                delta += 1 - 2 * ((old >> sh) & 1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return np.array(w, dtype=np.uint64), delta if track else 0


def array_intersect(a, b, count_only: bool = False):
    """Intersection of two sorted distinct uint16 arrays (two-pointer merge)."""
    if len(a) > len(b):
        a, b = b, a
    if len(a) == 0:
        return 0 if count_only else empty_u16()
    if GALLOP_RATIO * len(a) < len(b):
        return array_intersect_galloping(a, b, count_only)
    xs, ys = a.tolist(), b.tolist()
    i = j = 0
    na, nb = len(xs), len(ys)
    out = []
    while i < na and j < nb:
        x, y = xs[i], ys[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            i += 1
        else:
            j += 1
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint16)


def array_intersect_galloping(small, large, count_only: bool = False):
    """Intersection by exponential probe plus binary search per small element."""
    ss, ls = small.tolist(), large.tolist()
    n = len(ls)
    out = []
    lo = 0
    for v in ss:
        if lo >= n:
            break
        # exponential probe from the last match position
        bound = 1
        while lo + bound < n and ls[lo + bound] < v:
            bound <<= 1
        hi = min(lo + bound, n - 1)
        lo2 = lo + (bound >> 1)
        # binary search in [lo2, hi]
        while lo2 < hi:
            mid = (lo2 + hi) >> 1
            if ls[mid] < v:
                lo2 = mid + 1
            else:
                hi = mid
        if ls[lo2] == v:
            out.append(v)
        lo = lo2
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint16)


def merge_blocks(b1, b2):
    """Sorted merge of two equal-size sorted blocks, split into (low half, high half)."""
    k = len(b1)
    merged = sorted(b1.tolist() + b2.tolist())
    return (np.array(merged[:k], dtype=np.uint16),
            np.array(merged[k:], dtype=np.uint16))


def dedup_store(prev_last: int, block):
    """Drop block values equal to their predecessor (element 0's predecessor is prev_last)."""
    vals = block.tolist()
    out = []
    prev = prev_last
    for v in vals:
        if v != prev:
            out.append(v)
        prev = v
    return np.array(out, dtype=np.uint16), len(out)


def array_union(a, b, count_only: bool = False):
    """Union of two sorted distinct uint16 arrays (two-pointer merge)."""
    xs, ys = a.tolist(), b.tolist()
    i = j = 0
    na, nb = len(xs), len(ys)
    out = []
    while i < na and j < nb:
        x, y = xs[i], ys[j]
        if x == y:
            out.append(x)
            i += 1
            j += 1
        elif x < y:
            out.append(x)
            i += 1
        else:
            out.append(y)
            j += 1
    out.extend(xs[i:])
    out.extend(ys[j:])
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint16)


def array_difference(a, b, count_only: bool = False):
    """a minus b for sorted distinct uint16 arrays (two-pointer merge)."""
    xs, ys = a.tolist(), b.tolist()
    i = j = 0
    na, nb = len(xs), len(ys)
    out = []
    while i < na and j < nb:
        x, y = xs[i], ys[j]
        if x == y:
            i += 1
            j += 1
        elif x < y:
            out.append(x)
            i += 1
        else:
            j += 1
    out.extend(xs[i:])
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint16)


def array_xor(a, b, count_only: bool = False):
    """Symmetric difference of two sorted distinct uint16 arrays (two-pointer merge)."""
    xs, ys = a.tolist(), b.tolist()
    i = j = 0
    na, nb = len(xs), len(ys)
    out = []
    while i < na and j < nb:
        x, y = xs[i], ys[j]
        if x == y:
            i += 1
            j += 1
        elif x < y:
            out.append(x)
            i += 1
        else:
            out.append(y)
            j += 1
    out.extend(xs[i:])
    out.extend(ys[j:])
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint16)
