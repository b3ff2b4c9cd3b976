"""Baseline set structures and the sorted-array oracle.

The sorted-array two-pointer merges below are the ground truth for every
correctness assertion in the repository.  They share no code with the kernels
module: plain Python loops over plain lists, checked in their own tests by
exhaustive enumeration over a small universe.
"""

from __future__ import annotations

import sys

import numpy as np


def oracle_pairwise(op: str, a: np.ndarray, b: np.ndarray,
                    count_only: bool = False):
    """Textbook two-pointer merge over two sorted distinct uint32 arrays."""
    xs, ys = a.tolist(), b.tolist()
    na, nb = len(xs), len(ys)
    i = j = 0
    out: list[int] = []
    push = out.append
    if op == "and":
        while i < na and j < nb:
            x, y = xs[i], ys[j]
            if x == y:
                push(x)
                i += 1
                j += 1
            elif x < y:
                i += 1
            else:
                j += 1
    elif op == "or":
        while i < na and j < nb:
            x, y = xs[i], ys[j]
            if x == y:
                push(x)
                i += 1
                j += 1
            elif x < y:
                push(x)
                i += 1
            else:
                push(y)
                j += 1
        out.extend(xs[i:])
        out.extend(ys[j:])
    elif op == "andnot":
        while i < na and j < nb:
            x, y = xs[i], ys[j]
            if x == y:
                i += 1
                j += 1
            elif x < y:
                push(x)
                i += 1
            else:
                j += 1
        out.extend(xs[i:])
    elif op == "xor":
        while i < na and j < nb:
            x, y = xs[i], ys[j]
            if x == y:
                i += 1
                j += 1
            elif x < y:
                push(x)
                i += 1
            else:
                push(y)
                j += 1
        out.extend(xs[i:])
        out.extend(ys[j:])
    else:
        raise ValueError(f"unknown op {op!r}")
    if count_only:
        return len(out)
    return np.array(out, dtype=np.uint32)


class BaselineSortedArray:
    """Strictly increasing uint32 values; ops are the oracle merges."""

    __slots__ = ("values",)

    def __init__(self, values: np.ndarray):
        self.values = np.asarray(values, dtype=np.uint32)

    def __len__(self) -> int:
        return len(self.values)

    def contains(self, v: int) -> bool:
        i = int(np.searchsorted(self.values, v))
        return i < len(self.values) and int(self.values[i]) == v

    def op(self, op: str, other: "BaselineSortedArray") -> "BaselineSortedArray":
        return BaselineSortedArray(oracle_pairwise(op, self.values, other.values))

    def op_cardinality(self, op: str, other: "BaselineSortedArray") -> int:
        return oracle_pairwise(op, self.values, other.values, count_only=True)

    def bytes_used(self) -> int:
        return 4 * len(self.values)

    def iterate_count(self) -> int:
        count = 0
        for _ in self.values.tolist():
            count += 1
        return count

    def to_array(self) -> np.ndarray:
        return self.values


class BaselineBitset:
    """Uncompressed bitset over a fixed universe: one bit per possible value."""

    __slots__ = ("words", "cardinality")

    def __init__(self, values: np.ndarray | None, universe: int,
                 _words: np.ndarray | None = None):
        n_words = (universe + 63) // 64
        if _words is not None:
            self.words = _words
            self.cardinality = _popcount(_words)
            return
        bits = np.zeros(n_words * 64, dtype=bool)
        if values is not None and len(values):
            bits[np.asarray(values, dtype=np.int64)] = True
        self.words = np.frombuffer(
            np.packbits(bits, bitorder="little").tobytes(), dtype="<u8"
        ).astype(np.uint64)
        self.cardinality = int(len(values)) if values is not None else 0

    def __len__(self) -> int:
        return self.cardinality

    def contains(self, v: int) -> bool:
        w = v >> 6
        if w >= len(self.words):
            return False
        return bool((int(self.words[w]) >> (v & 63)) & 1)

    def op(self, op: str, other: "BaselineBitset") -> "BaselineBitset":
        return BaselineBitset(None, len(self.words) * 64,
                              _words=_word_op(op, self.words, other.words))

    def op_cardinality(self, op: str, other: "BaselineBitset") -> int:
        return _popcount(_word_op(op, self.words, other.words))

    def ior(self, other: "BaselineBitset") -> None:
        self.words |= other.words
        self.cardinality = -1  # repaired by refresh()

    def refresh(self) -> None:
        self.cardinality = _popcount(self.words)

    def bytes_used(self) -> int:
        return len(self.words) * 8

    def iterate_count(self) -> int:
        # scan words, peeling one set bit at a time
        count = 0
        for w in self.words.tolist():
            while w:
                w &= w - 1
                count += 1
        return count

    def to_array(self) -> np.ndarray:
        raw = np.frombuffer(self.words.astype("<u8").tobytes(), dtype=np.uint8)
        return np.flatnonzero(np.unpackbits(raw, bitorder="little")).astype(np.uint32)


class BaselineHashSet:
    """General-purpose unordered set of ints."""

    __slots__ = ("values",)

    def __init__(self, values=None, _set: set | None = None):
        self.values = _set if _set is not None else set(
            int(v) for v in (values if values is not None else ()))

    def __len__(self) -> int:
        return len(self.values)

    def contains(self, v: int) -> bool:
        return v in self.values

    def op(self, op: str, other: "BaselineHashSet") -> "BaselineHashSet":
        a, b = self.values, other.values
        if op == "and":
            s = a & b
        elif op == "or":
            s = a | b
        elif op == "andnot":
            s = a - b
        elif op == "xor":
            s = a ^ b
        else:
            raise ValueError(f"unknown op {op!r}")
        return BaselineHashSet(_set=s)

    def op_cardinality(self, op: str, other: "BaselineHashSet") -> int:
        return len(self.op(op, other))

    def bytes_used(self) -> int:
        # allocation-counting estimate: table plus every member object;
        # never invoked during timed runs
        return sys.getsizeof(self.values) + sum(
            sys.getsizeof(v) for v in self.values)

    def iterate_count(self) -> int:
        count = 0
        for _ in self.values:
            count += 1
        return count

    def to_array(self) -> np.ndarray:
        return np.array(sorted(self.values), dtype=np.uint32)


def _word_op(op: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if op == "and":
        return a & b
    if op == "or":
        return a | b
    if op == "andnot":
        return a & ~b
    if op == "xor":
        return a ^ b
    raise ValueError(f"unknown op {op!r}")


if hasattr(np, "bitwise_count"):
    def _popcount(words: np.ndarray) -> int:
        return int(np.bitwise_count(words).sum(dtype=np.int64))
else:
    def _popcount(words: np.ndarray) -> int:
        return sum(int(w).bit_count() for w in words)
