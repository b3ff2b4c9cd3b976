"""Chunk containers and canonical-type rules.

Each non-empty 2^16-value chunk of a bitmap is stored in one of three shapes:

* ``ArrayContainer`` — up to 4096 sorted distinct uint16 values;
* ``BitsetContainer`` — 1024 uint64 words plus a maintained cardinality,
  holding 4097 or more values;
* ``RunContainer`` — sorted, non-overlapping, non-adjacent (start, length)
  pairs, each covering the closed interval [start, start+length].

A run form is kept only while it is the strictly smallest of the three: with
more than 4096 values it may have at most 2047 runs, otherwise the run count
must be under half the cardinality.  ``container_normalize`` enforces all of
this; the mutation and pairwise operations always hand back normalized
containers (run candidacy for array/bitset inputs is only evaluated when
explicitly requested, which is what the bitmap-level run_optimize does).
"""

from __future__ import annotations

import heapq

import numpy as np

from . import kernels

ARRAY_MAX = 4096
RUN_MAX_RUNS = 2047
CHUNK_BITS = 1 << 16

TAG_ARRAY = 1
TAG_BITSET = 2
TAG_RUN = 3

_U64_ALL = np.uint64(0xFFFFFFFFFFFFFFFF)


class ArrayContainer:
    __slots__ = ("values", "capacity")
    tag = TAG_ARRAY

    def __init__(self, values=(), capacity: int = 0):
        self.values = np.asarray(values, dtype=np.uint16)
        self.capacity = max(len(self.values), capacity)

    def __len__(self) -> int:
        return len(self.values)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ArrayContainer)
                and np.array_equal(self.values, other.values))

    def __repr__(self) -> str:
        return f"ArrayContainer(card={len(self)})"

    def copy(self) -> "ArrayContainer":
        return ArrayContainer(self.values.copy(), self.capacity)


class BitsetContainer:
    __slots__ = ("words", "cardinality")
    tag = TAG_BITSET

    def __init__(self, words: np.ndarray, cardinality: int):
        self.words = words
        self.cardinality = cardinality

    def __len__(self) -> int:
        return self.cardinality

    def __eq__(self, other) -> bool:
        return (isinstance(other, BitsetContainer)
                and np.array_equal(self.words, other.words))

    def __repr__(self) -> str:
        return f"BitsetContainer(card={self.cardinality})"

    def copy(self) -> "BitsetContainer":
        return BitsetContainer(self.words.copy(), self.cardinality)


class RunContainer:
    __slots__ = ("runs", "capacity")
    tag = TAG_RUN

    def __init__(self, runs, capacity: int = 0):
        self.runs = np.asarray(runs, dtype=np.uint16).reshape(-1, 2)
        self.capacity = max(len(self.runs), capacity)

    def __len__(self) -> int:
        return len(self.runs) + int(self.runs[:, 1].sum(dtype=np.int64))

    def __eq__(self, other) -> bool:
        return (isinstance(other, RunContainer)
                and np.array_equal(self.runs, other.runs))

    def __repr__(self) -> str:
        return f"RunContainer(runs={len(self.runs)}, card={len(self)})"

    def copy(self) -> "RunContainer":
        return RunContainer(self.runs.copy(), self.capacity)


Container = ArrayContainer | BitsetContainer | RunContainer


def empty_container() -> ArrayContainer:
    return ArrayContainer()


# ---------------------------------------------------------------- conversions

def bitset_from_positions(positions: np.ndarray) -> BitsetContainer:
    bits = np.zeros(CHUNK_BITS, dtype=bool)
    bits[positions] = True
    words = np.frombuffer(
        np.packbits(bits, bitorder="little").tobytes(), dtype="<u8"
    ).astype(np.uint64)
    return BitsetContainer(words, len(positions))


def _words_from_runs(runs: np.ndarray) -> np.ndarray:
    words = np.zeros(kernels.BLOCK_WORDS, dtype=np.uint64)
    for s, l in runs.tolist():
        e = s + l
        ws, we = s >> 6, e >> 6
        first = _U64_ALL << np.uint64(s & 63)
        last = _U64_ALL >> np.uint64(63 - (e & 63))
        if ws == we:
            words[ws] |= first & last
        else:
            words[ws] |= first
            words[ws + 1:we] = _U64_ALL
            words[we] |= last
    return words


def _runs_from_positions(values: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return np.empty((0, 2), dtype=np.uint16)
    v = values.astype(np.int32)
    breaks = np.flatnonzero(np.diff(v) != 1)
    starts_idx = np.concatenate(([0], breaks + 1))
    ends_idx = np.concatenate((breaks, [len(v) - 1]))
    starts = v[starts_idx]
    lengths = v[ends_idx] - starts
    return np.stack([starts, lengths], axis=1).astype(np.uint16)


def _positions_from_runs(runs: np.ndarray) -> np.ndarray:
    if len(runs) == 0:
        return np.empty(0, dtype=np.uint16)
    parts = [np.arange(int(s), int(s) + int(l) + 1, dtype=np.int32)
             for s, l in runs.tolist()]
    return np.concatenate(parts).astype(np.uint16)


def container_positions(c: Container) -> np.ndarray:
    """All member values of the container as a sorted uint16 array."""
    if isinstance(c, ArrayContainer):
        return c.values
    if isinstance(c, BitsetContainer):
        return kernels.extract_set_bits(c.words)
    return _positions_from_runs(c.runs)


def _run_count_of_values(values: np.ndarray) -> int:
    if len(values) == 0:
        return 0
    return 1 + int(np.count_nonzero(np.diff(values.astype(np.int32)) != 1))


def _run_count_of_words(words: np.ndarray) -> int:
    # a run starts at every 1-bit whose predecessor bit is 0
    carry = np.concatenate((np.zeros(1, dtype=np.uint64),
                            words[:-1] >> np.uint64(63)))
    shifted = (words << np.uint64(1)) | carry
    return kernels.popcount_block(words & ~shifted)


def _bitset_probe(words: np.ndarray, values: np.ndarray) -> np.ndarray:
    if len(values) == 0:
        return np.zeros(0, dtype=bool)
    v = values.astype(np.uint64)
    idx = (v >> np.uint64(6)).astype(np.intp)
    return ((words[idx] >> (v & np.uint64(63))) & np.uint64(1)).astype(bool)


def _values_in_runs(values: np.ndarray, runs: np.ndarray) -> np.ndarray:
    if len(values) == 0 or len(runs) == 0:
        return np.zeros(len(values), dtype=bool)
    starts = runs[:, 0].astype(np.int32)
    ends = starts + runs[:, 1].astype(np.int32)
    v = values.astype(np.int32)
    i = np.searchsorted(starts, v, side="right") - 1
    ok = i >= 0
    return ok & (v <= ends[np.where(ok, i, 0)])


# ------------------------------------------------------------- normalization

def _run_admissible(card: int, n_runs: int) -> bool:
    if card > ARRAY_MAX:
        return n_runs <= RUN_MAX_RUNS
    return 2 * n_runs < card


def container_normalize(c: Container, consider_run: bool = False) -> Container:
    """Return the canonical, space-minimal form of a structurally valid container.

    Run candidacy of array/bitset inputs is evaluated only when
    ``consider_run`` is set; a run-typed input is always checked against the
    run rule and demoted if it is not the strictly smallest representation.
    """
    if isinstance(c, RunContainer):
        if len(c.runs) == 0:
            return empty_container()
        card = len(c)
        if _run_admissible(card, len(c.runs)):
            return c
        if card <= ARRAY_MAX:
            return ArrayContainer(_positions_from_runs(c.runs))
        return BitsetContainer(_words_from_runs(c.runs), card)
    if isinstance(c, ArrayContainer):
        card = len(c)
        if consider_run and card:
            n_runs = _run_count_of_values(c.values)
            if _run_admissible(card, n_runs):
                return RunContainer(_runs_from_positions(c.values))
        if card > ARRAY_MAX:
            return bitset_from_positions(c.values)
        return c
    card = c.cardinality
    if consider_run and card:
        n_runs = _run_count_of_words(c.words)
        if _run_admissible(card, n_runs):
            return RunContainer(_runs_from_positions(
                kernels.extract_set_bits(c.words)))
    if card <= ARRAY_MAX:
        return ArrayContainer(kernels.extract_set_bits(c.words))
    return c


def _container_from_values(values: np.ndarray) -> Container:
    if len(values) > ARRAY_MAX:
        return bitset_from_positions(values)
    return ArrayContainer(values)


def _container_from_words(words: np.ndarray, card: int) -> Container:
    if card <= ARRAY_MAX:
        return ArrayContainer(kernels.extract_set_bits(words))
    return BitsetContainer(words, card)


# -------------------------------------------------------- element operations

def container_contains(c: Container, v: int) -> bool:
    if isinstance(c, ArrayContainer):
        i = int(np.searchsorted(c.values, v))
        return i < len(c.values) and int(c.values[i]) == v
    if isinstance(c, BitsetContainer):
        return bool((int(c.words[v >> 6]) >> (v & 63)) & 1)
    runs = c.runs
    if len(runs) == 0:
        return False
    i = int(np.searchsorted(runs[:, 0], v, side="right")) - 1
    return i >= 0 and v <= int(runs[i, 0]) + int(runs[i, 1])


def container_add(c: Container, v: int):
    """Insert v; returns (container, changed).  The result is normalized."""
    if isinstance(c, ArrayContainer):
        vals = c.values
        i = int(np.searchsorted(vals, v))
        if i < len(vals) and int(vals[i]) == v:
            return c, False
        if len(vals) >= ARRAY_MAX:
            bs = bitset_from_positions(vals)
            return container_add(bs, v)[0], True
        c.values = np.insert(vals, i, v)
        if len(c.values) > c.capacity:
            c.capacity = min(max(2 * c.capacity, 4, len(c.values)), ARRAY_MAX)
        return c, True
    if isinstance(c, BitsetContainer):
        w = int(c.words[v >> 6])
        bit = 1 << (v & 63)
        if w & bit:
            return c, False
        c.words[v >> 6] = np.uint64(w | bit)
        c.cardinality += 1
        return c, True
    return _run_add(c, v)


def _run_add(c: RunContainer, v: int):
    runs = c.runs
    n = len(runs)
    i = int(np.searchsorted(runs[:, 0], v, side="right")) - 1 if n else -1
    if i >= 0 and v <= int(runs[i, 0]) + int(runs[i, 1]):
        return c, False
    joins_left = i >= 0 and v == int(runs[i, 0]) + int(runs[i, 1]) + 1
    joins_right = i + 1 < n and v == int(runs[i + 1, 0]) - 1
    if joins_left and joins_right:
        new_len = int(runs[i + 1, 0]) + int(runs[i + 1, 1]) - int(runs[i, 0])
        runs = np.delete(runs, i + 1, axis=0)
        runs[i, 1] = new_len
    elif joins_left:
        runs = runs.copy()
        runs[i, 1] += np.uint16(1)
    elif joins_right:
        runs = runs.copy()
        runs[i + 1, 0] -= np.uint16(1)
        runs[i + 1, 1] += np.uint16(1)
    else:
        runs = np.insert(runs, i + 1, (v, 0), axis=0)
    c.runs = runs
    c.capacity = max(c.capacity, len(runs))
    return container_normalize(c), True


def container_remove(c: Container, v: int):
    """Delete v; returns (container, changed).  May change the container type."""
    if isinstance(c, ArrayContainer):
        vals = c.values
        i = int(np.searchsorted(vals, v))
        if i >= len(vals) or int(vals[i]) != v:
            return c, False
        c.values = np.delete(vals, i)
        return c, True
    if isinstance(c, BitsetContainer):
        w = int(c.words[v >> 6])
        bit = 1 << (v & 63)
        if not (w & bit):
            return c, False
        c.words[v >> 6] = np.uint64(w & ~bit)
        c.cardinality -= 1
        if c.cardinality <= ARRAY_MAX:
            return ArrayContainer(kernels.extract_set_bits(c.words)), True
        return c, True
    return _run_remove(c, v)


def _run_remove(c: RunContainer, v: int):
    runs = c.runs
    n = len(runs)
    i = int(np.searchsorted(runs[:, 0], v, side="right")) - 1 if n else -1
    if i < 0 or v > int(runs[i, 0]) + int(runs[i, 1]):
        return c, False
    s, l = int(runs[i, 0]), int(runs[i, 1])
    if l == 0:
        runs = np.delete(runs, i, axis=0)
    elif v == s:
        runs = runs.copy()
        runs[i] = (s + 1, l - 1)
    elif v == s + l:
        runs = runs.copy()
        runs[i, 1] = np.uint16(l - 1)
    else:
        runs = runs.copy()
        runs[i] = (s, v - 1 - s)
        runs = np.insert(runs, i + 1, (v + 1, s + l - v - 1), axis=0)
    c.runs = runs
    c.capacity = max(c.capacity, len(runs))
    return container_normalize(c), True


# ------------------------------------------------------- interval arithmetic

def _intervals(c: RunContainer) -> list[tuple[int, int]]:
    return [(int(s), int(s) + int(l)) for s, l in c.runs.tolist()]


def _intervals_from_values(values: np.ndarray) -> list[tuple[int, int]]:
    return [(int(s), int(s) + int(l))
            for s, l in _runs_from_positions(values).tolist()]


def _iv_union(a, b):
    out: list[list[int]] = []
    for s, e in heapq.merge(a, b):
        if out and s <= out[-1][1] + 1:
            if e > out[-1][1]:
                out[-1][1] = e
        else:
            out.append([s, e])
    return [(s, e) for s, e in out]


def _iv_intersect(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        s = max(a[i][0], b[j][0])
        e = min(a[i][1], b[j][1])
        if s <= e:
            out.append((s, e))
        if a[i][1] < b[j][1]:
            i += 1
        else:
            j += 1
    return out


def _iv_difference(a, b):
    out = []
    j = 0
    nb = len(b)
    for s, e in a:
        cur = s
        while j < nb and b[j][1] < cur:
            j += 1
        k = j
        while k < nb and b[k][0] <= e:
            bs, be = b[k]
            if bs > cur:
                out.append((cur, bs - 1))
            cur = max(cur, be + 1)
            if cur > e:
                break
            k += 1
        if cur <= e:
            out.append((cur, e))
    return out


def _iv_xor(a, b):
    return _iv_union(_iv_difference(a, b), _iv_difference(b, a))


def _iv_card(ivs) -> int:
    return sum(e - s + 1 for s, e in ivs)


def _run_from_intervals(ivs) -> RunContainer:
    if not ivs:
        return RunContainer(np.empty((0, 2), dtype=np.uint16))
    return RunContainer(np.array([(s, e - s) for s, e in ivs], dtype=np.uint16))


_IV_OPS = {"and": _iv_intersect, "or": _iv_union,
           "andnot": _iv_difference, "xor": _iv_xor}

_ARRAY_KERNELS = {"and": "array_intersect", "or": "array_union",
                  "andnot": "array_difference", "xor": "array_xor"}


# --------------------------------------------------------------- pairwise op

def container_pairwise(op: str, a: Container, b: Container) -> Container:
    """Element-wise set operation between two containers of the same chunk.

    The result is normalized; an empty result comes back as an empty array
    container for the caller to drop.
    """
    if op not in kernels.OPS:
        raise ValueError(f"unknown op {op!r}")

    if isinstance(a, ArrayContainer) and isinstance(b, ArrayContainer):
        fn = getattr(kernels, _ARRAY_KERNELS[op])
        return _container_from_values(fn(a.values, b.values))

    if isinstance(a, BitsetContainer) and isinstance(b, BitsetContainer):
        words, card = kernels.bitset_op_with_count(a.words, b.words, op)
        return _container_from_words(words, card)

    if isinstance(a, ArrayContainer) and isinstance(b, BitsetContainer):
        if op == "and":
            return ArrayContainer(a.values[_bitset_probe(b.words, a.values)])
        if op == "andnot":
            return ArrayContainer(a.values[~_bitset_probe(b.words, a.values)])
        mode = "set" if op == "or" else "flip"
        words, delta = kernels.bitset_apply_array(b.words, a.values, mode, True)
        return _container_from_words(words, b.cardinality + delta)

    if isinstance(a, BitsetContainer) and isinstance(b, ArrayContainer):
        if op == "and":
            return ArrayContainer(b.values[_bitset_probe(a.words, b.values)])
        if op == "andnot":
            words, delta = kernels.bitset_apply_array(a.words, b.values, "clear", True)
            return _container_from_words(words, a.cardinality + delta)
        mode = "set" if op == "or" else "flip"
        words, delta = kernels.bitset_apply_array(a.words, b.values, mode, True)
        return _container_from_words(words, a.cardinality + delta)

    # at least one run container from here on
    if isinstance(a, RunContainer) and isinstance(b, RunContainer):
        ivs = _IV_OPS[op](_intervals(a), _intervals(b))
        return container_normalize(_run_from_intervals(ivs))

    if isinstance(a, RunContainer) and isinstance(b, ArrayContainer):
        if op == "and":
            return ArrayContainer(b.values[_values_in_runs(b.values, a.runs)])
        ivs = _IV_OPS[op](_intervals(a), _intervals_from_values(b.values))
        return container_normalize(_run_from_intervals(ivs))

    if isinstance(a, ArrayContainer) and isinstance(b, RunContainer):
        if op == "and":
            return ArrayContainer(a.values[_values_in_runs(a.values, b.runs)])
        if op == "andnot":
            return ArrayContainer(a.values[~_values_in_runs(a.values, b.runs)])
        ivs = _IV_OPS[op](_intervals_from_values(a.values), _intervals(b))
        return container_normalize(_run_from_intervals(ivs))

    if isinstance(a, RunContainer) and isinstance(b, BitsetContainer):
        rm = _words_from_runs(a.runs)
        if op == "and":
            words = rm & b.words
        elif op == "or":
            words = rm | b.words
        elif op == "xor":
            words = rm ^ b.words
        else:
            words = rm & ~b.words
        return _container_from_words(words, kernels.popcount_block(words))

    if isinstance(a, BitsetContainer) and isinstance(b, RunContainer):
        rm = _words_from_runs(b.runs)
        if op == "and":
            words = a.words & rm
        elif op == "or":
            words = a.words | rm
        elif op == "xor":
            words = a.words ^ rm
        else:
            words = a.words & ~rm
        return _container_from_words(words, kernels.popcount_block(words))

    raise TypeError(f"unsupported container pair {type(a)}, {type(b)}")


def _intersection_cardinality(a: Container, b: Container) -> int:
    if isinstance(a, ArrayContainer) and isinstance(b, ArrayContainer):
        return kernels.array_intersect(a.values, b.values, count_only=True)
    if isinstance(a, BitsetContainer) and isinstance(b, BitsetContainer):
        return kernels.bitset_op_count_only(a.words, b.words, "and")
    if isinstance(a, ArrayContainer) and isinstance(b, BitsetContainer):
        return int(_bitset_probe(b.words, a.values).sum())
    if isinstance(a, BitsetContainer) and isinstance(b, ArrayContainer):
        return int(_bitset_probe(a.words, b.values).sum())
    if isinstance(a, RunContainer) and isinstance(b, RunContainer):
        return _iv_card(_iv_intersect(_intervals(a), _intervals(b)))
    if isinstance(a, RunContainer) and isinstance(b, ArrayContainer):
        return int(_values_in_runs(b.values, a.runs).sum())
    if isinstance(a, ArrayContainer) and isinstance(b, RunContainer):
        return int(_values_in_runs(a.values, b.runs).sum())
    if isinstance(a, RunContainer) and isinstance(b, BitsetContainer):
        return kernels.popcount_block(_words_from_runs(a.runs) & b.words)
    if isinstance(a, BitsetContainer) and isinstance(b, RunContainer):
        return kernels.popcount_block(a.words & _words_from_runs(b.runs))
    raise TypeError(f"unsupported container pair {type(a)}, {type(b)}")


def container_pairwise_cardinality(op: str, a: Container, b: Container) -> int:
    """Cardinality of container_pairwise(op, a, b) without building the result."""
    if op not in kernels.OPS:
        raise ValueError(f"unknown op {op!r}")
    if isinstance(a, ArrayContainer) and isinstance(b, ArrayContainer):
        fn = getattr(kernels, _ARRAY_KERNELS[op])
        return fn(a.values, b.values, count_only=True)
    if isinstance(a, BitsetContainer) and isinstance(b, BitsetContainer):
        return kernels.bitset_op_count_only(a.words, b.words, op)
    inter = _intersection_cardinality(a, b)
    if op == "and":
        return inter
    if op == "or":
        return len(a) + len(b) - inter
    if op == "andnot":
        return len(a) - inter
    return len(a) + len(b) - 2 * inter


# ------------------------------------------------------------------ checking

def container_validate(c: Container, normalized: bool = True) -> None:
    """Raise AssertionError if the container breaks its invariants."""
    if isinstance(c, ArrayContainer):
        assert c.values.dtype == np.uint16
        assert len(c.values) <= ARRAY_MAX, "array container over 4096 values"
        if len(c.values) > 1:
            assert np.all(np.diff(c.values.astype(np.int32)) > 0), \
                "array values not strictly increasing"
        assert c.capacity >= len(c.values)
        return
    if isinstance(c, BitsetContainer):
        assert c.words.dtype == np.uint64 and len(c.words) == kernels.BLOCK_WORDS
        true_card = int(np.bitwise_count(c.words).sum(dtype=np.int64)) \
            if hasattr(np, "bitwise_count") else sum(int(w).bit_count() for w in c.words)
        assert c.cardinality == true_card, \
            f"bitset cardinality {c.cardinality} != popcount {true_card}"
        if normalized:
            assert c.cardinality > ARRAY_MAX, "bitset container under 4097 values"
        return
    assert isinstance(c, RunContainer)
    assert c.runs.dtype == np.uint16 and c.runs.ndim == 2 and c.runs.shape[1] == 2
    runs = c.runs.astype(np.int32)
    assert len(runs) > 0, "empty run container"
    ends = runs[:, 0] + runs[:, 1]
    assert np.all(ends <= 65535)
    if len(runs) > 1:
        assert np.all(runs[1:, 0] > ends[:-1] + 1), \
            "runs overlap or are adjacent"
    if normalized:
        assert _run_admissible(len(c), len(runs)), "run form not the smallest"
