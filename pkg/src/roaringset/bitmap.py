"""The user-facing 32-bit integer set.

A bitmap is a sorted list of 16-bit chunk keys, each paired with one
non-empty, normalized container holding the low 16 bits of the members of
that chunk.  Set algebra walks the two key lists linearly and dispatches
matching chunks to the container layer; unmatched chunks are cloned eagerly
where the operation keeps them.  Inputs of binary operations are never
mutated.
"""

from __future__ import annotations

from bisect import bisect_left
from typing import Callable, Iterable, Iterator

import numpy as np

from . import containers as ct
from . import kernels

_KEEP_A = frozenset(("or", "xor", "andnot"))
_KEEP_B = frozenset(("or", "xor"))

# in-memory accounting: fixed header plus key/type-tag/cardinality per chunk
_HEADER_BYTES = 16
_PER_CONTAINER_BYTES = 2 + 1 + 4


class RoaringBitmap:
    """Compressed set of 32-bit unsigned integers."""

    __slots__ = ("_keys", "_containers")

    def __init__(self) -> None:
        self._keys: list[int] = []
        self._containers: list[ct.Container] = []

    # ------------------------------------------------------------- building

    @classmethod
    def from_values(cls, values) -> "RoaringBitmap":
        """Bulk-build from any iterable or array of 32-bit values."""
        arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                         dtype=np.uint64)
        rb = cls()
        if arr.size == 0:
            return rb
        arr = np.unique(arr)
        if int(arr[-1]) > 0xFFFFFFFF:
            raise ValueError("values must fit in 32 bits")
        hi = (arr >> np.uint64(16)).astype(np.int64)
        keys, starts = np.unique(hi, return_index=True)
        bounds = np.append(starts, len(arr))
        for k in range(len(keys)):
            lows = (arr[bounds[k]:bounds[k + 1]] & np.uint64(0xFFFF)).astype(np.uint16)
            if len(lows) <= ct.ARRAY_MAX:
                cont: ct.Container = ct.ArrayContainer(lows)
            else:
                cont = ct.bitset_from_positions(lows)
            rb._keys.append(int(keys[k]))
            rb._containers.append(cont)
        return rb

    @classmethod
    def _from_chunks(cls, keys: list[int], conts: list[ct.Container]) -> "RoaringBitmap":
        rb = cls()
        rb._keys = keys
        rb._containers = conts
        return rb

    def copy(self) -> "RoaringBitmap":
        return RoaringBitmap._from_chunks(
            list(self._keys), [c.copy() for c in self._containers])

    # ------------------------------------------------------------ basic API

    def __len__(self) -> int:
        return sum(len(c) for c in self._containers)

    @property
    def cardinality(self) -> int:
        return len(self)

    def __bool__(self) -> bool:
        return bool(self._keys)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RoaringBitmap):
            return NotImplemented
        return (self._keys == other._keys
                and all(a == b for a, b in zip(self._containers, other._containers)))

    def __repr__(self) -> str:
        return f"RoaringBitmap(card={len(self)}, chunks={len(self._keys)})"

    def chunks(self) -> Iterator[tuple[int, ct.Container]]:
        return zip(self._keys, self._containers)

    def __contains__(self, v: int) -> bool:
        key = v >> 16
        i = bisect_left(self._keys, key)
        if i == len(self._keys) or self._keys[i] != key:
            return False
        return ct.container_contains(self._containers[i], v & 0xFFFF)

    def add(self, v: int) -> bool:
        """Insert v; True when the bitmap changed."""
        if not 0 <= v <= 0xFFFFFFFF:
            raise ValueError("value out of 32-bit range")
        key, low = v >> 16, v & 0xFFFF
        i = bisect_left(self._keys, key)
        if i < len(self._keys) and self._keys[i] == key:
            cont, changed = ct.container_add(self._containers[i], low)
            self._containers[i] = cont
            return changed
        self._keys.insert(i, key)
        self._containers.insert(i, ct.ArrayContainer(np.array([low], dtype=np.uint16)))
        return True

    def remove(self, v: int) -> bool:
        """Delete v; True when the bitmap changed."""
        key, low = v >> 16, v & 0xFFFF
        i = bisect_left(self._keys, key)
        if i == len(self._keys) or self._keys[i] != key:
            return False
        cont, changed = ct.container_remove(self._containers[i], low)
        if changed and len(cont) == 0:
            del self._keys[i]
            del self._containers[i]
        else:
            self._containers[i] = cont
        return changed

    # ------------------------------------------------------------ iteration

    def to_array(self) -> np.ndarray:
        """All members, ascending, as uint32."""
        parts = []
        for key, c in self.chunks():
            base = np.uint32(key << 16)
            parts.append(ct.container_positions(c).astype(np.uint32) + base)
        if not parts:
            return np.empty(0, dtype=np.uint32)
        return np.concatenate(parts)

    def __iter__(self) -> Iterator[int]:
        for key, c in self.chunks():
            base = key << 16
            for low in ct.container_positions(c).tolist():
                yield base + low

    def for_each(self, visitor: Callable[[int], bool]) -> int:
        """Call visitor on members in ascending order while it returns True.

        Returns the number of values visited (equals the cardinality when the
        visitor never stops the walk).
        """
        count = 0
        for key, c in self.chunks():
            base = key << 16
            for low in ct.container_positions(c).tolist():
                count += 1
                if not visitor(base + low):
                    return count
        return count

    # ----------------------------------------------------------- set algebra

    def op(self, op: str, other: "RoaringBitmap") -> "RoaringBitmap":
        """and/or/andnot/xor between whole bitmaps; inputs untouched."""
        if op not in kernels.OPS:
            raise ValueError(f"unknown op {op!r}")
        keep_a = op in _KEEP_A
        keep_b = op in _KEEP_B
        ka, ca = self._keys, self._containers
        kb, cb = other._keys, other._containers
        na, nb = len(ka), len(kb)
        keys: list[int] = []
        conts: list[ct.Container] = []
        i = j = 0
        while i < na and j < nb:
            x, y = ka[i], kb[j]
            if x == y:
                res = ct.container_pairwise(op, ca[i], cb[j])
                if len(res):
                    keys.append(x)
                    conts.append(res)
                i += 1
                j += 1
            elif x < y:
                if keep_a:
                    keys.append(x)
                    conts.append(ca[i].copy())
                i += 1
            else:
                if keep_b:
                    keys.append(y)
                    conts.append(cb[j].copy())
                j += 1
        if keep_a:
            while i < na:
                keys.append(ka[i])
                conts.append(ca[i].copy())
                i += 1
        if keep_b:
            while j < nb:
                keys.append(kb[j])
                conts.append(cb[j].copy())
                j += 1
        return RoaringBitmap._from_chunks(keys, conts)

    def op_cardinality(self, op: str, other: "RoaringBitmap") -> int:
        """Cardinality of op(self, other) without materializing it.

        Everything reduces to the intersection size: |A|+|B|-|A∩B| for the
        union, |A|-|A∩B| for the difference, |A|+|B|-2|A∩B| for the symmetric
        difference.
        """
        if op not in kernels.OPS:
            raise ValueError(f"unknown op {op!r}")
        inter = 0
        ka, ca = self._keys, self._containers
        kb, cb = other._keys, other._containers
        i = j = 0
        while i < len(ka) and j < len(kb):
            x, y = ka[i], kb[j]
            if x == y:
                inter += ct.container_pairwise_cardinality("and", ca[i], cb[j])
                i += 1
                j += 1
            elif x < y:
                i += 1
            else:
                j += 1
        if op == "and":
            return inter
        if op == "or":
            return len(self) + len(other) - inter
        if op == "andnot":
            return len(self) - inter
        return len(self) + len(other) - 2 * inter

    def __and__(self, other):
        return self.op("and", other)

    def __or__(self, other):
        return self.op("or", other)

    def __sub__(self, other):
        return self.op("andnot", other)

    def __xor__(self, other):
        return self.op("xor", other)

    # ---------------------------------------------------------- wide unions

    @staticmethod
    def union_many(bitmaps: Iterable["RoaringBitmap"]) -> "RoaringBitmap":
        """Sequential union of many bitmaps.

        Accumulates into a working copy; bitset chunks of the accumulator are
        ORed in lazily, with their cardinality repaired in one final pass.
        An empty collection yields the empty bitmap.
        """
        bitmaps = list(bitmaps)
        if not bitmaps:
            return RoaringBitmap()
        acc = bitmaps[0].copy()
        dirty: set[int] = set()
        for bm in bitmaps[1:]:
            for key, cont in bm.chunks():
                i = bisect_left(acc._keys, key)
                if i == len(acc._keys) or acc._keys[i] != key:
                    acc._keys.insert(i, key)
                    acc._containers.insert(i, cont.copy())
                    continue
                cur = acc._containers[i]
                if isinstance(cur, ct.BitsetContainer):
                    if isinstance(cont, ct.BitsetContainer):
                        cur.words |= cont.words
                    elif isinstance(cont, ct.ArrayContainer):
                        cur.words, _ = kernels.bitset_apply_array(
                            cur.words, cont.values, "set", False)
                    else:
                        cur.words |= ct._words_from_runs(cont.runs)
                    cur.cardinality = -1
                    dirty.add(key)
                elif isinstance(cont, ct.BitsetContainer):
                    words = cont.words.copy()
                    if isinstance(cur, ct.ArrayContainer):
                        words, _ = kernels.bitset_apply_array(
                            words, cur.values, "set", False)
                    else:
                        words |= ct._words_from_runs(cur.runs)
                    acc._containers[i] = ct.BitsetContainer(words, -1)
                    dirty.add(key)
                else:
                    acc._containers[i] = ct.container_pairwise("or", cur, cont)
        if dirty:
            for i, key in enumerate(acc._keys):
                if key in dirty:
                    c = acc._containers[i]
                    c.cardinality = kernels.popcount_block(c.words)
        return acc

    # ------------------------------------------------------- storage tuning

    def run_optimize(self) -> bool:
        """Re-pick each container's type with run candidacy; True if any changed type."""
        changed = False
        for i, c in enumerate(self._containers):
            opt = ct.container_normalize(c, consider_run=True)
            if type(opt) is not type(c):
                changed = True
            self._containers[i] = opt
        return changed

    def shrink_to_fit(self) -> int:
        """Trim overallocated container capacity; returns bytes reclaimed."""
        reclaimed = 0
        for c in self._containers:
            if isinstance(c, ct.ArrayContainer):
                reclaimed += 2 * (c.capacity - len(c.values))
                c.capacity = len(c.values)
            elif isinstance(c, ct.RunContainer):
                reclaimed += 4 * (c.capacity - len(c.runs))
                c.capacity = len(c.runs)
        return reclaimed

    def memory_bytes(self) -> tuple[int, int]:
        """(in-memory bytes, serialized bytes) under the documented accounting.

        In memory: a 16-byte header, then per container 7 bytes of bookkeeping
        plus the payload at its allocated capacity (2 B/slot arrays,
        8192 B bitsets, 4 B/run-slot runs).  Serialized: the exact wire length.
        """
        in_mem = _HEADER_BYTES
        ser = 8  # magic + container count
        for _, c in self.chunks():
            in_mem += _PER_CONTAINER_BYTES
            ser += 8  # descriptor
            if isinstance(c, ct.ArrayContainer):
                in_mem += 2 * c.capacity
                ser += 2 * len(c.values)
            elif isinstance(c, ct.BitsetContainer):
                in_mem += 8192
                ser += 8192
            else:
                in_mem += 4 * c.capacity
                ser += 2 + 4 * len(c.runs)
        return in_mem, ser

    # ------------------------------------------------------------ validation

    def validate(self) -> None:
        """Raise AssertionError if any structural invariant is broken."""
        assert len(self._keys) == len(self._containers)
        assert all(0 <= k <= 0xFFFF for k in self._keys)
        assert all(a < b for a, b in zip(self._keys, self._keys[1:])), \
            "keys not strictly increasing"
        for c in self._containers:
            assert len(c) > 0, "stored container is empty"
            ct.container_validate(c, normalized=True)
