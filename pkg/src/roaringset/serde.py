"""Wire format, text datasets, and the clustered synthetic generator.

Wire format (little-endian, normative):

* magic ``ROAR`` (4 bytes), then u32 container count n;
* n descriptors: u16 chunk key, u8 type tag (1 array / 2 bitset / 3 run),
  u8 zero pad, u32 cardinality;
* payloads in key order: array = cardinality x u16; bitset = 1024 x u64;
  run = u16 run count, then run count x (u16 start, u16 length).

Equal bitmaps serialize to equal bytes, and a decoded image re-encodes to the
identical bytes.

Dataset text grammar: a directory of files, one set per file, each file a
single line of comma-separated decimal 32-bit integers in strictly increasing
order with an optional trailing newline.  Sets are ordered by filename
(lexicographic).

Synthetic generation draws from a SplitMix64 stream so output is reproducible
from the seed alone:

* mix(z): z ^= z>>30; z *= 0xBF58476D1CE4E5B9; z ^= z>>27;
  z *= 0x94D049BB133111EB; z ^= z>>31  (64-bit wrapping);
* stream word k (k >= 1) for a seed s is mix(s + k*0x9E3779B97F4A7C15);
* the per-set seed for set i is mix(seed + (i+1)*0x9E3779B97F4A7C15);
  retry r of a set offsets the stream by r*(2*set_size+8) words.

Each set is a cumulative sum of gaps from a random start: with probability
99/100 (stream word < 99*2^64//100) the gap is 1 + (word mod 16), otherwise
1 + (word mod G), with G sized so the expected span is 0.9x the universe.  If
the sum overruns the universe, G is halved and the set redrawn, at most 16
times.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import containers as ct
from .bitmap import RoaringBitmap

MAGIC = b"ROAR"

_PHI = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_SMALL_GAP_CUTOFF = np.uint64((99 << 64) // 100)
_MAX_RETRIES = 16


class DecodeError(ValueError):
    """Malformed wire image; carries the byte offset of the problem."""

    def __init__(self, offset: int, message: str):
        super().__init__(f"at byte {offset}: {message}")
        self.offset = offset


class DatasetError(ValueError):
    pass


# -------------------------------------------------------------- wire format

def serialize(rb: RoaringBitmap) -> bytes:
    out = bytearray()
    out += MAGIC
    chunks = list(rb.chunks())
    out += struct.pack("<I", len(chunks))
    for key, c in chunks:
        out += struct.pack("<HBBI", key, c.tag, 0, len(c))
    for _, c in chunks:
        if isinstance(c, ct.ArrayContainer):
            out += c.values.astype("<u2").tobytes()
        elif isinstance(c, ct.BitsetContainer):
            out += c.words.astype("<u8").tobytes()
        else:
            out += struct.pack("<H", len(c.runs))
            out += c.runs.astype("<u2").tobytes()
    return bytes(out)


def deserialize(data: bytes) -> RoaringBitmap:
    off = 0

    def need(n: int, what: str) -> int:
        nonlocal off
        if len(data) - off < n:
            raise DecodeError(off, f"truncated {what}: need {n} bytes, "
                                   f"have {len(data) - off}")
        start = off
        off += n
        return start

    start = need(4, "magic")
    if data[start:start + 4] != MAGIC:
        raise DecodeError(0, "bad magic")
    start = need(4, "container count")
    (count,) = struct.unpack_from("<I", data, start)

    descriptors = []
    prev_key = -1
    for _ in range(count):
        start = need(8, "descriptor")
        key, tag, pad, card = struct.unpack_from("<HBBI", data, start)
        if pad != 0:
            raise DecodeError(start + 3, "nonzero descriptor pad")
        if tag not in (ct.TAG_ARRAY, ct.TAG_BITSET, ct.TAG_RUN):
            raise DecodeError(start + 2, f"unknown container type {tag}")
        if key <= prev_key:
            raise DecodeError(start, f"keys not strictly increasing at {key}")
        prev_key = key
        descriptors.append((key, tag, card))

    keys: list[int] = []
    conts: list[ct.Container] = []
    for key, tag, card in descriptors:
        if tag == ct.TAG_ARRAY:
            if not 1 <= card <= ct.ARRAY_MAX:
                raise DecodeError(off, f"array cardinality {card} out of range")
            start = need(2 * card, "array payload")
            values = np.frombuffer(data, dtype="<u2", count=card,
                                   offset=start).astype(np.uint16)
            if card > 1 and not np.all(np.diff(values.astype(np.int32)) > 0):
                raise DecodeError(start, "array values not strictly increasing")
            cont: ct.Container = ct.ArrayContainer(values)
        elif tag == ct.TAG_BITSET:
            start = need(8192, "bitset payload")
            words = np.frombuffer(data, dtype="<u8", count=1024,
                                  offset=start).astype(np.uint64)
            true_card = int(np.bitwise_count(words).sum(dtype=np.int64)) \
                if hasattr(np, "bitwise_count") \
                else sum(int(w).bit_count() for w in words)
            if true_card != card:
                raise DecodeError(start, f"cardinality mismatch: descriptor says "
                                         f"{card}, payload holds {true_card}")
            if card <= ct.ARRAY_MAX:
                raise DecodeError(start, f"bitset container with only {card} values")
            cont = ct.BitsetContainer(words, card)
        else:
            start = need(2, "run count")
            (n_runs,) = struct.unpack_from("<H", data, start)
            if n_runs == 0:
                raise DecodeError(start, "empty run container")
            start = need(4 * n_runs, "run payload")
            runs = np.frombuffer(data, dtype="<u2", count=2 * n_runs,
                                 offset=start).astype(np.uint16).reshape(-1, 2)
            r = runs.astype(np.int32)
            ends = r[:, 0] + r[:, 1]
            if np.any(ends > 0xFFFF):
                raise DecodeError(start, "run escapes the 16-bit chunk")
            if n_runs > 1 and not np.all(r[1:, 0] > ends[:-1] + 1):
                raise DecodeError(start, "runs overlap or are adjacent")
            true_card = n_runs + int(r[:, 1].sum())
            if true_card != card:
                raise DecodeError(start, f"cardinality mismatch: descriptor says "
                                         f"{card}, runs hold {true_card}")
            if not ct._run_admissible(card, n_runs):
                raise DecodeError(start, "run form is not the smallest representation")
            cont = ct.RunContainer(runs)
        keys.append(key)
        conts.append(cont)
    if off != len(data):
        raise DecodeError(off, f"{len(data) - off} trailing bytes")
    return RoaringBitmap._from_chunks(keys, conts)


# ------------------------------------------------------------ text datasets

@dataclass
class Dataset:
    """An ordered collection of sorted, distinct, non-empty integer sets."""

    name: str
    sets: list[np.ndarray] = field(default_factory=list)

    @property
    def universe(self) -> int:
        """1 + the largest value across all sets."""
        return 1 + max(int(s[-1]) for s in self.sets)

    def total_cardinality(self) -> int:
        return sum(len(s) for s in self.sets)

    def validate(self) -> None:
        if not self.sets:
            raise DatasetError(f"{self.name}: no sets")
        for i, s in enumerate(self.sets):
            _check_set(s, f"{self.name}[{i}]")


def _check_set(values: np.ndarray, where: str) -> None:
    if len(values) == 0:
        raise DatasetError(f"{where}: empty set")
    v = values.astype(np.int64)
    bad = np.flatnonzero((v < 0) | (v > 0xFFFFFFFF))
    if len(bad):
        raise DatasetError(f"{where}: value #{int(bad[0]) + 1} out of 32-bit range")
    if len(v) > 1:
        noninc = np.flatnonzero(np.diff(v) <= 0)
        if len(noninc):
            raise DatasetError(
                f"{where}: not strictly increasing at value #{int(noninc[0]) + 2}")


def load_dataset(path) -> Dataset:
    """Read a dataset directory: one comma-separated set per file, filename order."""
    p = Path(path)
    if not p.is_dir():
        raise DatasetError(f"{p}: not a directory")
    files = sorted(f for f in p.iterdir() if f.is_file())
    if not files:
        raise DatasetError(f"{p}: no set files")
    sets = []
    for f in files:
        text = f.read_text().strip()
        if not text:
            raise DatasetError(f"{f.name}: empty set")
        fields = text.split(",")
        try:
            values = np.array(fields, dtype=np.int64)
        except ValueError:
            bad = next((k for k, t in enumerate(fields)
                        if not t.strip().lstrip("-").isdigit()), 0)
            raise DatasetError(f"{f.name}: value #{bad + 1} is not an integer") from None
        _check_set(values, f.name)
        sets.append(values.astype(np.uint32))
    return Dataset(p.name, sets)


def write_dataset(dataset: Dataset, path) -> None:
    p = Path(path)
    p.mkdir(parents=True, exist_ok=True)
    width = max(4, len(str(len(dataset.sets) - 1)))
    for i, s in enumerate(dataset.sets):
        (p / f"set_{i:0{width}d}.txt").write_text(
            ",".join(map(str, s.tolist())) + "\n")


# --------------------------------------------------------------- generation

def _mix64(z: np.ndarray) -> np.ndarray:
    z = z ^ (z >> np.uint64(30))
    z = z * _MIX1
    z = z ^ (z >> np.uint64(27))
    z = z * _MIX2
    return z ^ (z >> np.uint64(31))


def _stream(seed: np.uint64, count: int, offset: int = 0) -> np.ndarray:
    ks = np.arange(offset + 1, offset + count + 1, dtype=np.uint64)
    return _mix64(seed + ks * _PHI)


def gen_clusterdata(seed: int, n_sets: int, set_size: int, universe: int,
                    name: str | None = None) -> Dataset:
    """Deterministic clustered sets: mostly small gaps with occasional large ones."""
    if n_sets < 1 or set_size < 1:
        raise DatasetError("n_sets and set_size must be positive")
    if set_size > universe:
        raise DatasetError(f"set_size {set_size} exceeds universe {universe}")
    if universe > 1 << 32:
        raise DatasetError("universe exceeds 32-bit range")
    ds = Dataset(name or f"clusterdata_seed{seed}")
    master = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
    set_seeds = _mix64(master + np.arange(1, n_sets + 1, dtype=np.uint64) * _PHI)
    for i in range(n_sets):
        ds.sets.append(_gen_one_set(set_seeds[i], set_size, universe))
    ds.validate()
    return ds


def _gen_one_set(set_seed: np.uint64, n: int, universe: int) -> np.ndarray:
    if n == universe:
        return np.arange(universe, dtype=np.uint32)
    if n == 1:
        start = int(_stream(set_seed, 1)[0] % np.uint64(universe))
        return np.array([start], dtype=np.uint32)
    # size the rare-gap bound so the expected span is 0.9 * universe
    target_gap = 0.9 * universe / (n - 1)
    big_gap = max(1, round(2 * (target_gap - 0.99 * 8.5) / 0.01 - 1))
    big_gap = min(big_gap, universe)
    for attempt in range(_MAX_RETRIES):
        words = _stream(set_seed, 2 * (n - 1) + 1, offset=attempt * (2 * n + 8))
        branch = words[0:2 * (n - 1):2]
        mag = words[1:2 * (n - 1):2]
        gaps = np.where(branch < _SMALL_GAP_CUTOFF,
                        1 + (mag % np.uint64(16)).astype(np.int64),
                        1 + (mag % np.uint64(big_gap)).astype(np.int64))
        cum = np.cumsum(gaps)
        span = int(cum[-1])
        if span <= universe - 1:
            start = int(words[-1] % np.uint64(universe - span))
            out = np.empty(n, dtype=np.int64)
            out[0] = start
            out[1:] = start + cum
            return out.astype(np.uint32)
        big_gap = max(1, big_gap // 2)
    raise DatasetError(
        f"could not fit {n} clustered values into a universe of {universe}")
